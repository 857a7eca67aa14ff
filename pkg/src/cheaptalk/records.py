"""On-disk formats: per-run JSON-lines records and per-cell CSV aggregates."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

# serialized key -> attribute name
_RUN_KEYS = {
    "seed": "seed",
    "game": "game",
    "fingerprint": "fingerprint",
    "bias": "bias",
    "alpha": "alpha",
    "lambda": "lam",
    "bias_index": "bias_index",
    "alpha_index": "alpha_index",
    "lambda_index": "lambda_index",
    "replication": "replication",
    "converged": "converged",
    "periods_elapsed": "periods_elapsed",
    "U_S": "u_sender",
    "U_R": "u_receiver",
    "MI": "mutual_info",
    "max_subopt_S": "max_subopt_sender",
    "max_subopt_R": "max_subopt_receiver",
    "gain_S": "gain_sender",
    "gain_R": "gain_receiver",
    "is_eps_nash": "is_eps_nash",
}


@dataclass
class RunRecord:
    seed: int
    game: dict
    fingerprint: str
    bias: float
    alpha: float
    lam: float
    bias_index: int
    alpha_index: int
    lambda_index: int
    replication: int
    converged: bool
    periods_elapsed: int
    u_sender: float
    u_receiver: float
    mutual_info: float
    max_subopt_sender: float
    max_subopt_receiver: float
    gain_sender: float
    gain_receiver: float
    is_eps_nash: bool
    policy_sender: np.ndarray | None = None
    policy_receiver: np.ndarray | None = None

    @property
    def cell(self) -> tuple[int, int, int]:
        return (self.bias_index, self.alpha_index, self.lambda_index)

    @property
    def sort_key(self) -> tuple[int, int, int, int]:
        return (*self.cell, self.replication)

    def to_json(self, with_policies: bool = True) -> str:
        d = {key: getattr(self, attr) for key, attr in _RUN_KEYS.items()}
        if with_policies and self.policy_sender is not None:
            d["policy_S"] = np.asarray(self.policy_sender).tolist()
            d["policy_R"] = np.asarray(self.policy_receiver).tolist()
        return json.dumps(d, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "RunRecord":
        d = json.loads(line)
        kwargs = {attr: d[key] for key, attr in _RUN_KEYS.items()}
        if "policy_S" in d:
            kwargs["policy_sender"] = np.asarray(d["policy_S"], dtype=float)
            kwargs["policy_receiver"] = np.asarray(d["policy_R"], dtype=float)
        return cls(**kwargs)

    def same_values(self, other: "RunRecord") -> bool:
        """Field-by-field equality (NaN equals NaN, arrays compared exactly)."""
        for f in fields(self):
            a, b = getattr(self, f.name), getattr(other, f.name)
            if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
                if a is None or b is None or not np.array_equal(a, b):
                    return False
            elif isinstance(a, float) and isinstance(b, float) and math.isnan(a) and math.isnan(b):
                continue
            elif a != b:
                return False
        return True


def emit_records(records, path, with_policies: bool = False) -> Path:
    """Write one JSON object per line, overwriting ``path``."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w") as fh:
            for rec in records:
                fh.write(rec.to_json(with_policies) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write run records to {path}: {exc}") from exc
    return path


def read_records(path) -> list[RunRecord]:
    path = Path(path)
    try:
        with path.open() as fh:
            return [RunRecord.from_json(line) for line in fh if line.strip()]
    except OSError as exc:
        raise OSError(f"cannot read run records from {path}: {exc}") from exc


# ---------------------------------------------------------------- aggregates

SUMMARY_METRICS = (
    "u_sender",
    "u_receiver",
    "mutual_info",
    "max_subopt_sender",
    "max_subopt_receiver",
    "gain_sender",
    "gain_receiver",
)
SUMMARY_STATS = ("mean", "median", "q05", "q25", "q75", "q95", "min", "max", "hist_lo", "hist_hi", "hist")

AGGREGATE_COLUMNS = (
    "bias", "alpha", "lambda", "bias_index", "alpha_index", "lambda_index",
    "n_types", "n_messages", "n_actions", "prior", "loss", "fingerprint",
    "n_expected", "n_runs", "n_missing", "complete", "n_converged", "n_eps_nash",
    "convergence_freq", "eps_nash_freq",
    *(f"{m}_{s}" for m in SUMMARY_METRICS for s in SUMMARY_STATS),
    "modal_sender", "modal_sender_freq", "modal_receiver", "modal_receiver_freq", "modal_mi",
    "babbling_u_sender", "babbling_u_receiver", "optimal_u_sender", "optimal_u_receiver", "optimal_mi",
    "n_equilibria",
)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, np.ndarray):
        return json.dumps(v.tolist())
    if isinstance(v, (list, tuple)):
        return ";".join(_fmt(x) for x in v)
    return str(v)


def emit_aggregates(aggregates, path) -> Path:
    """Write aggregate rows as CSV with the fixed ``AGGREGATE_COLUMNS`` order."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(AGGREGATE_COLUMNS)
            for agg in aggregates:
                row = agg.as_row()
                writer.writerow([_fmt(row.get(c)) for c in AGGREGATE_COLUMNS])
    except OSError as exc:
        raise OSError(f"cannot write aggregates to {path}: {exc}") from exc
    return path


def read_aggregates(path) -> list[dict]:
    """Rows of an aggregate CSV as dicts of strings."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise OSError(f"cannot read aggregates from {path}: {exc}") from exc


def parse_float(s: str) -> float:
    return float(s) if s not in ("", None) else float("nan")


def parse_hist(s: str) -> np.ndarray:
    return np.array([int(x) for x in s.split(";")]) if s else np.zeros(0, dtype=int)


def parse_matrix(s: str):
    return np.asarray(json.loads(s), dtype=float) if s else None
