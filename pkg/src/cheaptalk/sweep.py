"""Replicated simulations over bias and hyperparameter grids."""

from __future__ import annotations

import hashlib
import logging
import struct
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field

import numpy as np

from .analysis import canonicalize_messages, modal_policy, nash_deviation_metrics, normalized_mutual_information
from .equilibria import enumerate_equilibria, optimal_equilibrium
from .game import GameSpec, babbling_benchmark, build_game
from .records import SUMMARY_METRICS, RunRecord
from .simulation import SimConfig, default_learners, run_simulation

log = logging.getLogger(__name__)

N_BINS = 50


def default_bias_grid() -> list[float]:
    return [round(0.005 * i, 3) for i in range(101)]


@dataclass(frozen=True)
class SweepConfig:
    game: dict = field(default_factory=dict)
    bias_grid: tuple[float, ...] = field(default_factory=lambda: tuple(default_bias_grid()))
    n_replications: int = 1000
    alpha_grid: tuple[float, ...] = (0.1,)
    lambda_grid: tuple[float, ...] = (5e-6,)
    tau1: float = 0.1
    max_periods: int = 10_000_000
    window: int = 10_000
    rel_tol: float = 1e-3
    check_stride: int = 1
    base_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        for name in ("bias_grid", "alpha_grid", "lambda_grid"):
            if len(getattr(self, name)) == 0:
                raise ValueError(f"{name} must not be empty")
        if self.n_replications < 1:
            raise ValueError("n_replications must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if any(b < 0 for b in self.bias_grid):
            raise ValueError("biases must be non-negative")

    def base_game(self) -> GameSpec:
        return build_game(**{**self.game, "bias": 0.0})

    def n_runs(self) -> int:
        return len(self.bias_grid) * len(self.alpha_grid) * len(self.lambda_grid) * self.n_replications


#: Hyperparameter grid explored in the robustness study.
ALPHA_GRID = (0.025, 0.05, 0.1, 0.2, 0.4)
LAMBDA_GRID = (2e-5, 1e-5, 0.5e-5, 0.25e-5, 0.125e-5)

_SEED_DOMAIN = b"cheaptalk/run-seed/v1"


def derive_seed(base_seed: int, game_hash: str, bias_index: int, alpha_index: int,
                lambda_index: int, replication_index: int) -> int:
    """64-bit run seed: 8-byte BLAKE2b digest, keyed with
    ``cheaptalk/run-seed/v1``, of the little-endian packed base seed, the game
    hash and the four grid indices."""
    idx = (bias_index, alpha_index, lambda_index, replication_index)
    if any(i < 0 for i in idx):
        raise ValueError("indices must be non-negative")
    h = hashlib.blake2b(digest_size=8, key=_SEED_DOMAIN)
    h.update(struct.pack("<Q", base_seed % 2**64))
    h.update(game_hash.encode())
    h.update(struct.pack("<4Q", *idx))
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class RunTask:
    game: dict
    bias: float
    alpha: float
    lam: float
    tau1: float
    sim: SimConfig
    bias_index: int
    alpha_index: int
    lambda_index: int
    replication: int


def iter_tasks(cfg: SweepConfig):
    game_hash = cfg.base_game().fingerprint(include_bias=False)
    base = {**cfg.game}
    base.pop("bias", None)
    for i, b in enumerate(cfg.bias_grid):
        for j, a in enumerate(cfg.alpha_grid):
            for k, lam in enumerate(cfg.lambda_grid):
                for r in range(cfg.n_replications):
                    seed = derive_seed(cfg.base_seed, game_hash, i, j, k, r)
                    sim = SimConfig(cfg.max_periods, cfg.window, cfg.rel_tol, cfg.check_stride, seed)
                    yield RunTask(base, float(b), float(a), float(lam), cfg.tau1, sim, i, j, k, r)


def run_task(task: RunTask) -> RunRecord:
    spec = build_game(**task.game, bias=task.bias)
    sender, receiver = default_learners(spec, task.alpha, task.lam, task.tau1)
    res = run_simulation(spec, sender, receiver, task.sim)
    m = nash_deviation_metrics(res.policy_sender, res.policy_receiver, spec)
    return RunRecord(
        seed=task.sim.seed,
        game={k: v for k, v in spec.config().items() if k != "bias"},
        fingerprint=spec.fingerprint(include_bias=False),
        bias=task.bias,
        alpha=task.alpha,
        lam=task.lam,
        bias_index=task.bias_index,
        alpha_index=task.alpha_index,
        lambda_index=task.lambda_index,
        replication=task.replication,
        converged=res.converged,
        periods_elapsed=res.periods_elapsed,
        u_sender=m.u_sender,
        u_receiver=m.u_receiver,
        mutual_info=m.mutual_info,
        max_subopt_sender=m.max_subopt_sender,
        max_subopt_receiver=m.max_subopt_receiver,
        gain_sender=m.gain_sender,
        gain_receiver=m.gain_receiver,
        is_eps_nash=m.is_eps_nash,
        policy_sender=res.policy_sender,
        policy_receiver=res.policy_receiver,
    )


@dataclass
class SweepResult:
    records: list[RunRecord]
    aggregates: list["AggregateRecord"]
    missing: list[dict]

    def manifest(self) -> dict:
        return {
            "n_records": len(self.records),
            "n_missing": len(self.missing),
            "missing": self.missing,
            "incomplete_cells": sorted({(m["bias_index"], m["alpha_index"], m["lambda_index"]) for m in self.missing}),
        }


def run_sweep(cfg: SweepConfig, progress=None) -> SweepResult:
    """Run every (bias, alpha, lambda, replication) cell and aggregate.

    A task that raises is listed in ``missing``; its cell is aggregated from
    the runs that did finish and flagged incomplete. Output order does not
    depend on ``cfg.workers``.
    """
    tasks = list(iter_tasks(cfg))
    records: list[RunRecord] = []
    missing: list[dict] = []

    def failed(task: RunTask, exc: BaseException):
        log.error("run %s failed: %s", (task.bias_index, task.alpha_index, task.lambda_index, task.replication), exc)
        missing.append({
            "bias_index": task.bias_index, "alpha_index": task.alpha_index,
            "lambda_index": task.lambda_index, "replication": task.replication,
            "seed": task.sim.seed, "error": repr(exc),
        })

    if cfg.workers == 1:
        for n, task in enumerate(tasks, 1):
            try:
                records.append(run_task(task))
            except Exception as exc:  # noqa: BLE001 - a failed run must not sink the sweep
                failed(task, exc)
            if progress:
                progress(n, len(tasks))
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = {pool.submit(run_task, t): t for t in tasks}
            for n, fut in enumerate(as_completed(futures), 1):
                try:
                    records.append(fut.result())
                except Exception as exc:  # noqa: BLE001
                    failed(futures[fut], exc)
                if progress:
                    progress(n, len(tasks))

    records.sort(key=lambda r: r.sort_key)
    missing.sort(key=lambda m: (m["bias_index"], m["alpha_index"], m["lambda_index"], m["replication"]))

    by_cell: dict[tuple[int, int, int], list[RunRecord]] = {}
    for r in records:
        by_cell.setdefault(r.cell, []).append(r)
    missing_per_cell: dict[tuple[int, int, int], int] = {}
    for m in missing:
        key = (m["bias_index"], m["alpha_index"], m["lambda_index"])
        missing_per_cell[key] = missing_per_cell.get(key, 0) + 1

    aggregates = []
    base = cfg.base_game()
    for i, b in enumerate(cfg.bias_grid):
        spec = base.with_bias(b)
        for j in range(len(cfg.alpha_grid)):
            for k in range(len(cfg.lambda_grid)):
                cell = by_cell.get((i, j, k))
                if not cell:
                    continue
                agg = aggregate(cell, spec)
                agg.n_expected = cfg.n_replications
                agg.n_missing = missing_per_cell.get((i, j, k), 0)
                aggregates.append(agg)
    return SweepResult(records, aggregates, missing)


# ---------------------------------------------------------------- aggregation


@dataclass
class Summary:
    mean: float
    median: float
    q05: float
    q25: float
    q75: float
    q95: float
    min: float
    max: float
    hist_lo: float
    hist_hi: float
    hist: np.ndarray

    @classmethod
    def of(cls, values, lo: float, hi: float, bins: int = N_BINS) -> "Summary":
        v = np.asarray(values, dtype=float)
        if v.size == 0:
            nan = float("nan")
            return cls(nan, nan, nan, nan, nan, nan, nan, nan, lo, hi, np.zeros(bins, dtype=int))
        q = np.quantile(v, [0.05, 0.25, 0.5, 0.75, 0.95])
        # out-of-range values land in the edge bins so counts add up to len(v)
        hist, _ = np.histogram(np.clip(v, lo, hi), bins=bins, range=(lo, hi))
        return cls(float(v.mean()), float(q[2]), float(q[0]), float(q[1]), float(q[3]), float(q[4]),
                   float(v.min()), float(v.max()), lo, hi, hist)


def metric_ranges(spec: GameSpec) -> dict[str, tuple[float, float]]:
    bab = babbling_benchmark(spec)
    return {
        "u_sender": (bab.u_sender - 0.05, 0.0),
        "u_receiver": (bab.u_receiver - 0.05, 0.0),
        "mutual_info": (0.0, 1.0),
        "max_subopt_sender": (0.0, 1.0),
        "max_subopt_receiver": (0.0, 1.0),
        "gain_sender": (0.0, 0.05),
        "gain_receiver": (0.0, 0.05),
    }


@dataclass
class AggregateRecord:
    bias: float
    alpha: float
    lam: float
    cell: tuple[int, int, int]
    game: dict
    fingerprint: str
    n_runs: int
    n_converged: int
    n_eps_nash: int
    summaries: dict[str, Summary]
    modal_sender: np.ndarray | None
    modal_sender_freq: np.ndarray | None
    modal_receiver: np.ndarray | None
    modal_receiver_freq: np.ndarray | None
    modal_mi: float
    babbling_u_sender: float
    babbling_u_receiver: float
    optimal_u_sender: float
    optimal_u_receiver: float
    optimal_mi: float
    n_equilibria: int
    n_expected: int = 0
    n_missing: int = 0

    @property
    def convergence_freq(self) -> float:
        return self.n_converged / self.n_runs

    @property
    def eps_nash_freq(self) -> float:
        return self.n_eps_nash / self.n_runs

    @property
    def complete(self) -> bool:
        return self.n_missing == 0

    def as_row(self) -> dict:
        row = {
            "bias": self.bias, "alpha": self.alpha, "lambda": self.lam,
            "bias_index": self.cell[0], "alpha_index": self.cell[1], "lambda_index": self.cell[2],
            "n_types": self.game["n_types"], "n_messages": self.game["n_messages"],
            "n_actions": self.game["n_actions"], "prior": self.game["prior"], "loss": self.game["loss"],
            "fingerprint": self.fingerprint,
            "n_expected": self.n_expected or self.n_runs, "n_runs": self.n_runs, "n_missing": self.n_missing,
            "complete": self.complete, "n_converged": self.n_converged, "n_eps_nash": self.n_eps_nash,
            "convergence_freq": self.convergence_freq, "eps_nash_freq": self.eps_nash_freq,
            "modal_sender": self.modal_sender, "modal_sender_freq": self.modal_sender_freq,
            "modal_receiver": self.modal_receiver, "modal_receiver_freq": self.modal_receiver_freq,
            "modal_mi": self.modal_mi,
            "babbling_u_sender": self.babbling_u_sender, "babbling_u_receiver": self.babbling_u_receiver,
            "optimal_u_sender": self.optimal_u_sender, "optimal_u_receiver": self.optimal_u_receiver,
            "optimal_mi": self.optimal_mi, "n_equilibria": self.n_equilibria,
        }
        for name, s in self.summaries.items():
            for stat in ("mean", "median", "q05", "q25", "q75", "q95", "min", "max", "hist_lo", "hist_hi"):
                row[f"{name}_{stat}"] = getattr(s, stat)
            row[f"{name}_hist"] = [int(c) for c in s.hist]
        return row


def aggregate(records, spec: GameSpec) -> AggregateRecord:
    """Summaries for one grid cell.

    Payoff and informativeness distributions use converged runs only; the
    epsilon-Nash frequency uses every run; modal policies use the
    epsilon-Nash runs after canonical message relabelling.
    """
    records = sorted(records, key=lambda r: r.sort_key)
    if not records:
        raise ValueError("aggregate needs at least one record")
    first = records[0]
    converged = [r for r in records if r.converged]
    ranges = metric_ranges(spec)
    summaries = {m: Summary.of([getattr(r, m) for r in converged], *ranges[m]) for m in SUMMARY_METRICS}

    nash = [r for r in records if r.is_eps_nash and r.policy_sender is not None]
    modal_s = modal_s_freq = modal_r = modal_r_freq = None
    modal_mi = float("nan")
    if nash:
        canon = [canonicalize_messages(r.policy_sender, r.policy_receiver, spec) for r in nash]
        modal_s, modal_s_freq = modal_policy([c[0] for c in canon])
        modal_r, modal_r_freq = modal_policy([c[1] for c in canon])
        modal_mi = normalized_mutual_information(modal_s, spec)

    bab = babbling_benchmark(spec)
    eqs = enumerate_equilibria(spec)
    opt = optimal_equilibrium(spec, eqs)
    return AggregateRecord(
        bias=first.bias,
        alpha=first.alpha,
        lam=first.lam,
        cell=first.cell,
        game=spec.config(),
        fingerprint=spec.fingerprint(include_bias=False),
        n_runs=len(records),
        n_converged=len(converged),
        n_eps_nash=sum(r.is_eps_nash for r in records),
        summaries=summaries,
        modal_sender=modal_s,
        modal_sender_freq=modal_s_freq,
        modal_receiver=modal_r,
        modal_receiver_freq=modal_r_freq,
        modal_mi=modal_mi,
        babbling_u_sender=bab.u_sender,
        babbling_u_receiver=bab.u_receiver,
        optimal_u_sender=opt.u_sender,
        optimal_u_receiver=opt.u_receiver,
        optimal_mi=opt.mutual_info,
        n_equilibria=len(eqs),
    )
