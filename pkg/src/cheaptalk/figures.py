"""Plot data and quick-look SVG images from aggregate CSV files.

The CSV written next to each image holds exactly the plotted series and is
the stable output; the SVG is a convenience rendering.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .equilibria import enumerate_equilibria
from .game import build_game
from .records import parse_float, parse_hist, parse_matrix, read_aggregates

FIGURE_KINDS = (
    "deviation_vs_bias",
    "eps_nash_frequency_grid",
    "modal_policy_heatmap",
    "payoff_distribution",
    "mi_distribution",
    "equilibrium_ladder",
)

REQUIRED_COLUMNS = {
    "deviation_vs_bias": ("bias", "alpha", "lambda", "max_subopt_sender_mean", "max_subopt_receiver_mean",
                          "gain_sender_mean", "gain_receiver_mean"),
    "eps_nash_frequency_grid": ("bias", "alpha", "lambda", "eps_nash_freq"),
    "modal_policy_heatmap": ("bias", "alpha", "lambda", "modal_sender", "modal_sender_freq",
                             "modal_receiver", "modal_receiver_freq"),
    "payoff_distribution": ("bias", "alpha", "lambda", "u_sender_hist", "u_sender_hist_lo", "u_sender_hist_hi",
                            "u_sender_median", "u_receiver_hist", "u_receiver_hist_lo", "u_receiver_hist_hi",
                            "u_receiver_median", "babbling_u_sender", "babbling_u_receiver",
                            "optimal_u_sender", "optimal_u_receiver"),
    "mi_distribution": ("bias", "alpha", "lambda", "mutual_info_hist", "mutual_info_hist_lo",
                        "mutual_info_hist_hi", "mutual_info_median", "optimal_mi"),
    "equilibrium_ladder": ("bias", "alpha", "lambda", "modal_mi", "n_types", "n_messages", "n_actions",
                           "prior", "loss"),
}


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple[str, ...]
    output: str  # path prefix; ``.csv`` and ``.svg`` are appended
    options: dict = field(default_factory=dict)


class FigureError(ValueError):
    pass


def _load(spec: FigureSpec) -> list[dict]:
    if spec.kind not in FIGURE_KINDS:
        raise FigureError(f"unknown figure kind {spec.kind!r}; expected one of {FIGURE_KINDS}")
    rows = []
    for path in spec.inputs:
        rows.extend(read_aggregates(path))
    if not rows:
        raise FigureError("no aggregate rows in " + ", ".join(spec.inputs))
    missing = [c for c in REQUIRED_COLUMNS[spec.kind] if c not in rows[0]]
    if missing:
        raise FigureError(f"{spec.kind} needs aggregate columns {missing}")
    rows.sort(key=lambda r: (float(r["alpha"]), float(r["lambda"]), float(r["bias"])))
    return rows


def _cell(r: dict) -> tuple[float, float]:
    return float(r["alpha"]), float(r["lambda"])


def _bin_edges(r: dict, metric: str) -> np.ndarray:
    counts = parse_hist(r[f"{metric}_hist"])
    return np.linspace(parse_float(r[f"{metric}_hist_lo"]), parse_float(r[f"{metric}_hist_hi"]), len(counts) + 1)


def figure_data(spec: FigureSpec) -> tuple[list[str], list[list]]:
    """Header and rows of the tidy table behind a figure."""
    rows = _load(spec)
    kind = spec.kind
    out: list[list] = []
    if kind == "deviation_vs_bias":
        header = ["bias", "alpha", "lambda", "max_subopt_sender", "max_subopt_receiver", "gain_sender", "gain_receiver"]
        for r in rows:
            out.append([float(r["bias"]), *_cell(r)] + [parse_float(r[f"{c}_mean"]) for c in header[3:]])
    elif kind == "eps_nash_frequency_grid":
        header = ["bias", "alpha", "lambda", "eps_nash_freq"]
        out = [[float(r["bias"]), *_cell(r), parse_float(r["eps_nash_freq"])] for r in rows]
    elif kind == "modal_policy_heatmap":
        header = ["bias", "alpha", "lambda", "agent", "state", "choice", "probability", "frequency"]
        for r in rows:
            for agent in ("sender", "receiver"):
                mat = parse_matrix(r[f"modal_{agent}"])
                freq = parse_matrix(r[f"modal_{agent}_freq"])
                if mat is None:
                    continue
                for s, c in zip(*np.nonzero(mat)):
                    out.append([float(r["bias"]), *_cell(r), agent, int(s), int(c), float(mat[s, c]), float(freq[s])])
    elif kind == "payoff_distribution":
        header = ["bias", "alpha", "lambda", "agent", "bin_lo", "bin_hi", "count", "median", "babbling", "optimal"]
        for r in rows:
            for agent, metric in (("sender", "u_sender"), ("receiver", "u_receiver")):
                edges = _bin_edges(r, metric)
                for i, c in enumerate(parse_hist(r[f"{metric}_hist"])):
                    out.append([float(r["bias"]), *_cell(r), agent, edges[i], edges[i + 1], int(c),
                                parse_float(r[f"{metric}_median"]), parse_float(r[f"babbling_{metric}"]),
                                parse_float(r[f"optimal_{metric}"])])
    elif kind == "mi_distribution":
        header = ["bias", "alpha", "lambda", "bin_lo", "bin_hi", "count", "median", "babbling", "optimal"]
        for r in rows:
            edges = _bin_edges(r, "mutual_info")
            for i, c in enumerate(parse_hist(r["mutual_info_hist"])):
                out.append([float(r["bias"]), *_cell(r), edges[i], edges[i + 1], int(c),
                            parse_float(r["mutual_info_median"]), 0.0, parse_float(r["optimal_mi"])])
    else:  # equilibrium_ladder
        header = ["bias", "alpha", "lambda", "series", "mutual_info", "u_receiver"]
        for r in rows:
            game = build_game(int(r["n_types"]), int(r["n_messages"]), int(r["n_actions"]),
                              float(r["bias"]), r["prior"], r["loss"])
            for eq in enumerate_equilibria(game):
                out.append([float(r["bias"]), *_cell(r), "equilibrium", eq.mutual_info, eq.u_receiver])
            out.append([float(r["bias"]), *_cell(r), "modal", parse_float(r["modal_mi"]), float("nan")])
    return header, out


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])


def render_figure(spec: FigureSpec) -> tuple[Path, Path]:
    """Write ``<output>.csv`` and ``<output>.svg``; nothing is written on error."""
    header, rows = figure_data(spec)
    base = Path(spec.output)
    base.parent.mkdir(parents=True, exist_ok=True)
    data_path = base.with_name(base.name + ".csv")
    svg_path = base.with_name(base.name + ".svg")
    _write_csv(data_path, header, rows)
    _render_svg(spec.kind, header, rows, svg_path)
    return data_path, svg_path


def _render_svg(kind: str, header, rows, path: Path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    col = {h: i for i, h in enumerate(header)}
    first = (rows[0][1], rows[0][2]) if rows else None
    sel = [r for r in rows if (r[1], r[2]) == first]
    fig, ax = plt.subplots(figsize=(7, 4))
    if kind == "deviation_vs_bias":
        b = [r[0] for r in sel]
        for name in header[3:]:
            ax.plot(b, [r[col[name]] for r in sel], label=name)
        ax.legend(fontsize=7)
    elif kind == "eps_nash_frequency_grid":
        cells = sorted({(r[1], r[2]) for r in rows})
        for c in cells:
            pts = [r for r in rows if (r[1], r[2]) == c]
            ax.plot([r[0] for r in pts], [r[3] for r in pts], label=f"alpha={c[0]:g}, lambda={c[1]:g}")
        ax.set_ylim(-0.05, 1.05)
        ax.legend(fontsize=6)
    elif kind == "modal_policy_heatmap":
        biases = sorted({r[0] for r in sel})
        for x, b in enumerate(biases):
            pts = [r for r in sel if r[0] == b and r[3] == "sender"]
            ax.scatter([x + 0.08 * r[5] for r in pts], [r[4] for r in pts], s=[40 * r[6] for r in pts], c="tab:blue")
        ax.set_xticks(range(len(biases)), [f"{b:g}" for b in biases])
        ax.set_ylabel("type (point offset = canonical message)")
    elif kind in ("payoff_distribution", "mi_distribution"):
        if kind == "payoff_distribution":
            sel = [r for r in sel if r[3] == "receiver"]
        lo_i, hi_i, n_i = col["bin_lo"], col["bin_hi"], col["count"]
        biases = sorted({r[0] for r in sel})
        for b in biases:
            pts = [r for r in sel if r[0] == b]
            total = max(1, sum(r[n_i] for r in pts))
            for r in pts:
                if r[n_i]:
                    ax.plot([b, b], [r[lo_i], r[hi_i]], color="tab:blue", alpha=min(1.0, 0.15 + r[n_i] / total), lw=3)
        ax.plot(biases, [next(r[col["optimal"]] for r in sel if r[0] == b) for b in biases], color="red")
        ax.plot(biases, [next(r[col["babbling"]] for r in sel if r[0] == b) for b in biases], ":", color="gray")
    else:
        eq = [r for r in sel if r[3] == "equilibrium"]
        modal = [r for r in sel if r[3] == "modal"]
        ax.scatter([r[0] for r in eq], [r[4] for r in eq], color="gray", s=8)
        ax.scatter([r[0] for r in modal], [r[4] for r in modal], color="tab:blue", s=12)
    ax.set_xlabel("bias")
    ax.set_title(kind.replace("_", " "))
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
