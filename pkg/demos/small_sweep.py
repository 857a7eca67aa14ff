"""A desk-sized sweep: a few biases, a handful of seeds, plus figures.

Runs the same pipeline as ``cheaptalk sweep`` (seeded runs, per-cell
aggregates) and then draws two of the figures from the aggregate CSV.
Takes a minute or two on one core; set WORKERS to use more.

    WORKERS=4 python demos/small_sweep.py out/
"""

import os
import sys
from pathlib import Path

from cheaptalk import SweepConfig, run_sweep
from cheaptalk.figures import FigureSpec, render_figure
from cheaptalk.records import emit_aggregates, emit_records

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_sweep")
cfg = SweepConfig(
    bias_grid=(0.0, 0.1, 0.2, 0.3, 0.45),
    n_replications=8,
    base_seed=1,
    workers=int(os.environ.get("WORKERS", "1")),
)
print(f"{cfg.n_runs()} runs ...")
res = run_sweep(cfg, progress=lambda done, total: print(f"\r{done}/{total}", end="", flush=True))
print()

emit_records(res.records, out / "runs.jsonl", with_policies=True)
agg_path = emit_aggregates(res.aggregates, out / "aggregates.csv")

for a in res.aggregates:
    mi = a.summaries["mutual_info"]
    print(f"b={a.bias:.2f}  eps-Nash {a.eps_nash_freq:.2f}  median MI {mi.median:.3f} "
          f"(optimal eq. {a.optimal_mi:.3f})  median U_R {a.summaries['u_receiver'].median:.4f}")

for kind in ("mi_distribution", "equilibrium_ladder"):
    data, svg = render_figure(FigureSpec(kind, (str(agg_path),), str(out / kind)))
    print("wrote", svg)
