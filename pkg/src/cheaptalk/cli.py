"""Command-line entry point: ``cheaptalk {run,sweep,enumerate,analyze,plot}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from .analysis import nash_deviation_metrics
from .config import ConfigError, ExperimentConfig, parse_config
from .equilibria import enumerate_equilibria, infeasible_partitions
from .figures import FIGURE_KINDS, FigureError, FigureSpec, render_figure
from .game import build_game
from .records import RunRecord, emit_aggregates, emit_records, read_records
from .sweep import RunTask, run_sweep, run_task

log = logging.getLogger("cheaptalk")

WORKERS_ENV = "CHEAPTALK_WORKERS"


def _load_config(args) -> ExperimentConfig:
    cfg = parse_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    workers = args.workers if getattr(args, "workers", None) else os.environ.get(WORKERS_ENV)
    if workers:
        cfg = cfg.with_workers(int(workers))
    return cfg


def cmd_run(args) -> int:
    cfg = _load_config(args)
    game = dict(cfg.game)
    if args.bias is not None:
        game["bias"] = args.bias
    spec = build_game(**game)
    task = RunTask(
        game={k: v for k, v in game.items() if k != "bias"}, bias=spec.bias, alpha=cfg.alpha, lam=cfg.lam,
        tau1=cfg.tau1, sim=cfg.sim, bias_index=0, alpha_index=0, lambda_index=0, replication=0,
    )
    rec = run_task(task)
    line = rec.to_json(with_policies=True)
    if args.out:
        emit_records([rec], args.out, with_policies=True)
        log.info("wrote %s", args.out)
    else:
        print(line)
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out or "sweep_out")
    n = cfg.sweep.n_runs()
    log.info("running %d simulations with %d worker(s)", n, cfg.sweep.workers)

    def progress(done, total):
        if done == total or done % max(1, total // 20) == 0:
            log.info("%d/%d runs done", done, total)

    result = run_sweep(cfg.sweep, progress=progress)
    store = cfg.store_policies or args.store_policies
    emit_records(result.records, out / "runs.jsonl", with_policies=store)
    emit_aggregates(result.aggregates, out / "aggregates.csv")
    (out / "manifest.json").write_text(json.dumps(result.manifest(), indent=2))
    log.info("wrote %s", out)
    return 0 if not result.missing else 2


ENUM_COLUMNS = ("bias", "n_blocks", "cuts", "block_sizes", "block_actions", "U_S", "U_R", "MI")


def cmd_enumerate(args) -> int:
    cfg = _load_config(args)
    base = build_game(**cfg.game)
    biases = [args.bias] if args.bias is not None else cfg.sweep.bias_grid
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(ENUM_COLUMNS)
        for b in biases:
            spec = base.with_bias(b)
            for eq in enumerate_equilibria(spec):
                w.writerow([
                    format(b, ".17g"), eq.n_blocks,
                    ";".join(map(str, eq.partition.cuts)),
                    ";".join(map(str, eq.partition.sizes)),
                    ";".join(format(float(spec.actions[a]), ".17g") for a in eq.block_actions),
                    format(eq.u_sender, ".17g"), format(eq.u_receiver, ".17g"), format(eq.mutual_info, ".17g"),
                ])
        skipped = infeasible_partitions(base)
        if skipped:
            log.warning("%d partitions need more than %d messages and were skipped", len(skipped), base.n_messages)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_analyze(args) -> int:
    records = read_records(args.records)
    out, mismatches = [], 0
    for rec in records:
        if rec.policy_sender is None:
            raise ValueError(f"record with seed {rec.seed} has no stored policies")
        spec = build_game(**rec.game, bias=rec.bias)
        m = nash_deviation_metrics(rec.policy_sender, rec.policy_receiver, spec)
        new = RunRecord(**{**rec.__dict__, **{
            "u_sender": m.u_sender, "u_receiver": m.u_receiver, "mutual_info": m.mutual_info,
            "max_subopt_sender": m.max_subopt_sender, "max_subopt_receiver": m.max_subopt_receiver,
            "gain_sender": m.gain_sender, "gain_receiver": m.gain_receiver, "is_eps_nash": m.is_eps_nash,
        }})
        mismatches += not new.same_values(rec)
        out.append(new)
    if args.out:
        emit_records(out, args.out, with_policies=True)
    print(json.dumps({"records": len(out), "mismatches": mismatches}))
    return 0 if mismatches == 0 or not args.check else 3


def cmd_plot(args) -> int:
    spec = FigureSpec(args.kind, tuple(args.aggregates), args.out or f"figure_{args.kind}")
    data, svg = render_figure(spec)
    log.info("wrote %s and %s", data, svg)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cheaptalk", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="YAML experiment config")
        p.add_argument("--seed", type=int, help="override sim.seed and sweep.base_seed")
        p.add_argument("--out", help="output file or directory")
        return p

    p = common(sub.add_parser("run", help="one simulation; prints or writes a JSON-lines record"))
    p.add_argument("--bias", type=float)
    p.set_defaults(func=cmd_run)

    p = common(sub.add_parser("sweep", help="replicated runs over the configured grids"))
    p.add_argument("--workers", type=int, help=f"worker processes (overrides ${WORKERS_ENV})")
    p.add_argument("--store-policies", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = common(sub.add_parser("enumerate", help="monotone partitional equilibria as CSV"))
    p.add_argument("--bias", type=float, help="single bias instead of sweep.bias_grid")
    p.set_defaults(func=cmd_enumerate)

    p = common(sub.add_parser("analyze", help="recompute metrics from stored policies"))
    p.add_argument("records", help="JSON-lines file written with policies")
    p.add_argument("--check", action="store_true", help="exit 3 if any recomputed metric differs")
    p.set_defaults(func=cmd_analyze)

    p = common(sub.add_parser("plot", help="figure data CSV and SVG from aggregate CSVs"))
    p.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    p.add_argument("aggregates", nargs="+")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, FigureError, OSError, ValueError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
