"""Experiment configuration files.

A YAML mapping with up to four blocks; every key is optional::

    game:     {n_types: 6, n_messages: 6, n_actions: 11, bias: 0.0,
               prior: uniform, loss: quadratic}
    learner:  {alpha: 0.1, lambda: 5.0e-6, tau1: 0.1}
    sim:      {max_periods: 10000000, window: 10000, rel_tol: 0.001,
               check_stride: 1, seed: 0}
    sweep:    {bias_grid: [...], n_replications: 1000, alpha_grid: [0.1],
               lambda_grid: [5.0e-6], base_seed: 0, workers: 1,
               store_policies: false}

``n_messages`` and ``n_actions`` default to ``n_types`` and ``2 n_types - 1``.
``bias_grid`` may also be given as ``{start, stop, step}`` (inclusive).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .game import GameSpec, build_game
from .learner import LearnerConfig
from .simulation import SimConfig, default_learners
from .sweep import SweepConfig, default_bias_grid

SCHEMA = {
    "game": {"n_types", "n_messages", "n_actions", "bias", "prior", "loss"},
    "learner": {"alpha", "lambda", "tau1"},
    "sim": {"max_periods", "window", "rel_tol", "check_stride", "seed"},
    "sweep": {"bias_grid", "n_replications", "alpha_grid", "lambda_grid", "base_seed", "workers", "store_policies"},
}


class ConfigError(ValueError):
    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        where = ""
        if path:
            where = f"{path}:{line}: " if line else f"{path}: "
        super().__init__(where + message)
        self.line = line


@dataclass(frozen=True)
class ExperimentConfig:
    game: dict = field(default_factory=dict)
    alpha: float = 0.1
    lam: float = 5e-6
    tau1: float = 0.1
    sim: SimConfig = field(default_factory=SimConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    store_policies: bool = False

    def game_spec(self) -> GameSpec:
        return build_game(**self.game)

    def learners(self, spec: GameSpec | None = None) -> tuple[LearnerConfig, LearnerConfig]:
        return default_learners(spec or self.game_spec(), self.alpha, self.lam, self.tau1)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, sim=replace(self.sim, seed=seed), sweep=replace(self.sweep, base_seed=seed))

    def with_workers(self, workers: int) -> "ExperimentConfig":
        return replace(self, sweep=replace(self.sweep, workers=workers))


def _key_lines(text: str) -> dict[tuple[str, ...], int]:
    """1-based line of every mapping key, addressed by its path."""
    lines: dict[tuple[str, ...], int] = {}

    def walk(node, prefix):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                path = (*prefix, str(k.value))
                lines[path] = k.start_mark.line + 1
                walk(v, path)

    root = yaml.compose(text)
    if root is not None:
        walk(root, ())
    return lines


def _bias_grid(value, err):
    if isinstance(value, dict):
        extra = set(value) - {"start", "stop", "step"}
        if extra or not {"start", "stop", "step"} <= set(value):
            err("bias_grid mapping needs exactly start, stop and step", ("sweep", "bias_grid"))
        start, stop, step = (float(value[k]) for k in ("start", "stop", "step"))
        if step <= 0:
            err("bias_grid step must be positive", ("sweep", "bias_grid"))
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 12) for i in range(n))
    if not isinstance(value, list):
        err("bias_grid must be a list or a {start, stop, step} mapping", ("sweep", "bias_grid"))
    return tuple(float(b) for b in value)


def parse_config_text(text: str, path: str = "<config>") -> ExperimentConfig:
    try:
        data = yaml.safe_load(text)
        lines = _key_lines(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML: {exc}", path, mark.line + 1 if mark else None) from exc
    if data is None:
        data = {}

    def err(msg, key=()):
        raise ConfigError(msg, path, lines.get(tuple(key)))

    if not isinstance(data, dict):
        err("top level must be a mapping")
    for block, body in data.items():
        if block not in SCHEMA:
            err(f"unknown block {block!r} (expected one of {sorted(SCHEMA)})", (block,))
        if body is None:
            continue
        if not isinstance(body, dict):
            err(f"block {block!r} must be a mapping", (block,))
        for key in body:
            if key not in SCHEMA[block]:
                err(f"unknown key {block}.{key} (expected one of {sorted(SCHEMA[block])})", (block, key))

    game = dict(data.get("game") or {})
    learner = data.get("learner") or {}
    sim = data.get("sim") or {}
    sweep = data.get("sweep") or {}

    def check(block, key, fn):
        try:
            return fn()
        except (TypeError, ValueError) as exc:
            err(f"{block}.{key}: {exc}", (block, key))

    for key in list(game):
        check("game", key, lambda: build_game(**{key: game[key]}))
    check("game", next(iter(game), "n_types"), lambda: build_game(**game))
    if "prior" in game:
        game["prior"] = str(game["prior"])
    if "loss" in game:
        game["loss"] = str(game["loss"])

    alpha = check("learner", "alpha", lambda: float(learner.get("alpha", 0.1)))
    lam = check("learner", "lambda", lambda: float(learner.get("lambda", 5e-6)))
    tau1 = check("learner", "tau1", lambda: float(learner.get("tau1", 0.1)))
    check("learner", "alpha", lambda: LearnerConfig(alpha, lam, tau1))

    def as_int(block, key, default, src):
        v = src.get(key, default)
        if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
            err(f"{block}.{key} must be an integer, got {v!r}", (block, key))
        return int(v)

    sim_cfg = check("sim", next(iter(sim), "window"), lambda: SimConfig(
        max_periods=as_int("sim", "max_periods", 10_000_000, sim),
        window=as_int("sim", "window", 10_000, sim),
        rel_tol=float(sim.get("rel_tol", 1e-3)),
        check_stride=as_int("sim", "check_stride", 1, sim),
        seed=as_int("sim", "seed", 0, sim),
    ))

    bias_grid = _bias_grid(sweep["bias_grid"], err) if "bias_grid" in sweep else tuple(default_bias_grid())
    for key in ("alpha_grid", "lambda_grid"):
        if key in sweep and not isinstance(sweep[key], list):
            err(f"sweep.{key} must be a list", ("sweep", key))
    store = sweep.get("store_policies", False)
    if not isinstance(store, bool):
        err("sweep.store_policies must be true or false", ("sweep", "store_policies"))
    sweep_cfg = check("sweep", next(iter(sweep), "n_replications"), lambda: SweepConfig(
        game={k: v for k, v in game.items() if k != "bias"},
        bias_grid=bias_grid,
        n_replications=as_int("sweep", "n_replications", 1000, sweep),
        alpha_grid=tuple(float(a) for a in sweep.get("alpha_grid", [alpha])),
        lambda_grid=tuple(float(x) for x in sweep.get("lambda_grid", [lam])),
        tau1=tau1,
        max_periods=sim_cfg.max_periods,
        window=sim_cfg.window,
        rel_tol=sim_cfg.rel_tol,
        check_stride=sim_cfg.check_stride,
        base_seed=as_int("sweep", "base_seed", 0, sweep),
        workers=as_int("sweep", "workers", 1, sweep),
    ))
    return ExperimentConfig(game, alpha, lam, tau1, sim_cfg, sweep_cfg, store)


def parse_config(path) -> ExperimentConfig:
    """Read and validate a config file; missing keys take baseline values."""
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError as exc:
        raise ConfigError("config file not found", str(path)) from exc
    return parse_config_text(text, str(path))
