"""Discretized sender-receiver game: grids, priors, losses and payoffs."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

#: Absolute tolerance used when comparing expected utilities for ties.
TIE_TOL = 1e-12


class PriorKind(str, Enum):
    UNIFORM = "uniform"
    INCREASING = "increasing"
    DECREASING = "decreasing"


class LossKind(str, Enum):
    QUADRATIC = "quadratic"
    QUARTIC = "quartic"
    ABSOLUTE = "absolute"


class Role(str, Enum):
    SENDER = "sender"
    RECEIVER = "receiver"


def loss(kind: LossKind | str, d):
    """Loss of a distance ``d`` (scalar or array)."""
    kind = LossKind(kind)
    d = np.asarray(d, dtype=float)
    if kind is LossKind.QUADRATIC:
        out = d * d
    elif kind is LossKind.QUARTIC:
        out = (d * d) ** 2
    else:
        out = np.abs(d)
    return out[()] if out.ndim == 0 else out


def prior_masses(kind: PriorKind | str, n: int) -> np.ndarray:
    """Probability mass vector over ``n`` ordered types.

    Linear priors use integer weights ``k`` (increasing) or ``n + 1 - k``
    (decreasing) for the k-th type, k = 1..n.
    """
    kind = PriorKind(kind)
    k = np.arange(1, n + 1, dtype=float)
    if kind is PriorKind.UNIFORM:
        w = np.ones(n)
    elif kind is PriorKind.INCREASING:
        w = k
    else:
        w = n + 1 - k
    return w / w.sum()


def _grid(n: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, n) if n > 1 else np.zeros(1)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GameSpec:
    """Immutable description of one discretized cheap-talk game.

    Types, messages and actions are addressed by index everywhere; ``types``
    and ``actions`` are value lookup tables. ``sender_utility[i, j]`` and
    ``receiver_utility[i, j]`` hold the payoff of action ``j`` at type ``i``.
    """

    n_types: int
    n_messages: int
    n_actions: int
    bias: float
    prior_kind: PriorKind
    loss_kind: LossKind
    types: np.ndarray = field(repr=False)
    actions: np.ndarray = field(repr=False)
    prior: np.ndarray = field(repr=False)
    sender_utility: np.ndarray = field(repr=False)
    receiver_utility: np.ndarray = field(repr=False)

    def config(self) -> dict:
        """Plain-dict form accepted by :func:`build_game`."""
        return {
            "n_types": self.n_types,
            "n_messages": self.n_messages,
            "n_actions": self.n_actions,
            "bias": self.bias,
            "prior": self.prior_kind.value,
            "loss": self.loss_kind.value,
        }

    def fingerprint(self, include_bias: bool = True) -> str:
        """Stable hex digest of the game configuration."""
        cfg = self.config()
        if not include_bias:
            cfg.pop("bias")
        blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def with_bias(self, bias: float) -> "GameSpec":
        cfg = self.config()
        cfg["bias"] = bias
        return build_game(**cfg)


def build_game(
    n_types: int = 6,
    n_messages: int | None = None,
    n_actions: int | None = None,
    bias: float = 0.0,
    prior: PriorKind | str = PriorKind.UNIFORM,
    loss: LossKind | str = LossKind.QUADRATIC,
) -> GameSpec:
    """Construct a game on uniform grids over [0, 1].

    Defaults reproduce the baseline construction: as many messages as types
    and ``2 * n_types - 1`` actions.
    """
    if n_messages is None:
        n_messages = n_types
    if n_actions is None:
        n_actions = 2 * n_types - 1
    for name, v in (("n_types", n_types), ("n_messages", n_messages), ("n_actions", n_actions)):
        if isinstance(v, bool) or int(v) != v or v < 1:
            raise ValueError(f"{name} must be a positive integer, got {v!r}")
    bias = float(bias)
    if not np.isfinite(bias) or bias < 0:
        raise ValueError(f"bias must be a finite non-negative number, got {bias!r}")
    prior_kind = PriorKind(prior)
    loss_kind = LossKind(loss)

    types = _grid(int(n_types))
    actions = _grid(int(n_actions))
    diff = actions[None, :] - types[:, None]
    return GameSpec(
        n_types=int(n_types),
        n_messages=int(n_messages),
        n_actions=int(n_actions),
        bias=bias,
        prior_kind=prior_kind,
        loss_kind=loss_kind,
        types=_readonly(types),
        actions=_readonly(actions),
        prior=_readonly(prior_masses(prior_kind, int(n_types))),
        sender_utility=_readonly(-_loss_matrix(loss_kind, diff - bias)),
        receiver_utility=_readonly(-_loss_matrix(loss_kind, diff)),
    )


def _loss_matrix(kind: LossKind, d: np.ndarray) -> np.ndarray:
    return np.asarray(loss(kind, d), dtype=float)


def utility(role: Role | str, theta: float, action: float, spec: GameSpec) -> float:
    """Payoff of ``role`` when the type is ``theta`` and the action is ``action``."""
    role = Role(role)
    d = action - theta
    if role is Role.SENDER:
        d -= spec.bias
    return -float(loss(spec.loss_kind, d))


def utility_matrix(role: Role | str, spec: GameSpec) -> np.ndarray:
    return spec.sender_utility if Role(role) is Role.SENDER else spec.receiver_utility


def argmax_set(values: np.ndarray, tol: float = TIE_TOL) -> np.ndarray:
    """Indices whose value is within ``tol`` of the maximum, ascending."""
    values = np.asarray(values, dtype=float)
    return np.flatnonzero(values >= values.max() - tol)


@dataclass(frozen=True)
class Babbling:
    action_index: int
    action: float
    u_receiver: float
    u_sender: float


def babbling_benchmark(spec: GameSpec) -> Babbling:
    """Receiver's ex-ante optimal action and both ex-ante payoffs when no
    information is transmitted. Ties go to the smaller action."""
    expected = spec.prior @ spec.receiver_utility
    j = int(argmax_set(expected)[0])
    return Babbling(
        action_index=j,
        action=float(spec.actions[j]),
        u_receiver=float(expected[j]),
        u_sender=float(spec.prior @ spec.sender_utility[:, j]),
    )
