"""Memoryless tabular learner: softmax choice, temperature decay, Q update.

Q-tables and policies are plain 2-D float arrays indexed ``[state, action]``.
The ``_nb_*`` kernels are numba-compiled and shared with the simulation loop;
the public wrappers validate their inputs and call the same kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

#: Below this temperature the softmax is replaced by its zero-temperature limit.
SATURATION_TAU = 1e-12


@dataclass(frozen=True)
class LearnerConfig:
    alpha: float = 0.1
    lam: float = 5e-6
    tau1: float = 0.1
    init_low: float = 0.0
    init_high: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0.0 <= self.lam < 1.0:
            raise ValueError(f"lambda must lie in [0, 1), got {self.lam}")
        if not self.tau1 > 0:
            raise ValueError(f"tau1 must be positive, got {self.tau1}")
        if self.init_low > self.init_high:
            raise ValueError("init_low must not exceed init_high")

    def with_bounds(self, low: float, high: float) -> "LearnerConfig":
        return LearnerConfig(self.alpha, self.lam, self.tau1, low, high)


@numba.njit(cache=True)
def _nb_softmax_row(q, tau, out):
    n = q.shape[0]
    qmax = q[0]
    for a in range(1, n):
        if q[a] > qmax:
            qmax = q[a]
    if tau < SATURATION_TAU:
        k = 0
        for a in range(n):
            if q[a] == qmax:
                k += 1
        for a in range(n):
            out[a] = 1.0 / k if q[a] == qmax else 0.0
        return
    total = 0.0
    for a in range(n):
        e = math.exp((q[a] - qmax) / tau)
        out[a] = e
        total += e
    # total >= 1 because the maximal entry contributes exp(0)
    for a in range(n):
        out[a] /= total


@numba.njit(cache=True)
def _nb_softmax_matrix(q, tau, out):
    for s in range(q.shape[0]):
        _nb_softmax_row(q[s], tau, out[s])


@numba.njit(cache=True)
def _nb_sample(p, u):
    """Inverse-CDF draw for a uniform variate ``u`` in [0, 1)."""
    acc = 0.0
    last = 0
    for a in range(p.shape[0]):
        if p[a] > 0.0:
            acc += p[a]
            last = a
            if u < acc:
                return a
    # u fell in the rounding gap above the accumulated mass
    return last


def init_q_table(
    n_states: int, n_actions: int, low: float, high: float, rng: np.random.Generator
) -> np.ndarray:
    """Q-table with i.i.d. uniform entries on ``[low, high]``."""
    if low > high:
        raise ValueError(f"low ({low}) exceeds high ({high})")
    if low == high:
        return np.full((n_states, n_actions), float(low))
    return rng.uniform(low, high, size=(n_states, n_actions))


def temperature(t, tau1: float, lam: float):
    """Temperature in period ``t >= 1``: ``tau1 * exp(-lam * (t - 1))``."""
    t = np.asarray(t)
    if np.any(t < 1):
        raise ValueError("period index must be >= 1")
    out = tau1 * np.exp(-lam * (t - 1.0))
    return float(out) if out.ndim == 0 else out


def softmax_row(q_row, tau: float) -> np.ndarray:
    q_row = np.ascontiguousarray(q_row, dtype=float)
    if not np.all(np.isfinite(q_row)):
        raise ValueError("Q values must be finite")
    if not tau > 0:
        raise ValueError("temperature must be positive")
    out = np.empty_like(q_row)
    _nb_softmax_row(q_row, float(tau), out)
    return out


def softmax_policy(q: np.ndarray, tau: float) -> np.ndarray:
    """Row-wise softmax of a whole Q-table."""
    q = np.ascontiguousarray(q, dtype=float)
    if not tau > 0:
        raise ValueError("temperature must be positive")
    out = np.empty_like(q)
    _nb_softmax_matrix(q, float(tau), out)
    return out


def greedy_policy(q: np.ndarray, atol: float = 1e-9) -> np.ndarray:
    """Zero-temperature policy: uniform over the near-maximal entries of each row."""
    q = np.asarray(q, dtype=float)
    mask = q >= q.max(axis=1, keepdims=True) - atol
    return mask / mask.sum(axis=1, keepdims=True)


def sample(probabilities, rng: np.random.Generator) -> int:
    p = np.ascontiguousarray(probabilities, dtype=float)
    if np.any(p < 0):
        raise ValueError("probabilities must be non-negative")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("probabilities must sum to 1")
    return int(_nb_sample(p, rng.random()))


def q_update(q: np.ndarray, s: int, a: int, r: float, alpha: float) -> np.ndarray:
    """Constant step-size update of entry ``(s, a)`` towards reward ``r``, in place."""
    if not (0 <= s < q.shape[0] and 0 <= a < q.shape[1]):
        raise IndexError(f"(state, action) = ({s}, {a}) outside table of shape {q.shape}")
    q[s, a] += alpha * (r - q[s, a])
    return q
