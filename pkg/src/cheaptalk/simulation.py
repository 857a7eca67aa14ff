"""Repeated play between a sender and a receiver learner.

Each period draws a type from the prior, lets the sender pick a message and
the receiver an action from their softmax policies, pays both agents and
updates the two visited Q entries. Every ``check_stride`` periods both full
policies are recomputed and compared with the previous snapshot; the run
stops once both relative changes stay below ``rel_tol`` for ``window``
consecutive checks.

A run consumes a single ``numpy.random.Generator`` in a fixed order: the
sender Q-table, the receiver Q-table, then per period the type, the message
and the action.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .game import GameSpec, babbling_benchmark
from .learner import (
    LearnerConfig,
    _nb_sample,
    _nb_softmax_matrix,
    _nb_softmax_row,
    greedy_policy,
    init_q_table,
    softmax_policy,
)


@dataclass(frozen=True)
class SimConfig:
    max_periods: int = 10_000_000
    window: int = 10_000
    rel_tol: float = 1e-3
    check_stride: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.check_stride < 1:
            raise ValueError("check_stride must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_periods < self.window:
            raise ValueError("max_periods must be >= window")


@dataclass(frozen=True, eq=False)
class SimResult:
    """Outcome of one run.

    ``policy_*`` are the policies implied by the final Q-tables in the
    zero-temperature limit (uniform over tied maxima); ``softmax_*`` are the
    policies actually in use at the final temperature.
    """

    q_sender: np.ndarray
    q_receiver: np.ndarray
    policy_sender: np.ndarray
    policy_receiver: np.ndarray
    softmax_sender: np.ndarray
    softmax_receiver: np.ndarray
    converged: bool
    periods_elapsed: int
    final_temperature: float
    seed: int
    final_temperature_receiver: float = field(default=float("nan"))


def policy_deviation(new: np.ndarray, old: np.ndarray) -> float:
    """Relative change ``||new - old|| / ||old||`` in the entrywise 2-norm."""
    new = np.asarray(new, dtype=float)
    old = np.asarray(old, dtype=float)
    if new.shape != old.shape:
        raise ValueError(f"shape mismatch: {new.shape} vs {old.shape}")
    return float(np.sqrt(np.sum((new - old) ** 2)) / np.sqrt(np.sum(old**2)))


@numba.njit(cache=True)
def _nb_rel_dev(new, old):
    num = 0.0
    den = 0.0
    for i in range(new.shape[0]):
        for j in range(new.shape[1]):
            d = new[i, j] - old[i, j]
            num += d * d
            den += old[i, j] * old[i, j]
    return math.sqrt(num) / math.sqrt(den)


@numba.njit(cache=True)
def _nb_run(prior, u_s, u_r, qs, qr, alpha_s, lam_s, tau1_s, alpha_r, lam_r, tau1_r,
            max_periods, window, rel_tol, stride, rng):
    n_types, n_messages = qs.shape
    n_actions = qr.shape[1]
    pol_s = np.empty_like(qs)
    pol_r = np.empty_like(qr)
    new_s = np.empty_like(qs)
    new_r = np.empty_like(qr)
    row_s = np.empty(n_messages)
    row_r = np.empty(n_actions)

    tau_s = tau1_s
    tau_r = tau1_r
    _nb_softmax_matrix(qs, tau_s, pol_s)
    _nb_softmax_matrix(qr, tau_r, pol_r)
    fresh = True  # pol_* match the current Q-tables and temperatures

    streak = 0
    converged = False
    t = 0
    while t < max_periods:
        t += 1
        theta = _nb_sample(prior, rng.random())
        if fresh:
            m = _nb_sample(pol_s[theta], rng.random())
            a = _nb_sample(pol_r[m], rng.random())
        else:
            _nb_softmax_row(qs[theta], tau_s, row_s)
            m = _nb_sample(row_s, rng.random())
            _nb_softmax_row(qr[m], tau_r, row_r)
            a = _nb_sample(row_r, rng.random())
        qs[theta, m] += alpha_s * (u_s[theta, a] - qs[theta, m])
        qr[m, a] += alpha_r * (u_r[theta, a] - qr[m, a])
        tau_s = tau1_s * math.exp(-lam_s * t)
        tau_r = tau1_r * math.exp(-lam_r * t)
        fresh = False

        if t % stride == 0:
            _nb_softmax_matrix(qs, tau_s, new_s)
            _nb_softmax_matrix(qr, tau_r, new_r)
            if _nb_rel_dev(new_s, pol_s) < rel_tol and _nb_rel_dev(new_r, pol_r) < rel_tol:
                streak += 1
            else:
                streak = 0
            pol_s, new_s = new_s, pol_s
            pol_r, new_r = new_r, pol_r
            fresh = True
            if streak >= window:
                converged = True
                break
    return converged, t, tau_s, tau_r


def _prior_for_sampling(spec: GameSpec) -> np.ndarray:
    return np.ascontiguousarray(spec.prior, dtype=float)


def run_simulation(
    spec: GameSpec,
    sender: LearnerConfig,
    receiver: LearnerConfig,
    sim: SimConfig,
    q_sender: np.ndarray | None = None,
    q_receiver: np.ndarray | None = None,
) -> SimResult:
    """Play until both policies settle or ``max_periods`` is reached.

    Q-tables are drawn uniformly within each learner's init bounds unless
    given explicitly (copies are made; the inputs are not modified).
    """
    rng = np.random.default_rng(sim.seed)
    if q_sender is None:
        q_sender = init_q_table(spec.n_types, spec.n_messages, sender.init_low, sender.init_high, rng)
    if q_receiver is None:
        q_receiver = init_q_table(spec.n_messages, spec.n_actions, receiver.init_low, receiver.init_high, rng)
    qs = np.array(q_sender, dtype=float, order="C")
    qr = np.array(q_receiver, dtype=float, order="C")
    if qs.shape != (spec.n_types, spec.n_messages):
        raise ValueError(f"sender Q-table shape {qs.shape} does not match game {(spec.n_types, spec.n_messages)}")
    if qr.shape != (spec.n_messages, spec.n_actions):
        raise ValueError(f"receiver Q-table shape {qr.shape} does not match game {(spec.n_messages, spec.n_actions)}")

    converged, t, tau_s, tau_r = _nb_run(
        _prior_for_sampling(spec),
        np.ascontiguousarray(spec.sender_utility),
        np.ascontiguousarray(spec.receiver_utility),
        qs, qr,
        float(sender.alpha), float(sender.lam), float(sender.tau1),
        float(receiver.alpha), float(receiver.lam), float(receiver.tau1),
        int(sim.max_periods), int(sim.window), float(sim.rel_tol), int(sim.check_stride),
        rng,
    )
    return SimResult(
        q_sender=qs,
        q_receiver=qr,
        policy_sender=greedy_policy(qs),
        policy_receiver=greedy_policy(qr),
        softmax_sender=softmax_policy(qs, tau_s),
        softmax_receiver=softmax_policy(qr, tau_r),
        converged=bool(converged),
        periods_elapsed=int(t),
        final_temperature=float(tau_s),
        seed=int(sim.seed),
        final_temperature_receiver=float(tau_r),
    )


def default_learners(spec: GameSpec, alpha: float = 0.1, lam: float = 5e-6, tau1: float = 0.1):
    """Sender and receiver configs initialised on ``[babbling payoff, 0]``."""
    bab = babbling_benchmark(spec)
    sender = LearnerConfig(alpha, lam, tau1, min(bab.u_sender, 0.0), 0.0)
    receiver = LearnerConfig(alpha, lam, tau1, min(bab.u_receiver, 0.0), 0.0)
    return sender, receiver


def step(
    spec: GameSpec,
    q_sender: np.ndarray,
    q_receiver: np.ndarray,
    tau_sender: float,
    tau_receiver: float,
    alpha_sender: float,
    alpha_receiver: float,
    rng: np.random.Generator,
):
    """Play a single period, updating both Q-tables in place.

    Returns ``(theta, message, action, (sender_reward, receiver_reward))``.
    Draw order matches the batch loop in :func:`run_simulation`.
    """
    theta = int(_nb_sample(_prior_for_sampling(spec), rng.random()))
    ps = softmax_policy(q_sender[theta : theta + 1], tau_sender)[0]
    m = int(_nb_sample(ps, rng.random()))
    pr = softmax_policy(q_receiver[m : m + 1], tau_receiver)[0]
    a = int(_nb_sample(pr, rng.random()))
    rs = float(spec.sender_utility[theta, a])
    rr = float(spec.receiver_utility[theta, a])
    q_sender[theta, m] += alpha_sender * (rs - q_sender[theta, m])
    q_receiver[m, a] += alpha_receiver * (rr - q_receiver[m, a])
    return theta, m, a, (rs, rr)
