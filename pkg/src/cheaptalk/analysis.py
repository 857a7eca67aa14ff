"""Metrics on a (sender, receiver) policy pair.

Sender policies are ``n_types x n_messages``; receiver policies are
``n_messages x n_actions``. All functions are pure.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass

import numpy as np

from .game import TIE_TOL, GameSpec, argmax_set

#: Mass threshold for the epsilon-Nash classification.
EPS_NASH = 0.01
#: A message whose ex-ante probability does not exceed this is off-path.
ON_PATH_TOL = 1e-6


@dataclass(frozen=True)
class Metrics:
    u_sender: float
    u_receiver: float
    mutual_info: float
    max_subopt_sender: float
    max_subopt_receiver: float
    gain_sender: float
    gain_receiver: float
    is_eps_nash: bool

    def as_dict(self) -> dict:
        return asdict(self)


def _check_shapes(spec: GameSpec, pi_s=None, pi_r=None):
    if pi_s is not None and np.shape(pi_s) != (spec.n_types, spec.n_messages):
        raise ValueError(f"sender policy shape {np.shape(pi_s)} != {(spec.n_types, spec.n_messages)}")
    if pi_r is not None and np.shape(pi_r) != (spec.n_messages, spec.n_actions):
        raise ValueError(f"receiver policy shape {np.shape(pi_r)} != {(spec.n_messages, spec.n_actions)}")


def outcome_distribution(pi_s, pi_r) -> np.ndarray:
    """``P(action | type)`` induced by the two policies."""
    return np.asarray(pi_s) @ np.asarray(pi_r)


def expected_payoffs(pi_s, pi_r, spec: GameSpec) -> tuple[float, float]:
    """Ex-ante expected rewards ``(U_S, U_R)``."""
    _check_shapes(spec, pi_s, pi_r)
    joint = spec.prior[:, None] * outcome_distribution(pi_s, pi_r)
    return float(np.sum(joint * spec.sender_utility)), float(np.sum(joint * spec.receiver_utility))


def prior_entropy(spec: GameSpec) -> float:
    p = spec.prior[spec.prior > 0]
    return float(-np.sum(p * np.log(p)))


def normalized_mutual_information(pi_s, spec: GameSpec) -> float:
    """Mutual information between type and message over the prior entropy.

    Returns ``nan`` when the prior has zero entropy.
    """
    _check_shapes(spec, pi_s)
    h = prior_entropy(spec)
    if h <= 0:
        return float("nan")
    pi_s = np.asarray(pi_s, dtype=float)
    joint = spec.prior[:, None] * pi_s
    marginal = joint.sum(axis=0)
    mask = pi_s > 0
    ratio = np.ones_like(pi_s)
    ratio[mask] = pi_s[mask] / np.broadcast_to(marginal, pi_s.shape)[mask]
    return float(np.sum(joint[mask] * np.log(ratio[mask])) / h)


def message_marginal(pi_s, spec: GameSpec) -> np.ndarray:
    return spec.prior @ np.asarray(pi_s, dtype=float)


def posterior(pi_s, spec: GameSpec) -> np.ndarray:
    """``q(type | message)`` as an ``n_messages x n_types`` array.

    Rows of messages sent with zero probability are filled with ``nan``.
    """
    joint = (spec.prior[:, None] * np.asarray(pi_s, dtype=float)).T
    total = joint.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(total > 0, joint / total, np.nan)


@dataclass(frozen=True)
class ReceiverBestResponse:
    optimal: list[np.ndarray]  # per message, ascending action indices
    on_path: np.ndarray  # bool per message
    posterior: np.ndarray
    values: np.ndarray  # expected receiver utility per (message, action); nan off-path


def receiver_best_responses(pi_s, spec: GameSpec, on_path_tol: float = ON_PATH_TOL) -> ReceiverBestResponse:
    """Optimal receiver actions after each message.

    Messages with ex-ante probability at most ``on_path_tol`` are treated as
    off-path and every action is considered optimal after them.
    """
    _check_shapes(spec, pi_s)
    on_path = message_marginal(pi_s, spec) > on_path_tol
    post = posterior(pi_s, spec)
    values = np.full((spec.n_messages, spec.n_actions), np.nan)
    optimal = []
    for m in range(spec.n_messages):
        if on_path[m]:
            values[m] = post[m] @ spec.receiver_utility
            optimal.append(argmax_set(values[m], TIE_TOL))
        else:
            optimal.append(np.arange(spec.n_actions))
    return ReceiverBestResponse(optimal, on_path, post, values)


def sender_message_values(pi_r, spec: GameSpec) -> np.ndarray:
    """Expected sender utility of each message at each type."""
    return spec.sender_utility @ np.asarray(pi_r, dtype=float).T


def sender_best_responses(pi_r, spec: GameSpec) -> list[np.ndarray]:
    """Optimal messages for each type, ties kept."""
    _check_shapes(spec, pi_r=pi_r)
    values = sender_message_values(pi_r, spec)
    return [argmax_set(row, TIE_TOL) for row in values]


def nash_deviation_metrics(pi_s, pi_r, spec: GameSpec, on_path_tol: float = ON_PATH_TOL) -> Metrics:
    """Payoffs, informativeness and distance from mutual best response.

    ``max_subopt_*`` is the largest mass any state puts outside its best
    response set (receiver states: on-path messages only). ``gain_*`` is the
    ex-ante improvement from best responding state by state.
    """
    _check_shapes(spec, pi_s, pi_r)
    pi_s = np.asarray(pi_s, dtype=float)
    pi_r = np.asarray(pi_r, dtype=float)
    u_s, u_r = expected_payoffs(pi_s, pi_r, spec)

    s_values = sender_message_values(pi_r, spec)
    s_opt = [argmax_set(row, TIE_TOL) for row in s_values]
    sub_s = max(1.0 - pi_s[i, opt].sum() for i, opt in enumerate(s_opt))
    s_current = np.sum(pi_s * s_values, axis=1)
    gain_s = float(spec.prior @ (s_values.max(axis=1) - s_current))

    br = receiver_best_responses(pi_s, spec, on_path_tol)
    sub_r = max(
        (1.0 - pi_r[m, br.optimal[m]].sum() for m in range(spec.n_messages) if br.on_path[m]),
        default=0.0,
    )
    # weighted[m, a] = sum_theta p(theta) pi_s(m | theta) u_R(theta, a)
    weighted = (spec.prior[:, None] * pi_s).T @ spec.receiver_utility
    gain_r = float(np.sum(weighted.max(axis=1) - np.sum(pi_r * weighted, axis=1)))

    sub_s = max(0.0, float(sub_s))
    sub_r = max(0.0, float(sub_r))
    return Metrics(
        u_sender=u_s,
        u_receiver=u_r,
        mutual_info=normalized_mutual_information(pi_s, spec),
        max_subopt_sender=sub_s,
        max_subopt_receiver=sub_r,
        gain_sender=float(gain_s),
        gain_receiver=float(gain_r),
        is_eps_nash=bool(sub_s <= EPS_NASH and sub_r <= EPS_NASH),
    )


def canonicalize_messages(pi_s, pi_r, spec: GameSpec, on_path_tol: float = 0.0):
    """Relabel messages so that smaller labels go with smaller types.

    On-path messages are ordered by the posterior mean type; off-path ones
    follow in their original order. Returns ``(pi_s, pi_r, perm)`` where
    new message ``k`` is old message ``perm[k]``.
    """
    _check_shapes(spec, pi_s, pi_r)
    pi_s = np.asarray(pi_s, dtype=float)
    pi_r = np.asarray(pi_r, dtype=float)
    marginal = message_marginal(pi_s, spec)
    on = marginal > on_path_tol
    post = posterior(pi_s, spec)
    means = np.where(on, np.nan_to_num(post) @ spec.types, 0.0)
    idx = np.arange(spec.n_messages)
    # primary key: off-path last; then posterior mean; then original label
    perm = np.lexsort((idx, means, ~on))
    return pi_s[:, perm], pi_r[perm], perm


def _row_key(row: np.ndarray) -> tuple:
    return tuple(np.round(row, 9))


def modal_policy(policies) -> tuple[np.ndarray, np.ndarray]:
    """Most frequent row, state by state, over a list of policies.

    Rows are compared exactly (after rounding to 9 decimals), so for
    deterministic policies this is the most frequent action. Ties go to the
    row whose first supported index is smaller. Returns the modal policy and
    the per-state frequency of its row.
    """
    policies = [np.asarray(p, dtype=float) for p in policies]
    if not policies:
        raise ValueError("modal_policy needs at least one policy")
    shape = policies[0].shape
    if any(p.shape != shape for p in policies):
        raise ValueError("all policies must share one shape")
    mode = np.zeros(shape)
    freq = np.zeros(shape[0])
    for s in range(shape[0]):
        counts = Counter(_row_key(p[s]) for p in policies)
        top = max(counts.values())
        winners = [k for k, c in counts.items() if c == top]
        best = min(winners, key=lambda k: (int(np.flatnonzero(np.asarray(k) > 0)[0]), k))
        mode[s] = best
        freq[s] = top / len(policies)
    return mode, freq
