"""Monotone partitional equilibria of a discretized game.

A partition splits the ordered types into contiguous blocks. The sender
sends message ``k`` in block ``k``; the receiver answers each message with
an action that is optimal for the block's posterior. The pair is an
equilibrium when no type prefers another block's action.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .analysis import expected_payoffs, normalized_mutual_information
from .game import TIE_TOL, GameSpec, argmax_set


@dataclass(frozen=True)
class Partition:
    """Contiguous blocks as half-open ``(start, stop)`` type-index ranges."""

    blocks: tuple[tuple[int, int], ...]

    @property
    def n_types(self) -> int:
        return self.blocks[-1][1]

    @property
    def cuts(self) -> tuple[int, ...]:
        """Indices at which a new block starts (excluding 0)."""
        return tuple(start for start, _ in self.blocks[1:])

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(stop - start for start, stop in self.blocks)

    def labels(self) -> np.ndarray:
        """Block index of every type."""
        return np.repeat(np.arange(len(self.blocks)), self.sizes)

    @classmethod
    def from_cuts(cls, n: int, cuts) -> "Partition":
        edges = [0, *sorted(cuts), n]
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise ValueError(f"invalid cuts {cuts!r} for n={n}")
        return cls(tuple(zip(edges[:-1], edges[1:])))

    @classmethod
    def from_sizes(cls, sizes) -> "Partition":
        return cls.from_cuts(sum(sizes), itertools.accumulate(sizes[:-1]))

    def __len__(self) -> int:
        return len(self.blocks)


@dataclass(frozen=True)
class PartitionalEquilibrium:
    partition: Partition
    block_actions: tuple[int, ...]
    u_sender: float
    u_receiver: float
    mutual_info: float

    @property
    def n_blocks(self) -> int:
        return len(self.partition)

    def policies(self, spec: GameSpec) -> tuple[np.ndarray, np.ndarray]:
        return partition_policies(self.partition, self.block_actions, spec)


def enumerate_partitions(n: int) -> list[Partition]:
    """All ``2**(n-1)`` contiguous partitions, sorted by their cut tuples."""
    if n < 1:
        raise ValueError("n must be positive")
    cut_sets = [c for k in range(n) for c in itertools.combinations(range(1, n), k)]
    return [Partition.from_cuts(n, c) for c in sorted(cut_sets)]


def partition_policies(partition: Partition, block_actions, spec: GameSpec):
    """Sender and receiver policy matrices for a partition and its actions.

    Block ``k`` sends message ``k``. Unused messages are answered with the
    first block's action.
    """
    k = len(partition)
    if k > spec.n_messages:
        raise ValueError(f"{k} blocks but only {spec.n_messages} messages")
    pi_s = np.zeros((spec.n_types, spec.n_messages))
    pi_s[np.arange(spec.n_types), partition.labels()] = 1.0
    pi_r = np.zeros((spec.n_messages, spec.n_actions))
    for m in range(spec.n_messages):
        pi_r[m, block_actions[m] if m < k else block_actions[0]] = 1.0
    return pi_s, pi_r


def block_optimal_actions(partition: Partition, spec: GameSpec) -> list[np.ndarray]:
    """Receiver-optimal action indices for each block's posterior."""
    out = []
    for start, stop in partition.blocks:
        p = spec.prior[start:stop]
        values = (p / p.sum()) @ spec.receiver_utility[start:stop]
        out.append(argmax_set(values, TIE_TOL))
    return out


def _sender_ic(partition: Partition, actions, spec: GameSpec) -> bool:
    u = spec.sender_utility[:, list(actions)]  # n_types x n_blocks
    own = u[np.arange(spec.n_types), partition.labels()]
    return bool(np.all(own >= u.max(axis=1) - TIE_TOL))


def check_partition_equilibrium(partition: Partition, spec: GameSpec) -> PartitionalEquilibrium | None:
    """Equilibrium supported by ``partition``, or ``None``.

    Every combination of receiver-optimal block actions is tried in
    lexicographic order (smaller actions first); the first one under which
    each type weakly prefers its own block's action is returned.
    """
    if partition.n_types != spec.n_types:
        raise ValueError("partition does not cover the game's types")
    if len(partition) > spec.n_messages:
        return None
    for actions in itertools.product(*block_optimal_actions(partition, spec)):
        if _sender_ic(partition, actions, spec):
            actions = tuple(int(a) for a in actions)
            pi_s, pi_r = partition_policies(partition, actions, spec)
            u_s, u_r = expected_payoffs(pi_s, pi_r, spec)
            return PartitionalEquilibrium(
                partition, actions, u_s, u_r, normalized_mutual_information(pi_s, spec)
            )
    return None


def infeasible_partitions(spec: GameSpec) -> list[Partition]:
    """Partitions needing more messages than the game offers."""
    return [p for p in enumerate_partitions(spec.n_types) if len(p) > spec.n_messages]


def enumerate_equilibria(spec: GameSpec) -> list[PartitionalEquilibrium]:
    """All monotone partitional equilibria, most informative first."""
    found = [
        eq
        for p in enumerate_partitions(spec.n_types)
        if (eq := check_partition_equilibrium(p, spec)) is not None
    ]
    # stable sort keeps partition order among equal informativeness
    return sorted(found, key=lambda e: -np.nan_to_num(e.mutual_info))


def optimal_equilibrium(spec: GameSpec, equilibria=None) -> PartitionalEquilibrium:
    """Receiver-preferred equilibrium; ties go to higher informativeness,
    then to the earlier partition."""
    if equilibria is None:
        equilibria = enumerate_equilibria(spec)
    best = None
    for eq in sorted(equilibria, key=lambda e: e.partition.cuts):
        if best is None or eq.u_receiver > best.u_receiver + TIE_TOL:
            best = eq
        elif abs(eq.u_receiver - best.u_receiver) <= TIE_TOL and eq.mutual_info > best.mutual_info + TIE_TOL:
            best = eq
    return best
