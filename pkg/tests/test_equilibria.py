import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cheaptalk import (
    Partition,
    block_optimal_actions,
    build_game,
    check_partition_equilibrium,
    enumerate_equilibria,
    enumerate_partitions,
    optimal_equilibrium,
)
from cheaptalk.equilibria import infeasible_partitions
from oracles import brute_force_outcomes

SPEC = build_game()


def sizes_at(b):
    return {eq.partition.sizes for eq in enumerate_equilibria(SPEC.with_bias(b))}


@given(st.integers(1, 10))
def test_partition_count(n):
    parts = enumerate_partitions(n)
    assert len(parts) == 2 ** (n - 1)
    assert len({p.cuts for p in parts}) == len(parts)
    assert [p.cuts for p in parts] == sorted(p.cuts for p in parts)
    for p in parts:
        assert sum(p.sizes) == n and min(p.sizes) >= 1


def test_partition_constructors():
    p = Partition.from_sizes((2, 4))
    assert p.cuts == (2,) and p == Partition.from_cuts(6, (2,))
    np.testing.assert_array_equal(p.labels(), [0, 0, 1, 1, 1, 1])
    assert len(p) == 2 and p.n_types == 6


def test_two_block_actions():
    acts = block_optimal_actions(Partition.from_sizes((3, 3)), SPEC)
    assert SPEC.actions[acts[0]].tolist() == [pytest.approx(0.2)]
    assert SPEC.actions[acts[1]].tolist() == [pytest.approx(0.8)]


def test_ic_oracle_two_blocks():
    # boundary type .4 gets .2 in its block and would get .8 across:
    # at b = .05 it prefers .2 (|.2 - .45| < |.8 - .45|); at b = .25 it prefers .8
    part = Partition.from_sizes((3, 3))
    assert check_partition_equilibrium(part, SPEC.with_bias(0.05)) is not None
    assert check_partition_equilibrium(part, SPEC.with_bias(0.25)) is None
    eq = check_partition_equilibrium(part, SPEC.with_bias(0.05))
    assert abs(eq.u_receiver + 2 / 75) <= 1e-12


@pytest.mark.parametrize("b", [0.0, 0.1, 0.2, 0.3, 0.4])
def test_matches_brute_force_n3(b):
    spec = build_game(3, bias=b)
    found = {}
    for eq in enumerate_equilibria(spec):
        outcome = tuple(int(eq.block_actions[k]) for k in eq.partition.labels())
        found[outcome] = (eq.u_sender, eq.u_receiver)
    oracle = brute_force_outcomes(3, 5, b)
    assert set(found) == set(oracle)
    for k in found:
        assert found[k] == pytest.approx(oracle[k], abs=1e-12)


@pytest.mark.parametrize("b", [0.0, 0.15, 0.3])
def test_matches_brute_force_n4(b):
    # the 4-type game has 4**4 sender maps; still small enough to scan
    spec = build_game(4, bias=b)
    found = {tuple(int(eq.block_actions[k]) for k in eq.partition.labels()) for eq in enumerate_equilibria(spec)}
    assert found == set(brute_force_outcomes(4, 7, b))


def test_structural_facts():
    assert (1,) * 6 in sizes_at(0.05)
    assert (1,) * 6 not in sizes_at(0.12)
    assert sizes_at(0.35) == {(6,)} and sizes_at(0.45) == {(6,)}


def test_counts_by_bias():
    counts = [len(enumerate_equilibria(SPEC.with_bias(b))) for b in np.arange(0, 0.51, 0.05)]
    assert counts[:8] == [27, 22, 11, 4, 3, 2, 2, 1]
    assert all(a >= b for a, b in zip(counts, counts[1:]))


@given(st.floats(0, 1))
def test_babbling_always_exists(b):
    assert (6,) in sizes_at(b)


def test_optimal_equilibrium():
    assert optimal_equilibrium(SPEC).partition.sizes == (1,) * 6
    opt = optimal_equilibrium(SPEC.with_bias(0.2))
    assert opt.partition.sizes == (2, 4)
    assert opt.u_receiver == pytest.approx(-0.0366666666666667)
    assert opt.mutual_info == pytest.approx(0.35524532127576397, abs=1e-12)
    assert optimal_equilibrium(SPEC.with_bias(0.25)).partition.sizes == (1, 5)
    assert optimal_equilibrium(SPEC.with_bias(0.45)).partition.sizes == (6,)


def test_sorted_by_informativeness():
    mi = [eq.mutual_info for eq in enumerate_equilibria(SPEC.with_bias(0.05))]
    assert mi == sorted(mi, reverse=True)


def test_message_shortage():
    spec = build_game(4, n_messages=2)
    assert all(len(eq.partition) <= 2 for eq in enumerate_equilibria(spec))
    assert len(infeasible_partitions(spec)) == 4  # three 3-block partitions and one 4-block
    assert check_partition_equilibrium(Partition.from_sizes((1, 1, 1, 1)), spec) is None
