"""Independent reinforcement learners playing a discretized cheap-talk game."""

from .analysis import (
    Metrics,
    canonicalize_messages,
    expected_payoffs,
    modal_policy,
    nash_deviation_metrics,
    normalized_mutual_information,
    receiver_best_responses,
    sender_best_responses,
)
from .equilibria import (
    Partition,
    PartitionalEquilibrium,
    block_optimal_actions,
    check_partition_equilibrium,
    enumerate_equilibria,
    enumerate_partitions,
    optimal_equilibrium,
)
from .game import GameSpec, LossKind, PriorKind, Role, babbling_benchmark, build_game, utility
from .learner import LearnerConfig, init_q_table, q_update, sample, softmax_policy, softmax_row, temperature
from .simulation import SimConfig, SimResult, default_learners, policy_deviation, run_simulation, step
from .sweep import AggregateRecord, SweepConfig, aggregate, derive_seed, run_sweep

__version__ = "0.1.0"
