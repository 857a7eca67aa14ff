"""One learning run in the baseline game, start to finish.

Builds the 6-type game at a chosen bias, lets the two Q-learners play
until their policies settle, and reports where they ended up relative to
the equilibria the game admits.

    python demos/single_run.py 0.1
"""

import sys

import numpy as np

from cheaptalk import (
    SimConfig,
    build_game,
    canonicalize_messages,
    default_learners,
    enumerate_equilibria,
    nash_deviation_metrics,
    run_simulation,
)

bias = float(sys.argv[1]) if len(sys.argv) > 1 else 0.1
spec = build_game(bias=bias)
sender, receiver = default_learners(spec)

res = run_simulation(spec, sender, receiver, SimConfig(seed=7))
print(f"bias {bias}: converged={res.converged} after {res.periods_elapsed:,} periods "
      f"(final temperature {res.final_temperature:.2e})")

m = nash_deviation_metrics(res.policy_sender, res.policy_receiver, spec)
print(f"U_S={m.u_sender:.4f}  U_R={m.u_receiver:.4f}  MI={m.mutual_info:.3f}  eps-Nash={m.is_eps_nash}")

# relabel messages so message 0 is sent by the lowest types
pi_s, pi_r, _ = canonicalize_messages(res.policy_sender, res.policy_receiver, spec)
np.set_printoptions(precision=2, suppress=True)
print("sender policy (type x message):")
print(pi_s)
print("receiver action after each used message:",
      [float(spec.actions[np.argmax(pi_r[k])]) for k in range(6) if pi_s[:, k].any()])

print("\nequilibria of this game (block sizes, U_R, MI):")
for eq in enumerate_equilibria(spec):
    print(f"  {eq.partition.sizes!s:20} {eq.u_receiver:8.4f} {eq.mutual_info:6.3f}")
