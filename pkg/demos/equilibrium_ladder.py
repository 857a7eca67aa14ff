"""How the set of equilibria shrinks as the bias grows.

For each bias on a coarse grid, list how many monotone partitional
equilibria exist, the finest partition, and the receiver-optimal one.
No simulation involved; runs in a second or two.
"""

import numpy as np

from cheaptalk import babbling_benchmark, build_game, enumerate_equilibria, optimal_equilibrium

base = build_game()
print(f"{'bias':>5} {'#eq':>4}  {'finest':18} {'optimal':18} {'U_R*':>8} {'MI*':>6} {'babble':>8}")
for b in np.round(np.arange(0, 0.51, 0.05), 2):
    spec = base.with_bias(float(b))
    eqs = enumerate_equilibria(spec)
    opt = optimal_equilibrium(spec, eqs)
    finest = max(eqs, key=lambda e: e.n_blocks)
    print(f"{b:5.2f} {len(eqs):4d}  {finest.partition.sizes!s:18} {opt.partition.sizes!s:18} "
          f"{opt.u_receiver:8.4f} {opt.mutual_info:6.3f} {babbling_benchmark(spec).u_receiver:8.4f}")
