"""Two incomparable components with a shared dimension.

Example 1 is block diagonal: a positive 2x2 block and a positive 3x3 block
with no path between them.  The fixture tunes the second block's ratios
so both blocks have the same root.  With no comparable pair in class M
both quantization coefficients are finite and positive, and Q_k stays
inside the band given by the Perron-vector bounds of each block.

Run:  python3 demos/example1_block_diagonal.py [seed]
"""
import sys

import numpy as np

from gdquant import classify, growth_series, scc_decompose
from gdquant.fixtures import example1_system
from gdquant.measure import f_decay_check

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
s = example1_system(seed)
dec = scc_decompose(s)
rep = classify(s, dec)

print("components:", [[v + 1 for v in c] for c in dec.components])
print("per-component s_r:", rep.per_component)
print("gap between blocks:", abs(rep.per_component[0] - rep.per_component[1]))
print("classification:", rep.classification.value)

lo = sum(d[0] for d in rep.component_deltas.values())
hi = sum(d[1] for d in rep.component_deltas.values())
print(f"bound band for Q_k: [{lo:.4f}, {hi:.4f}]")

# about 1.2e7 words at k = 10; only their weights are kept
g = growth_series(s, rep, range(2, 11))
for k, q in zip(g.ks, g.values):
    print(f"  k={k:2d}  Q_k={q:.6f}")
print("mid mean", round(g.mid_mean, 6), "last mean", round(g.last_mean, 6), "->", g.verdict)

# shrink the second block; its vertices drop out of M and their mass decays
t = example1_system(seed, second_scale=0.5)
dt = scc_decompose(t)
rt = classify(t, dt)
dr = f_decay_check(t, dt, rt, range(1, 12))
print("second block shrunk: s_r =", round(rt.s_r, 6), "class M =",
      [k + 1 for k in rt.class_m])
print("F-word sums:", np.round(dr.sums, 5))
print("geometric rate", round(dr.rate, 4), "passed", dr.passed)
