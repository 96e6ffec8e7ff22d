"""Two comparable components with the same dimension.

Walks through the 4-vertex system where the component {1,2} feeds into
the component {3,4}.  Both components have s_r = 1/3 at r = 1, and since
one reaches the other the lower quantization coefficient is infinite.
The normalized antichain sums Q_k make that visible: they grow without
bound, roughly linearly in k.

Run:  python3 demos/example2_comparable_components.py
"""
import numpy as np

from gdquant import build_lambda, classify, scc_decompose, comparability, growth_series
from gdquant.fixtures import example2_system, example2_prose_system
from gdquant.measure import diagnostics

np.set_printoptions(precision=4, suppress=True)

s = example2_system()
print("transition matrix P")
print(s.transition)
print("contraction ratios C")
print(s.ratios)

# strongly connected components, 1-based for display
dec = scc_decompose(s)
print("components:", [[v + 1 for v in c] for c in dec.components])

# the dimension root and the per-component roots
rep = classify(s, dec)
print("s_r =", rep.s_r)
for comp, sr in zip(dec.components, rep.per_component):
    print("  s_r on", [v + 1 for v in comp], "=", sr)

# class M holds both components; a path links them
verdict = comparability(dec, rep.class_m)
print("comparability:", verdict.to_json(dec)["pairs"])
print("classification:", rep.classification.value)

# Lambda_j: words whose weight p*c^r just crosses eta^j
for j in (1, 2, 3):
    chain = build_lambda(s, j)
    d = diagnostics(s, chain, rep.s_r)
    print(f"Lambda_{j}: {d.cardinality} words, lengths {d.min_len}..{d.max_len}, "
          f"normalized sum {d.normalized_sum:.4f}")

# Q_k keeps climbing; compare with the prose reading, where H1 is smaller
g = growth_series(s, rep, range(2, 11))
print("Q_k, k=2..10:", np.round(g.values, 6), "->", g.verdict)

p = example2_prose_system()
rp = classify(p)
gp = growth_series(p, rp, range(2, 11))
print("prose reading:", rp.classification.value)
print("  Q_k:", np.round(gp.values, 4), "->", gp.verdict)
print("  increments:", np.round(np.diff(gp.values), 4))
