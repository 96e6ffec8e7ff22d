"""Empirical quantization dimension from Lloyd codebooks.

Builds the cylinder geometry, discretizes the measure on a fine antichain,
runs Lloyd for n = 4 ... 2^k codes and regresses -log e_n against log n.
On the homogeneous 2-map fixture the slope lands on log2/log3 quickly.  On
Example 2 the fit sits well above 1/3 at reachable n: the error carries a
(log n)^4 factor, so the local slopes drift down slowly.

Run:  python3 demos/quantization_slope.py [max_power]
"""
import math
import sys

import numpy as np

from gdquant import classify, dimension_fit, realize
from gdquant.fixtures import example2_system, homogeneous_system

top = int(sys.argv[1]) if len(sys.argv) > 1 else 10
schedule = [2 ** k for k in range(2, top + 1)]

for name, s in [("homogeneous", homogeneous_system()), ("example 2", example2_system())]:
    sr = classify(s).s_r
    geom = realize(s)
    fit = dimension_fit(s, geom, schedule, s_probe=sr, seed=42)
    print(f"{name}: s_r = {sr:.6f}, fitted slope {fit.slope:.4f} "
          f"+- {fit.ci_halfwidth:.4f}, relative gap {fit.agreement(sr):.3f}")
    local = np.diff(np.log(fit.ns)) / np.diff(-np.log(fit.errors))
    print("  local slopes:", np.round(local, 3))
    if name == "example 2":
        # the scaled error n^3 e_n against (log n)^4
        c = fit.ns ** 3 * fit.errors
        print("  n^3 e_n / (log n)^4:", np.round(c / np.log(fit.ns) ** 4, 3))

print("log2/log3 =", math.log(2) / math.log(3))
