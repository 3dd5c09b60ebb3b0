"""Cross-correlation of coupled and independent series across q and scale.

Run: python demos/cross_correlation.py
"""
import numpy as np

from mfcca import (FgnSpec, ScalingRange, d_xy, fluctuation_cross, fluctuation_single, generalized_hurst,
                   generate_fgn, lambda_exponent, q_grid, rho_curves)

n = 2**16
qs = q_grid(-4, 4, 0.5)
x = generate_fgn(FgnSpec(0.6, n, seed=1)).returns
rng = np.random.default_rng(2)
coupled = 0.5 * x + rng.standard_normal(n)
independent = generate_fgn(FgnSpec(0.6, n, seed=3)).returns

for name, y in (("coupled", coupled), ("independent", independent)):
    gx = generalized_hurst(fluctuation_single(x, qs))
    gy = generalized_hurst(fluctuation_single(y, qs))
    rng_ = ScalingRange(max(gx.range.s_min, gy.range.s_min), min(gx.range.s_max, gy.range.s_max))
    cs = d_xy(gx, gy, lambda_exponent(fluctuation_cross((x, y), qs), rng_))
    print(f"\n{name}: lambda(q) valid for {cs.valid_q.sum()} of {qs.size} q values")
    for q in (1.0, 2.0, 4.0):
        i = int(np.flatnonzero(qs == q)[0])
        lam = f"{cs.lambda_[i]:.3f}" if cs.valid_q[i] else "  n/a"
        d = f"{cs.d_xy[i]:+.3f}" if cs.valid_q[i] else "  n/a"
        print(f"  q={q:.0f}  lambda {lam}  h_xy {cs.h_xy[i]:.3f}  d_xy {d}")
    for c in rho_curves((x, y), [1.0, 4.0]):
        pick = np.searchsorted(c.scales, [16, 160, 1600])
        vals = "  ".join(f"s={c.scales[k]}: {c.rho[k]:+.3f}" for k in pick if k < c.scales.size)
        print(f"  rho_{c.q:g}  {vals}")
