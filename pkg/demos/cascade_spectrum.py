"""Multifractal spectrum of a binomial cascade next to a monofractal noise.

Run: python demos/cascade_spectrum.py
"""
import numpy as np

from mfcca import (CascadeSpec, FgnSpec, cascade_hurst_analytic, fluctuation_single, generalized_hurst,
                   generate_binomial_cascade, generate_fgn, legendre_transform, mirror_wings, q_grid)

qs = q_grid(-4, 4, 0.2)
cascade = generate_binomial_cascade(CascadeSpec(0.3, 16)).returns
noise = generate_fgn(FgnSpec(0.5, 2**16, seed=0)).returns

gh = generalized_hurst(fluctuation_single(cascade, qs))
print(f"scaling range s in [{gh.range.s_min}, {gh.range.s_max}]")
print("   q   h(q)    closed form")
for q in (-4.0, -2.0, -1.0, 1.0, 2.0, 4.0):
    print(f"{q:4.0f}  {gh.at(q):.4f}  {cascade_hurst_analytic(0.3, q):.4f}")

for name, series in (("cascade", cascade), ("fGn H=0.5", noise)):
    sp = legendre_transform(generalized_hurst(fluctuation_single(series, qs)))
    print(f"{name:10s} width {sp.width:.3f}  alpha_0 {sp.alpha_0:.3f}  A_alpha {sp.asymmetry:+.3f}")

# exchanging the wings flips the asymmetry
flipped = legendre_transform(mirror_wings(gh))
print(f"wing exchange: A_alpha {legendre_transform(gh).asymmetry:+.4f} -> {flipped.asymmetry:+.4f}")
print("h(q) decreasing:", bool(np.all(np.diff(gh.h) <= 1e-9)))
