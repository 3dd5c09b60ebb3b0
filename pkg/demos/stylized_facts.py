"""Heavy tails and volatility clustering on synthetic fixtures.

Run: python demos/stylized_facts.py
"""
from mfcca import (aggregate, cumulative_tail, fit_decay_exponent, fit_tail_exponent, generate_pareto_tail,
                   generate_volatility_clusters, normalize_unit_variance, volatility_autocorrelation)

r = generate_pareto_tail(3.0, 10**6, seed=0)
for k in (1, 10, 60, 360):
    series = r if k == 1 else aggregate(r, k)
    fit = fit_tail_exponent(cumulative_tail(normalize_unit_variance(series)))
    print(f"aggregation x{k:<4d} N={len(series):>7d}  gamma OLS {fit.gamma:.2f}  Hill {fit.hill:.2f}  R2 {fit.r_squared:.3f}")

v = generate_volatility_clusters(0.2, 2**20, seed=0)
ac = volatility_autocorrelation(v, 1000)
gamma, se = fit_decay_exponent(ac)
print(f"\n|r| autocorrelation: C(1)={ac.c[0]:.3f}  C(10)={ac.c[9]:.3f}  C(1000)={ac.c[-1]:.3f}")
print(f"decay exponent {gamma:.3f} +/- {se:.3f} (target 0.2)")
