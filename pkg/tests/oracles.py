"""Slow, literal reference implementations used to check the optimized code."""

import numpy as np


def naive_box_residuals(profile, s, m):
    T = len(profile)
    M = T // s
    starts = [v * s for v in range(M)] + [T - (v + 1) * s for v in range(M)]
    i = np.arange(1, s + 1, dtype=float)
    out = []
    for st in starts:
        seg = np.asarray(profile[st : st + s], dtype=float)
        coef = np.polyfit(i, seg, m)
        out.append(seg - np.polyval(coef, i))
    return out


def naive_fluctuation(x, y, q, s, m=2):
    """F_XY(q, s) straight from the definitions; y=x gives the single-series F."""
    X = naive_box_residuals(np.cumsum(x), s, m)
    Y = naive_box_residuals(np.cumsum(y), s, m)
    f2 = [float(np.mean(a * b)) for a, b in zip(X, Y)]
    n = len(f2)
    if q == 0:
        total = 0.0
        for v in f2:
            total += np.log(v)
        return float(np.exp(total / (2 * n)))
    total = 0.0
    for v in f2:
        total += np.sign(v) * abs(v) ** (q / 2)
    mom = total / n
    return float(np.sign(mom) * abs(mom) ** (1 / q))


def naive_rho(x, y, q, s, m=2):
    def moment(a, b):
        A = naive_box_residuals(np.cumsum(a), s, m)
        B = naive_box_residuals(np.cumsum(b), s, m)
        f2 = [float(np.mean(u * v)) for u, v in zip(A, B)]
        return float(np.mean([np.sign(v) * abs(v) ** (q / 2) for v in f2]))

    return moment(x, y) / np.sqrt(moment(x, x) * moment(y, y))
