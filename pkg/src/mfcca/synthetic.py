"""Seeded generators with known scaling properties, used as ground truth in tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericalError
from .series import NS_PER_SECOND, ReturnSeries

DEFAULT_DELTA_T = 10 * NS_PER_SECOND


@dataclass(frozen=True)
class FgnSpec:
    hurst_H: float
    length: int
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.hurst_H < 1:
            raise DataError("Hurst exponent must lie in (0, 1)")
        n = int(self.length)
        if n < 2 or n & (n - 1):
            raise DataError("fGn length must be a power of two")


@dataclass(frozen=True)
class CascadeSpec:
    p: float
    num_levels: int
    seed: int | None = None
    variant: str = "none"  # "none", "sign" (random signs) or "shuffle" (random permutation)

    def __post_init__(self):
        if not 0 < self.p <= 0.5:
            raise DataError("cascade weight p must lie in (0, 0.5]")
        if self.num_levels < 1:
            raise DataError("cascade needs at least one level")
        if self.variant not in ("none", "sign", "shuffle"):
            raise DataError(f"unknown cascade variant {self.variant!r}")


def fgn_autocovariance(hurst_H: float, lags) -> np.ndarray:
    k = np.abs(np.asarray(lags, dtype=np.float64))
    h2 = 2.0 * hurst_H
    out = np.ones_like(k)
    pos = k > 0
    kp = k[pos]
    # k^2H [((1+1/k)^2H - 1) + ((1-1/k)^2H - 1)] / 2 avoids cancellation at large k
    with np.errstate(divide="ignore"):
        out[pos] = 0.5 * kp**h2 * (np.expm1(h2 * np.log1p(1.0 / kp)) + np.expm1(h2 * np.log1p(-1.0 / kp)))
    return out


def fgn_array(hurst_H: float, length: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-variance fGn by circulant embedding (Davies-Harte)."""
    n = int(length)
    gamma = fgn_autocovariance(hurst_H, np.arange(n + 1))
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eig = np.fft.fft(row).real
    if eig.min() < -1e-10 * eig.max():
        raise NumericalError(f"circulant embedding not non-negative for H={hurst_H}, N={n}")
    eig = np.clip(eig, 0.0, None)
    m = row.size
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return np.fft.fft(np.sqrt(eig / m) * z).real[:n]


def generate_fgn(spec: FgnSpec, delta_t: int = DEFAULT_DELTA_T, label: str | None = None) -> ReturnSeries:
    rng = np.random.default_rng(spec.seed)
    x = fgn_array(spec.hurst_H, spec.length, rng)
    return ReturnSeries(x, delta_t, label=label or f"fgn_H{spec.hurst_H:g}_s{spec.seed}",
                        meta={"generator": "fgn", "hurst_H": spec.hurst_H, "length": spec.length, "seed": spec.seed})


def cascade_masses(p: float, num_levels: int) -> np.ndarray:
    """Binomial measure on 2**k cells; the left half of every interval gets fraction p."""
    m = np.ones(1)
    w = np.array([p, 1.0 - p])
    for _ in range(num_levels):
        m = (m[:, None] * w[None, :]).ravel()
    return m


def generate_binomial_cascade(spec: CascadeSpec, delta_t: int = DEFAULT_DELTA_T,
                              label: str | None = None) -> ReturnSeries:
    m = cascade_masses(spec.p, spec.num_levels)
    if spec.variant != "none":
        rng = np.random.default_rng(spec.seed)
        if spec.variant == "sign":
            m = m * (2 * rng.integers(0, 2, m.size) - 1)
        else:
            m = rng.permutation(m)
    return ReturnSeries(m, delta_t, label=label or f"cascade_p{spec.p:g}_k{spec.num_levels}",
                        meta={"generator": "binomial_cascade", "p": spec.p, "num_levels": spec.num_levels,
                              "seed": spec.seed, "variant": spec.variant})


def cascade_hurst_analytic(p: float, q) -> np.ndarray | float:
    """Closed-form h(q) = (1 - log2(p^q + (1-p)^q)) / q of the binomial cascade.

    At q = 0 the continuous limit -(log2 p + log2(1-p)) / 2 is returned.
    """
    if not 0 < p < 1:
        raise DataError("p must lie in (0, 1)")
    qa = np.asarray(q, dtype=np.float64)
    limit = -(np.log2(p) + np.log2(1 - p)) / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        h = (1.0 - np.log2(p**qa + (1 - p) ** qa)) / qa
    h = np.where(qa == 0, limit, h)
    return float(h) if h.ndim == 0 else h


def cascade_spectrum_analytic(p: float, q) -> tuple[np.ndarray, np.ndarray]:
    """Exact (alpha, f(alpha)) of the binomial cascade at the given q values."""
    qa = np.asarray(q, dtype=np.float64)
    a, b = p**qa, (1 - p) ** qa
    tau = -np.log2(a + b)
    alpha = -(a * np.log2(p) + b * np.log2(1 - p)) / (a + b)
    return alpha, qa * alpha - tau


def generate_pareto_tail(gamma: float, length: int, seed: int = 0, delta_t: int = DEFAULT_DELTA_T,
                         label: str | None = None) -> ReturnSeries:
    """Symmetric i.i.d. values with P(|r| > x) = x^-gamma for x >= 1."""
    if not gamma > 1:
        raise DataError("tail exponent must exceed 1")
    rng = np.random.default_rng(seed)
    u = 1.0 - rng.random(int(length))  # (0, 1]
    sign = 2 * rng.integers(0, 2, int(length)) - 1
    return ReturnSeries(sign * u ** (-1.0 / gamma), delta_t, label=label or f"pareto_g{gamma:g}_s{seed}",
                        meta={"generator": "pareto", "gamma": gamma, "length": int(length), "seed": seed})


# Log-volatility is fractional Gaussian noise with Hurst exponent 1 - beta/2,
# so its autocorrelation decays as tau^-beta; |r| inherits the decay up to
# the exp() nonlinearity and the sample-mean bias of long-memory data, both
# of which depend on the series length.  VOL_CALIBRATION maps (length, beta)
# to the decay exponent actually fitted over lags [10, 1000]; it is produced
# by scripts/calibrate_volatility.py (copy in tests/data).
VOL_LOG_SIGMA = 0.5
VOL_CALIBRATION = np.array([
    # log2_length, beta, fitted_gamma (mean over seeds)
    [16, 0.02, 0.2606], [16, 0.05, 0.2757], [16, 0.1, 0.3108], [16, 0.15, 0.3432], [16, 0.2, 0.3849],
    [16, 0.3, 0.4671], [16, 0.4, 0.5217], [16, 0.5, 0.5187], [16, 0.6, 0.4405], [16, 0.7, 0.2809],
    [18, 0.02, 0.1903], [18, 0.05, 0.2103], [18, 0.1, 0.2427], [18, 0.15, 0.2758], [18, 0.2, 0.3105],
    [18, 0.3, 0.3872], [18, 0.4, 0.4916], [18, 0.5, 0.5778], [18, 0.6, 0.58], [18, 0.7, 0.4896],
    [20, 0.02, 0.1532], [20, 0.05, 0.1729], [20, 0.1, 0.2057], [20, 0.15, 0.2395], [20, 0.2, 0.2748],
    [20, 0.3, 0.3513], [20, 0.4, 0.4365], [20, 0.5, 0.5353], [20, 0.6, 0.6673], [20, 0.7, 0.6583],
    [22, 0.02, 0.1215], [22, 0.05, 0.1399], [22, 0.1, 0.1723], [22, 0.15, 0.2072], [22, 0.2, 0.2446],
    [22, 0.3, 0.3266], [22, 0.4, 0.416], [22, 0.5, 0.5114], [22, 0.6, 0.6214], [22, 0.7, 0.7057],
])


def volatility_returns(beta: float, length: int, rng: np.random.Generator, sigma: float = VOL_LOG_SIGMA) -> np.ndarray:
    n = int(length)
    n2 = 1 << max(int(np.ceil(np.log2(n))), 1)
    omega = sigma * fgn_array(1.0 - beta / 2.0, n2, rng)[:n]
    return np.exp(omega) * rng.standard_normal(n)


def calibrated_beta(decay_gamma: float, length: int) -> float:
    """Memory exponent whose fitted |r| decay exponent equals ``decay_gamma`` at this length."""
    table = VOL_CALIBRATION
    k = np.clip(np.log2(length), table[:, 0].min(), table[:, 0].max())
    levels = np.unique(table[:, 0])
    betas = np.unique(table[:, 1])
    fitted = np.array([table[table[:, 0] == lv, 2] for lv in levels])  # (levels, betas)
    curve = np.array([np.interp(k, levels, fitted[:, j]) for j in range(betas.size)])
    curve = np.maximum.accumulate(curve)
    return float(np.interp(decay_gamma, curve, betas))


def generate_volatility_clusters(decay_gamma: float, length: int, seed: int = 0, delta_t: int = DEFAULT_DELTA_T,
                                 label: str | None = None, beta: float | None = None) -> ReturnSeries:
    """Gaussian returns whose |r| autocorrelation decays close to tau^-decay_gamma over lags [10, 1000]."""
    if not 0 < decay_gamma < 1:
        raise DataError("decay exponent must lie in (0, 1)")
    b = calibrated_beta(decay_gamma, length) if beta is None else beta
    x = volatility_returns(b, length, np.random.default_rng(seed))
    return ReturnSeries(x, delta_t, label=label or f"volclust_g{decay_gamma:g}_s{seed}",
                        meta={"generator": "volatility_clusters", "decay_gamma": decay_gamma,
                              "length": int(length), "seed": seed, "beta": round(b, 6)})
