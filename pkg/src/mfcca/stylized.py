"""Volatility autocorrelation and cumulative tail distributions of returns."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .series import ReturnSeries
from .spectrum import ols_fit

DEFAULT_DECAY_RANGE = (10, 1000)


@dataclass(frozen=True)
class AutocorrCurve:
    lags: np.ndarray
    c: np.ndarray
    normalized: bool
    label: str = ""


@dataclass(frozen=True)
class TailDistribution:
    """Empirical P(|r| >= x) of absolute returns.

    ``sorted_abs`` keeps the full sorted sample, which the Hill estimator and
    quantile-based fit ranges need.
    """

    thresholds: np.ndarray
    cdf_complement: np.ndarray
    sorted_abs: np.ndarray
    sample_std: float
    label: str = ""

    @property
    def n(self) -> int:
        return self.sorted_abs.size


@dataclass(frozen=True)
class TailFit:
    gamma: float
    stderr: float
    hill: float
    hill_stderr: float
    r_squared: float
    fit_range: tuple
    n_points: int
    n_exceed: int


def _values(series) -> tuple[np.ndarray, str]:
    if isinstance(series, ReturnSeries):
        return series.returns, series.label
    return np.asarray(series, dtype=np.float64), ""


def _lagged_products(a: np.ndarray, max_lag: int) -> np.ndarray:
    # sum_t a[t] a[t+k] for k = 0..max_lag via zero-padded FFT
    n = a.size
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.fft.rfft(a, nfft)
    return np.fft.irfft(spec * np.conj(spec), nfft)[: max_lag + 1]


def volatility_autocorrelation(series, max_lag: int, normalized: bool = True) -> AutocorrCurve:
    """Autocorrelation of |r| at lags 1..max_lag.

    The raw variant is the plain lagged mean <|r(t)| |r(t - tau)|>; the
    normalized one is the sample autocorrelation of |r| (mean removed,
    divided by the lag-0 sum, hence bounded by 1).  Input is expected to be
    deseasonalized already.
    """
    r, label = _values(series)
    n = r.size
    max_lag = int(max_lag)
    if max_lag < 1 or max_lag >= n / 4:
        raise DataError(f"max_lag must be in [1, N/4); got {max_lag} for N={n}")
    a = np.abs(r)
    lags = np.arange(1, max_lag + 1)
    if normalized:
        d = a - a.mean()
        s = _lagged_products(d, max_lag)
        if not s[0] > 0:
            raise DataError("|r| is constant; normalized autocorrelation undefined")
        c = s[1:] / s[0]
    else:
        c = _lagged_products(a, max_lag)[1:] / (n - lags)
    return AutocorrCurve(lags, c, normalized, label)


def log_spaced_lags(lo: int, hi: int, per_decade: int = 20) -> np.ndarray:
    n = int(np.ceil(np.log10(hi / lo) * per_decade)) + 1
    return np.unique(np.round(np.geomspace(lo, hi, n)).astype(np.int64))


def fit_decay_exponent(curve: AutocorrCurve, fit_range=DEFAULT_DECAY_RANGE,
                       per_decade: int | None = 20) -> tuple[float, float]:
    """gamma and its standard error from C(tau) ~ tau^-gamma (OLS in log-log).

    Lags are thinned to ``per_decade`` log-spaced values so every decade
    weighs the same; ``per_decade=None`` uses all lags.  Non-positive C
    values are skipped.
    """
    lo, hi = fit_range
    sel = (curve.lags >= lo) & (curve.lags <= hi)
    if per_decade:
        sel &= np.isin(curve.lags, log_spaced_lags(max(lo, 1), hi, per_decade))
    sel &= curve.c > 0
    if sel.sum() < 8:
        raise DataError(f"only {int(sel.sum())} positive autocorrelation values in {fit_range}; need 8")
    slope, se, _ = ols_fit(np.log(curve.lags[sel]), np.log(curve.c[sel]))
    return -slope, se


def cumulative_tail(series, max_exact: int = 10_000, grid_points: int = 400) -> TailDistribution:
    """Empirical complementary CDF of |r|.

    Up to ``max_exact`` samples it is evaluated at every sorted absolute value
    (a staircase starting at 1); beyond that on ``grid_points`` log-spaced
    thresholds.  Zero values are counted but not used as thresholds.
    """
    r, label = _values(series)
    a = np.sort(np.abs(r))
    n = a.size
    if not np.any(a > 0):
        raise DataError("all returns are zero; no tail to measure")
    if n <= max_exact:
        first = int(np.searchsorted(a, 0.0, side="right"))
        x = a[first:]
        ccdf = (n - np.arange(first, n)) / n
    else:
        x = np.geomspace(a[a > 0][0], a[-1], grid_points)
        ccdf = (n - np.searchsorted(a, x, side="left")) / n
    return TailDistribution(x, ccdf, a, float(r.std()), label)


def default_tail_range(tail: TailDistribution) -> tuple[float, float]:
    """From 2 sample standard deviations to the (1 - 10/N) quantile of |r|."""
    return 2.0 * tail.sample_std, float(np.quantile(tail.sorted_abs, 1.0 - 10.0 / tail.n))


def quantile_tail_range(tail: TailDistribution, q_lo: float, q_hi: float) -> tuple[float, float]:
    return float(np.quantile(tail.sorted_abs, q_lo)), float(np.quantile(tail.sorted_abs, q_hi))


def hill_estimator(sorted_abs: np.ndarray, x_lo: float) -> tuple[float, float, int]:
    exceed = sorted_abs[sorted_abs > x_lo]
    k = exceed.size
    if k < 2:
        raise DataError("fewer than 2 exceedances for the Hill estimator")
    g = k / np.sum(np.log(exceed / x_lo))
    return float(g), float(g / np.sqrt(k)), k


def fit_tail_exponent(tail: TailDistribution, fit_range=None, quantiles=None) -> TailFit:
    """Tail exponent from OLS of ln P(|r| >= x) on ln x, with the Hill estimate alongside.

    ``fit_range`` is in the units of x; alternatively ``quantiles`` gives it
    as quantiles of |r|.  Only thresholds with ccdf > 10/N are used.
    """
    if quantiles is not None:
        lo, hi = quantile_tail_range(tail, *quantiles)
    elif fit_range is not None:
        lo, hi = fit_range
    else:
        lo, hi = default_tail_range(tail)
    sel = (tail.thresholds >= lo) & (tail.thresholds <= hi) & (tail.cdf_complement > 10.0 / tail.n)
    if sel.sum() < 8:
        raise DataError(f"only {int(sel.sum())} thresholds in tail fit range [{lo:.4g}, {hi:.4g}]; need 8")
    slope, se, r2 = ols_fit(np.log(tail.thresholds[sel]), np.log(tail.cdf_complement[sel]))
    hill, hill_se, k = hill_estimator(tail.sorted_abs, lo)
    return TailFit(
        gamma=-slope, stderr=se, hill=hill, hill_stderr=hill_se,
        r_squared=r2, fit_range=(float(lo), float(hi)), n_points=int(sel.sum()), n_exceed=k,
    )
