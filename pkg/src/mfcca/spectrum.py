"""Generalized Hurst exponents, Legendre transform to f(alpha), and rolling Hurst tracks."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .fluctuation import DEFAULT_ORDER, FluctuationMatrix, default_scale_grid, fluctuation_single
from .series import ReturnSeries

MIN_FIT_POINTS = 5


@dataclass(frozen=True)
class ScalingRange:
    s_min: int
    s_max: int

    def __post_init__(self):
        if not self.s_min < self.s_max:
            raise DataError(f"scaling range needs s_min < s_max, got [{self.s_min}, {self.s_max}]")

    def select(self, scales) -> np.ndarray:
        scales = np.asarray(scales)
        return (scales >= self.s_min) & (scales <= self.s_max)


@dataclass(frozen=True)
class RangePolicy:
    """How the fitting range is chosen.

    By default ``s_min`` is the smallest scale where every q is defined and
    ``s_max`` is ``max_fraction * N``, further capped by ``cutoff`` (e.g. the
    typical size of volatility clusters, in samples).  Explicit ``s_min`` /
    ``s_max`` override the rules and are snapped onto the scale grid.
    """

    s_min: int | None = None
    s_max: int | None = None
    cutoff: int | None = None
    max_fraction: float = 1.0 / 40.0


@dataclass(frozen=True)
class GeneralizedHurst:
    q_grid: np.ndarray
    h: np.ndarray
    stderr: np.ndarray
    range: ScalingRange
    label: str = ""

    def at(self, q: float) -> float:
        idx = np.flatnonzero(np.isclose(self.q_grid, q, rtol=0, atol=1e-9))
        if idx.size == 0:
            raise KeyError(f"q={q} not in grid")
        return float(self.h[idx[0]])


@dataclass(frozen=True)
class SingularitySpectrum:
    q: np.ndarray
    tau: np.ndarray
    alpha: np.ndarray
    f_alpha: np.ndarray
    alpha_min: float
    alpha_0: float
    alpha_max: float
    width: float
    asymmetry: float
    f_alpha_0: float
    warnings: list = field(default_factory=list)

    @property
    def delta_left(self) -> float:
        return self.alpha_0 - self.alpha_min

    @property
    def delta_right(self) -> float:
        return self.alpha_max - self.alpha_0


@dataclass(frozen=True)
class RollingHurstTrack:
    window_points: int
    step_points: int
    times: np.ndarray
    H: np.ndarray
    stderr: np.ndarray
    label: str = ""


def _snap_down(scales, value):
    ok = scales[scales <= value]
    return int(ok.max()) if ok.size else None


def _snap_up(scales, value):
    ok = scales[scales >= value]
    return int(ok.min()) if ok.size else None


def select_scaling_range(fm: FluctuationMatrix, policy: RangePolicy | None = None) -> ScalingRange:
    policy = policy or RangePolicy()
    scales = fm.scale_grid
    if np.any(np.isclose(fm.q_grid, 2.0)):
        n_def = int(fm.defined_mask[fm.q_index(2.0)].sum())
        if n_def < 8:
            raise DataError(f"only {n_def} defined scales at q=2; need at least 8")
    if policy.s_min is not None:
        s_min = _snap_up(scales, policy.s_min)
    else:
        all_def = np.flatnonzero(fm.defined_mask.all(axis=0))
        if all_def.size == 0:
            raise DataError("no scale at which every q is defined")
        s_min = int(scales[all_def[0]])
    if policy.s_max is not None:
        s_max = _snap_down(scales, policy.s_max)
    else:
        limit = fm.n_samples * policy.max_fraction
        if policy.cutoff is not None:
            limit = min(limit, policy.cutoff)
        s_max = _snap_down(scales, limit)
    if s_min is None or s_max is None:
        raise DataError("scaling range falls outside the scale grid")
    n_in = int(np.sum((scales >= s_min) & (scales <= s_max)))
    if n_in < MIN_FIT_POINTS:
        raise DataError(f"scaling range [{s_min}, {s_max}] holds {n_in} scales; need {MIN_FIT_POINTS}")
    return ScalingRange(s_min, s_max)


def ols_fit(x, y) -> tuple[float, float, float]:
    """Slope, classical slope standard error and R^2 of a straight-line fit.

    The error is taken from the residuals directly; the 1 - r^2 route
    cancels badly when the fit is nearly exact.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = xc @ xc
    slope = (xc @ yc) / sxx
    resid = yc - slope * xc
    ss_res = resid @ resid
    ss_tot = yc @ yc
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(np.sqrt(ss_res / (x.size - 2) / sxx)), float(r2)


def _ols(x, y) -> tuple[float, float]:
    slope, se, _ = ols_fit(x, y)
    return slope, se


def fit_scaling_exponent(fm: FluctuationMatrix, q: float, scaling_range: ScalingRange) -> tuple[float, float]:
    """OLS slope of ln F(q, s) against ln s and its standard error."""
    i = fm.q_index(q)
    sel = scaling_range.select(fm.scale_grid) & fm.defined_mask[i]
    if sel.sum() < MIN_FIT_POINTS:
        raise DataError(f"q={q:g}: {int(sel.sum())} defined points in range; need {MIN_FIT_POINTS}")
    return _ols(np.log(fm.scale_grid[sel]), np.log(fm.values[i, sel]))


def generalized_hurst(fm: FluctuationMatrix, scaling_range: ScalingRange | None = None) -> GeneralizedHurst:
    """h(q) for every q of a single-series matrix; failed fits become NaN."""
    if fm.kind != "single":
        raise DataError("generalized Hurst exponents need a single-series fluctuation matrix")
    scaling_range = scaling_range or select_scaling_range(fm)
    h = np.full(fm.q_grid.size, np.nan)
    se = np.full(fm.q_grid.size, np.nan)
    for i, q in enumerate(fm.q_grid):
        try:
            h[i], se[i] = fit_scaling_exponent(fm, q, scaling_range)
        except DataError:
            pass
    if np.all(np.isnan(h)):
        raise DataError("no q value has enough defined points for a fit")
    return GeneralizedHurst(fm.q_grid.copy(), h, se, scaling_range, fm.label)


def asymmetry_parameter(alpha_min: float, alpha_0: float, alpha_max: float) -> float:
    """(dL - dR) / (dL + dR) with dL = alpha_0 - alpha_min, dR = alpha_max - alpha_0."""
    left = alpha_0 - alpha_min
    right = alpha_max - alpha_0
    total = left + right
    return 0.0 if total == 0 else (left - right) / total


def _run_around_zero(q: np.ndarray, h: np.ndarray) -> slice:
    zero = np.flatnonzero(np.isclose(q, 0.0, atol=1e-9))
    if zero.size == 0:
        raise DataError("q grid must contain 0")
    z = int(zero[0])
    if not np.isfinite(h[z]):
        raise DataError("h(0) is undefined")
    lo = z
    while lo > 0 and np.isfinite(h[lo - 1]):
        lo -= 1
    hi = z
    while hi < h.size - 1 and np.isfinite(h[hi + 1]):
        hi += 1
    if hi - lo + 1 < 5:
        raise DataError("need h(q) on at least 5 consecutive q values around 0")
    return slice(lo, hi + 1)


def legendre_transform(gh: GeneralizedHurst) -> SingularitySpectrum:
    """tau(q) = q h(q) - 1, alpha = dtau/dq (finite differences), f = q alpha - tau."""
    run = _run_around_zero(gh.q_grid, gh.h)
    q = gh.q_grid[run]
    tau = q * gh.h[run] - 1.0
    alpha = np.gradient(tau, q)
    f = q * alpha - tau
    z = int(np.flatnonzero(np.isclose(q, 0.0, atol=1e-9))[0])
    a0, amin, amax = float(alpha[z]), float(alpha.min()), float(alpha.max())
    notes = []
    # steps within rounding of zero do not count as inversions
    tol = 1e-9 * max(1.0, float(np.max(np.abs(alpha))))
    inverted = int(np.sum(np.diff(alpha) > tol))
    if inverted > 0.1 * (alpha.size - 1):
        notes.append(f"alpha(q) not monotone: {inverted} of {alpha.size - 1} steps inverted")
        warnings.warn(notes[-1], RuntimeWarning, stacklevel=2)
    return SingularitySpectrum(
        q=q, tau=tau, alpha=alpha, f_alpha=f,
        alpha_min=amin, alpha_0=a0, alpha_max=amax, width=amax - amin,
        asymmetry=asymmetry_parameter(amin, a0, amax), f_alpha_0=float(f[z]), warnings=notes,
    )


def mirror_wings(gh: GeneralizedHurst) -> GeneralizedHurst:
    """Exchange the left and right wings of f(alpha).

    Uses h(q) -> 2 h(0) - h(-q), which maps alpha(q) to 2 alpha_0 - alpha(-q).
    Requires a grid symmetric about 0.
    """
    q = gh.q_grid
    if not np.allclose(q, -q[::-1], atol=1e-9):
        raise DataError("wing exchange needs a q grid symmetric about 0")
    h0 = gh.at(0.0)
    return GeneralizedHurst(q.copy(), 2 * h0 - gh.h[::-1], gh.stderr[::-1].copy(), gh.range, gh.label)


def rolling_hurst(series, window_points: int, step_points: int | None = None,
                  range_policy: RangePolicy | None = None, scale_grid=None,
                  order_m: int = DEFAULT_ORDER) -> RollingHurstTrack:
    """H = h(2) over sliding windows, stamped with the timestamp of each window's last sample.

    ``step_points`` defaults to a sixth of the window.
    """
    x = series.returns if isinstance(series, ReturnSeries) else np.asarray(series, dtype=np.float64)
    ts = series.timestamps if isinstance(series, ReturnSeries) else np.arange(x.size)
    window_points = int(window_points)
    step_points = int(step_points) if step_points else max(window_points // 6, 1)
    if window_points > x.size:
        raise DataError(f"window of {window_points} points exceeds series length {x.size}")
    if window_points < 2 or step_points < 1:
        raise DataError("window and step must be positive")
    scales = default_scale_grid(window_points, order_m=order_m) if scale_grid is None else scale_grid
    starts = range(0, x.size - window_points + 1, step_points)
    times, H, se = [], [], []
    for a in starts:
        fm = fluctuation_single(x[a : a + window_points], [2.0], scales, order_m)
        r = select_scaling_range(fm, range_policy)
        h, e = fit_scaling_exponent(fm, 2.0, r)
        times.append(int(ts[a + window_points - 1]))
        H.append(h)
        se.append(e)
    return RollingHurstTrack(window_points, step_points, np.array(times, dtype=np.int64),
                             np.array(H), np.array(se), getattr(series, "label", ""))
