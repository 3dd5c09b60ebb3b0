"""Cross-scaling exponents lambda(q), d_xy(q) and the q-dependent detrended cross-correlation coefficient."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .errors import DataError
from .fluctuation import (
    DEFAULT_ORDER,
    FluctuationMatrix,
    _pair_arrays,
    _prepare_grids,
    box_stats,
    cross_moments,
    partition_boxes,
    single_moments,
)
from .spectrum import MIN_FIT_POINTS, GeneralizedHurst, ScalingRange, _ols

log = logging.getLogger(__name__)

RHO_SANITY_BAND = 1.05
MIN_POSITIVE_COVERAGE = 0.8


@dataclass(frozen=True)
class CrossScaling:
    q_grid: np.ndarray
    lambda_: np.ndarray
    lambda_stderr: np.ndarray
    valid_q: np.ndarray
    range: ScalingRange
    h_xy: np.ndarray | None = None
    d_xy: np.ndarray | None = None
    label: str = ""


@dataclass(frozen=True)
class QDccaCurve:
    q: float
    scales: np.ndarray
    rho: np.ndarray
    label: str = ""


def lambda_exponent(cross_fm: FluctuationMatrix, scaling_range: ScalingRange,
                    min_points: int = MIN_FIT_POINTS,
                    min_coverage: float = MIN_POSITIVE_COVERAGE) -> CrossScaling:
    """lambda(q) from scales inside the range where F_XY(q, s) is positive.

    A q value is valid only with at least ``min_points`` positive scales that
    also make up ``min_coverage`` of the range; a cross function that keeps
    changing sign has no power law to fit.
    """
    if cross_fm.kind != "cross":
        raise DataError("lambda(q) needs a cross fluctuation matrix")
    n = cross_fm.q_grid.size
    lam = np.full(n, np.nan)
    se = np.full(n, np.nan)
    valid = np.zeros(n, dtype=bool)
    in_range = scaling_range.select(cross_fm.scale_grid)
    logs = np.log(cross_fm.scale_grid)
    for i in range(n):
        sel = in_range & cross_fm.defined_mask[i]
        if sel.sum() >= min_points and sel.sum() >= min_coverage * in_range.sum():
            lam[i], se[i] = _ols(logs[sel], np.log(cross_fm.values[i, sel]))
            valid[i] = True
    return CrossScaling(cross_fm.q_grid.copy(), lam, se, valid, scaling_range, label=cross_fm.label)


def d_xy(gh_x: GeneralizedHurst, gh_y: GeneralizedHurst, cs: CrossScaling) -> CrossScaling:
    """Attach h_xy = (h_x + h_y) / 2 and d_xy = lambda - h_xy."""
    if not (np.array_equal(gh_x.q_grid, cs.q_grid) and np.array_equal(gh_y.q_grid, cs.q_grid)):
        raise DataError("q grids of h_x, h_y and lambda differ")
    h_xy = 0.5 * (gh_x.h + gh_y.h)
    ok = cs.valid_q & np.isfinite(h_xy)
    d = np.where(ok, cs.lambda_ - h_xy, np.nan)
    return replace(cs, h_xy=h_xy, d_xy=d)


def rho_from_moments(cross_fm: FluctuationMatrix, fm_x: FluctuationMatrix, fm_y: FluctuationMatrix,
                     q: float) -> QDccaCurve:
    """Assemble rho_q(s) from already computed fluctuation matrices."""
    i, ix, iy = cross_fm.q_index(q), fm_x.q_index(q), fm_y.q_index(q)
    num = cross_fm.moments[i]
    den = np.sqrt(fm_x.moments[ix] * fm_y.moments[iy])
    keep = np.isfinite(den) & (den > 0)
    return QDccaCurve(float(q), cross_fm.scale_grid[keep].copy(), num[keep] / den[keep], cross_fm.label)


def rho_curves(pair, q_values=(1.0, 4.0), scale_grid=None, order_m: int = DEFAULT_ORDER) -> list[QDccaCurve]:
    """rho_q(s) = F^q_XY(s) / sqrt(F^q_XX(s) F^q_YY(s)) for each q > 0.

    Scales where either single moment vanishes are omitted.
    """
    x, y, label = _pair_arrays(pair)
    qs, scales = _prepare_grids(x.size, q_values, scale_grid, order_m)
    if np.any(qs <= 0):
        raise DataError("rho_q is defined here for q > 0 only")
    px, py = np.cumsum(x), np.cumsum(y)
    num = np.empty((qs.size, scales.size))
    den = np.empty_like(num)
    for j, s in enumerate(scales):
        st = box_stats(px, py, partition_boxes(x.size, s), order_m)
        _, num[:, j], _ = cross_moments(st.per_box_cov, qs)
        _, mx, _ = single_moments(st.per_box_var_x, qs)
        _, my, _ = single_moments(st.per_box_var_y, qs)
        den[:, j] = np.sqrt(mx * my)
    out = []
    for i, q in enumerate(qs):
        keep = np.isfinite(den[i]) & (den[i] > 0)
        rho = num[i, keep] / den[i, keep]
        if np.any(np.abs(rho) > RHO_SANITY_BAND):
            log.warning("rho_%g exceeds the sanity band +/-%g at %d scale(s)", q, RHO_SANITY_BAND,
                        int(np.sum(np.abs(rho) > RHO_SANITY_BAND)))
        out.append(QDccaCurve(float(q), scales[keep].copy(), rho, label))
    return out


def rho_q(pair, q: float, scale_grid=None, order_m: int = DEFAULT_ORDER) -> QDccaCurve:
    if not q > 0:
        raise DataError("rho_q is defined here for q > 0 only")
    return rho_curves(pair, [q], scale_grid, order_m)[0]
