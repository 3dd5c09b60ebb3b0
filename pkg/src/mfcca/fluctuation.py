"""Profiles, two-ended box partitions, polynomial detrending and q-order fluctuation functions."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DataError
from .series import AlignedPair, ReturnSeries

DEFAULT_ORDER = 2


@dataclass(frozen=True)
class Profile:
    values: np.ndarray
    source_label: str = ""

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class BoxPartition:
    length_T: int
    scale_s: int
    num_boxes_one_end: int
    box_starts: np.ndarray

    @property
    def num_boxes(self) -> int:
        return 2 * self.num_boxes_one_end


@dataclass(frozen=True)
class BoxStats:
    scale_s: int
    per_box_cov: np.ndarray
    per_box_var_x: np.ndarray
    per_box_var_y: np.ndarray


@dataclass(frozen=True)
class FluctuationMatrix:
    """F(q, s) on a (q-grid x scale-grid) lattice.

    ``values[i, j]`` belongs to ``q_grid[i]`` and ``scale_grid[j]``.
    ``moments`` holds the q-order moments before root extraction (F^q(s));
    they are NaN in the q = 0 row.  ``defined_mask`` is False wherever the
    value cannot enter a log-log regression.
    """

    q_grid: np.ndarray
    scale_grid: np.ndarray
    values: np.ndarray
    moments: np.ndarray
    defined_mask: np.ndarray
    kind: str
    order_m: int
    n_samples: int
    label: str = ""

    def q_index(self, q: float) -> int:
        idx = np.flatnonzero(np.isclose(self.q_grid, q, rtol=0, atol=1e-9))
        if idx.size == 0:
            raise KeyError(f"q={q} not in grid")
        return int(idx[0])

    def row(self, q: float) -> np.ndarray:
        return self.values[self.q_index(q)]


def _returns_of(series) -> np.ndarray:
    if isinstance(series, ReturnSeries):
        return series.returns
    return np.asarray(series, dtype=np.float64)


def build_profile(series) -> Profile:
    label = series.label if isinstance(series, ReturnSeries) else ""
    return Profile(np.cumsum(_returns_of(series)), label)


def partition_boxes(length_T: int, scale_s: int) -> BoxPartition:
    """M_s boxes laid from the start and M_s boxes laid from the end.

    When ``s`` divides ``T`` the two sets coincide and both are kept.  The
    s >= 4 floor for analysis scales is enforced by the fluctuation functions.
    """
    T, s = int(length_T), int(scale_s)
    if not 1 <= s <= T:
        raise DataError(f"scale {s} outside [1, {T}]")
    M = T // s
    front = s * np.arange(M)
    back = (T - M * s) + s * np.arange(M)
    return BoxPartition(T, s, M, np.concatenate([front, back]))


@lru_cache(maxsize=256)
def _poly_basis(s: int, order_m: int) -> np.ndarray:
    # orthonormal basis of degree <= m polynomials sampled at s points mapped onto [-1, 1]
    t = np.linspace(-1.0, 1.0, s)
    vander = np.polynomial.legendre.legvander(t, order_m)
    q, _ = np.linalg.qr(vander)
    q.setflags(write=False)
    return q


def _check_order(s: int, order_m: int):
    if order_m < 0:
        raise DataError("polynomial order must be non-negative")
    if s < order_m + 2:
        raise DataError(f"box of length {s} too short for a degree-{order_m} fit")


def _detrend_rows(boxes: np.ndarray, order_m: int) -> np.ndarray:
    s = boxes.shape[-1]
    _check_order(s, order_m)
    # the offset is absorbed by the fit; removing it first keeps flat boxes exactly zero
    b = boxes - boxes[..., :1]
    basis = _poly_basis(s, order_m)
    return b - (b @ basis) @ basis.T


def detrend_box(profile, box, order_m: int = DEFAULT_ORDER) -> np.ndarray:
    """Residuals of one box after removing its least-squares polynomial of degree ``order_m``."""
    values = profile.values if isinstance(profile, Profile) else np.asarray(profile, dtype=np.float64)
    start, s = int(box[0]), int(box[1])
    if start < 0 or start + s > values.size:
        raise DataError("box extends beyond the profile")
    return _detrend_rows(values[start : start + s][None, :], order_m)[0]


def _box_residuals(values: np.ndarray, partition: BoxPartition, order_m: int) -> np.ndarray:
    s, M, T = partition.scale_s, partition.num_boxes_one_end, partition.length_T
    front = values[: M * s].reshape(M, s)
    back = values[T - M * s :].reshape(M, s)
    return _detrend_rows(np.concatenate([front, back]), order_m)


def box_stats(profile_x, profile_y, partition: BoxPartition, order_m: int = DEFAULT_ORDER) -> BoxStats:
    """Per-box detrended covariance and variances."""
    vx = profile_x.values if isinstance(profile_x, Profile) else np.asarray(profile_x, dtype=np.float64)
    vy = profile_y.values if isinstance(profile_y, Profile) else np.asarray(profile_y, dtype=np.float64)
    if vx.size != vy.size:
        raise DataError(f"profile lengths differ ({vx.size} vs {vy.size})")
    if partition.length_T != vx.size:
        raise DataError("partition does not match profile length")
    rx = _box_residuals(vx, partition, order_m)
    ry = rx if vy is vx else _box_residuals(vy, partition, order_m)
    s = partition.scale_s
    var_x = np.sum(rx * rx, axis=1) / s
    var_y = var_x if ry is rx else np.sum(ry * ry, axis=1) / s
    cov = var_x if ry is rx else np.sum(rx * ry, axis=1) / s
    return BoxStats(s, cov, var_x, var_y)


def default_scale_grid(n_samples: int, s_min: int = 10, s_max: int | None = None,
                       per_decade: int = 24, order_m: int = DEFAULT_ORDER) -> np.ndarray:
    """Log-spaced integer scales, ``per_decade`` per decade, from ``s_min`` to ``N/40``."""
    if s_max is None:
        s_max = n_samples // 40
    s_min = max(int(s_min), 4, order_m + 2)
    s_max = min(int(s_max), n_samples)
    if s_max <= s_min:
        raise DataError(f"series of length {n_samples} too short for scale grid [{s_min}, {s_max}]")
    n = int(np.ceil(np.log10(s_max / s_min) * per_decade)) + 1
    return np.unique(np.round(np.geomspace(s_min, s_max, n)).astype(np.int64))


def q_grid(q_min: float = -4.0, q_max: float = 4.0, q_step: float = 0.2) -> np.ndarray:
    """Evenly stepped q values; rounded so that q = 0 and the end points are exact."""
    if not q_step > 0 or not q_min < q_max:
        raise ValueError("need q_min < q_max and q_step > 0")
    n = int(round((q_max - q_min) / q_step))
    return np.round(q_min + q_step * np.arange(n + 1), 10)


def single_moments(var: np.ndarray, q: np.ndarray):
    """Root-extracted F(q) and raw moments for one scale from per-box variances."""
    q = np.asarray(q, dtype=np.float64)
    has_zero = bool(np.any(var == 0))
    values = np.full(q.shape, np.nan)
    moments = np.full(q.shape, np.nan)
    mask = np.zeros(q.shape, dtype=bool)
    nz = q != 0
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        log_var = np.log(var)
        if nz.any():
            qn = q[nz]
            mom = np.mean(np.exp(0.5 * qn[:, None] * log_var[None, :]), axis=1)
            moments[nz] = mom
            values[nz] = mom ** (1.0 / qn)
        if (~nz).any():
            values[~nz] = np.exp(0.5 * np.mean(log_var))
    mask[:] = np.isfinite(values) & (values > 0)
    if has_zero:
        mask[q <= 0] = False
        values[(q <= 0)] = np.nan
    return values, moments, mask


def cross_moments(cov: np.ndarray, q: np.ndarray):
    """Signed moments sign(f2)|f2|^(q/2) averaged over boxes, and their signed roots."""
    q = np.asarray(q, dtype=np.float64)
    values = np.full(q.shape, np.nan)
    moments = np.full(q.shape, np.nan)
    nz = q != 0
    sgn = np.sign(cov)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        log_abs = np.log(np.abs(cov))
        qn = q[nz]
        terms = sgn[None, :] * np.exp(0.5 * qn[:, None] * log_abs[None, :])
        if np.any(cov == 0):
            # sign(0) * 0^(q/2) is 0 for q > 0 and undefined for q < 0
            zero = (cov == 0)[None, :]
            terms = np.where(zero & (qn[:, None] > 0), 0.0, terms)
            terms = np.where(zero & (qn[:, None] < 0), np.nan, terms)
        mom = np.mean(terms, axis=1)
        moments[nz] = mom
        values[nz] = np.sign(mom) * np.abs(mom) ** (1.0 / qn)
    values[~np.isfinite(values)] = np.nan
    mask = np.isfinite(moments) & (moments > 0) & np.isfinite(values) & (values > 0)
    return values, moments, mask


def _prepare_grids(n: int, q_grid_, scale_grid, order_m: int):
    qs = np.atleast_1d(np.asarray(q_grid_, dtype=np.float64))
    scales = default_scale_grid(n, order_m=order_m) if scale_grid is None else np.atleast_1d(np.asarray(scale_grid, dtype=np.int64))
    if qs.size == 0 or scales.size == 0:
        raise DataError("q grid and scale grid must be non-empty")
    if scales.min() < 4 or scales.max() > n:
        raise DataError(f"scales must lie within [4, {n}]")
    for s in scales:
        _check_order(int(s), order_m)
    return qs, scales


def fluctuation_single(series, q_grid=(2.0,), scale_grid=None, order_m: int = DEFAULT_ORDER) -> FluctuationMatrix:
    """q-order fluctuation functions of a single series.

    For q != 0, F(q,s) = [mean_v f2(s,v)^(q/2)]^(1/q); for q = 0 the
    logarithmic average exp(mean_v ln f2(s,v) / 2) is used.  Boxes with zero
    variance make every q <= 0 entry at that scale undefined.
    """
    x = _returns_of(series)
    qs, scales = _prepare_grids(x.size, q_grid, scale_grid, order_m)
    prof = np.cumsum(x)
    values = np.empty((qs.size, scales.size))
    moments = np.empty_like(values)
    mask = np.empty(values.shape, dtype=bool)
    for j, s in enumerate(scales):
        stats = box_stats(prof, prof, partition_boxes(x.size, s), order_m)
        values[:, j], moments[:, j], mask[:, j] = single_moments(stats.per_box_var_x, qs)
    return FluctuationMatrix(qs, scales, values, moments, mask, "single", order_m, x.size,
                             getattr(series, "label", ""))


def _pair_arrays(pair, y=None):
    if isinstance(pair, AlignedPair):
        return pair.x.returns, pair.y.returns, f"{pair.x.label}~{pair.y.label}"
    if y is None:
        x, y = pair
    else:
        x = pair
    x, y = _returns_of(x), _returns_of(y)
    if x.size != y.size:
        raise DataError(f"series lengths differ ({x.size} vs {y.size})")
    return x, y, ""


def fluctuation_cross(pair, q_grid=(2.0,), scale_grid=None, order_m: int = DEFAULT_ORDER) -> FluctuationMatrix:
    """Signed q-order cross-fluctuation functions of an aligned pair.

    Values are sign(F^q) |F^q|^(1/q); entries whose moment is not positive
    are kept (negative) but masked out, and q = 0 is always undefined.
    """
    x, y, label = _pair_arrays(pair)
    qs, scales = _prepare_grids(x.size, q_grid, scale_grid, order_m)
    px, py = np.cumsum(x), np.cumsum(y)
    if np.array_equal(x, y):
        py = px
    values = np.empty((qs.size, scales.size))
    moments = np.empty_like(values)
    mask = np.empty(values.shape, dtype=bool)
    for j, s in enumerate(scales):
        stats = box_stats(px, py, partition_boxes(x.size, s), order_m)
        values[:, j], moments[:, j], mask[:, j] = cross_moments(stats.per_box_cov, qs)
    return FluctuationMatrix(qs, scales, values, moments, mask, "cross", order_m, x.size, label)
