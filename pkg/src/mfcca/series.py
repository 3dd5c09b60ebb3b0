"""Tick ingestion, log-return construction and preprocessing of return series.

Timestamps are integer nanoseconds since the Unix epoch (UTC) throughout, so
that alignment of two series is an exact set operation.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError

NS_PER_SECOND = 1_000_000_000
NS_PER_DAY = 86_400 * NS_PER_SECOND
NS_PER_WEEK = 7 * NS_PER_DAY


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TickSeries:
    """Strictly time-ordered, positive price observations."""

    timestamps: np.ndarray
    prices: np.ndarray
    label: str = ""

    def __post_init__(self):
        ts = _frozen_array(self.timestamps, np.int64)
        px = _frozen_array(self.prices, np.float64)
        if ts.ndim != 1 or ts.shape != px.shape:
            raise DataError("timestamps and prices must be 1-d arrays of equal length")
        if ts.size == 0:
            raise DataError("tick series is empty")
        if np.any(np.diff(ts) <= 0):
            bad = int(np.argmax(np.diff(ts) <= 0)) + 1
            raise DataError(f"timestamps not strictly increasing at tick {bad}")
        if not np.all(px > 0) or not np.all(np.isfinite(px)):
            bad = int(np.argmax(~(px > 0) | ~np.isfinite(px)))
            raise DataError(f"non-positive or non-finite price at tick {bad}")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "prices", px)

    def __len__(self) -> int:
        return self.prices.size


@dataclass(frozen=True)
class ReturnSeries:
    """Log-returns sampled on a grid of fixed interval ``delta_t`` (ns).

    ``timestamps[i]`` is the wall-clock start of the interval over which
    ``returns[i]`` was taken.  After exclusion windows are removed the
    timestamps are no longer contiguous, but they still carry the original
    position of every sample, which is what ``slot_index`` is derived from.
    """

    returns: np.ndarray
    delta_t: int
    timestamps: np.ndarray = None
    label: str = ""
    start_time: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        r = _frozen_array(self.returns, np.float64)
        if r.ndim != 1 or r.size < 2:
            raise DataError("a return series needs at least 2 samples")
        if int(self.delta_t) <= 0:
            raise DataError("delta_t must be positive")
        object.__setattr__(self, "delta_t", int(self.delta_t))
        if self.timestamps is None:
            ts = self.start_time + self.delta_t * np.arange(r.size, dtype=np.int64)
        else:
            ts = self.timestamps
        ts = _frozen_array(ts, np.int64)
        if ts.shape != r.shape:
            raise DataError("timestamps and returns differ in length")
        if np.any(np.diff(ts) <= 0):
            raise DataError("return timestamps must be strictly increasing")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "returns", r)
        object.__setattr__(self, "start_time", int(ts[0]))

    def __len__(self) -> int:
        return self.returns.size

    @property
    def slots_per_day(self) -> int:
        return max(NS_PER_DAY // self.delta_t, 1)

    @property
    def slot_index(self) -> np.ndarray:
        return (self.timestamps // self.delta_t) % self.slots_per_day

    def replace(self, returns=None, timestamps=None, label=None) -> "ReturnSeries":
        return ReturnSeries(
            returns=self.returns if returns is None else returns,
            delta_t=self.delta_t,
            timestamps=self.timestamps if timestamps is None else timestamps,
            label=self.label if label is None else label,
            meta=dict(self.meta),
        )


@dataclass(frozen=True)
class ExclusionWindow:
    start: int
    end: int
    reason: str = ""

    def __post_init__(self):
        if not int(self.start) < int(self.end):
            raise DataError(f"exclusion window start {self.start} is not before end {self.end}")


@dataclass(frozen=True)
class AlignedPair:
    x: ReturnSeries
    y: ReturnSeries

    def __post_init__(self):
        if self.x.delta_t != self.y.delta_t:
            raise DataError("aligned series must share delta_t")
        if not np.array_equal(self.x.timestamps, self.y.timestamps):
            raise DataError("aligned series must share timestamps")

    def __len__(self) -> int:
        return len(self.x)


# ---------------------------------------------------------------------------
# Timestamp parsing

def _is_int_literal(text: str) -> bool:
    t = text.strip()
    if t.startswith(("-", "+")):
        t = t[1:]
    return t.isdigit()


def parse_iso_ns(text: str) -> int:
    """Parse an ISO-8601 UTC timestamp to integer nanoseconds.

    A trailing ``Z`` or ``+00:00`` is accepted; any other offset is rejected.
    """
    t = text.strip()
    if t.endswith("Z") or t.endswith("z"):
        t = t[:-1]
    elif t.endswith("+00:00"):
        t = t[:-6]
    elif len(t) > 6 and t[-6] in "+-" and t[-3] == ":":
        raise ValueError(f"non-UTC offset in timestamp {text!r}")
    t = t.replace(" ", "T", 1)
    return int(np.datetime64(t, "ns").astype(np.int64))


def parse_timestamp(text: str, fmt: str = "auto") -> int:
    if fmt == "auto":
        fmt = "ns" if _is_int_literal(text) else "iso"
    if fmt == "ns":
        return int(text.strip())
    if fmt == "iso":
        return parse_iso_ns(text)
    raise ValueError(f"unknown timestamp format {fmt!r}")


def _data_rows(path: Path, value_column: int | None = 1):
    """Yield (row_number, fields), skipping blanks, ``#`` comments and a header row."""
    with open(path, newline="") as fh:
        first = True
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            if first:
                first = False
                try:
                    parse_timestamp(row[0])
                    if value_column is not None and len(row) > value_column:
                        float(row[value_column])
                except ValueError:
                    continue
            yield lineno, row


def _detect_format(first_field: str) -> str:
    return "ns" if _is_int_literal(first_field) else "iso"


def load_ticks_csv(path, timestamp_format: str = "auto", label: str | None = None) -> TickSeries:
    """Read a ``timestamp,price`` CSV file.

    ``timestamp_format`` is ``"ns"`` (integer epoch nanoseconds), ``"iso"``
    (ISO-8601 UTC) or ``"auto"``, in which case the first data row decides
    for the whole file.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    ts, px = [], []
    fmt = timestamp_format
    prev = None
    for lineno, row in _data_rows(path):
        if len(row) < 2:
            raise DataError(f"{path}: row {lineno}: expected 'timestamp,price'")
        if fmt == "auto":
            fmt = _detect_format(row[0])
        try:
            t = parse_timestamp(row[0], fmt)
            p = float(row[1])
        except ValueError as exc:
            raise DataError(f"{path}: row {lineno}: cannot parse ({exc})") from None
        if not (p > 0) or not np.isfinite(p):
            raise DataError(f"{path}: row {lineno}: price must be positive, got {row[1].strip()}")
        if prev is not None and t <= prev:
            raise DataError(f"{path}: row {lineno}: timestamp {t} is not after previous {prev} (rows out of order)")
        prev = t
        ts.append(t)
        px.append(p)
    if not ts:
        raise DataError(f"{path}: no data rows")
    return TickSeries(np.array(ts, dtype=np.int64), np.array(px), label=label or path.stem)


def load_returns_csv(path, delta_t: int | None = None, label: str | None = None) -> ReturnSeries:
    """Read a ``timestamp,value`` CSV of returns (the format written by ``write_series_csv``).

    ``delta_t`` defaults to the smallest timestamp difference in the file.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    ts, vals = [], []
    fmt = "auto"
    for lineno, row in _data_rows(path):
        if fmt == "auto":
            fmt = _detect_format(row[0])
        try:
            ts.append(parse_timestamp(row[0], fmt))
            vals.append(float(row[1]))
        except (ValueError, IndexError) as exc:
            raise DataError(f"{path}: row {lineno}: cannot parse ({exc})") from None
    if len(ts) < 2:
        raise DataError(f"{path}: need at least 2 returns")
    ts = np.array(ts, dtype=np.int64)
    if np.any(np.diff(ts) <= 0):
        raise DataError(f"{path}: timestamps not strictly increasing")
    if delta_t is None:
        delta_t = int(np.diff(ts).min())
    return ReturnSeries(np.array(vals), int(delta_t), timestamps=ts, label=label or path.stem)


def load_exclusions_csv(path, timestamp_format: str = "auto") -> list[ExclusionWindow]:
    """Read ``start,end,reason`` rows into sorted exclusion windows."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"exclusion file not found: {path}")
    out = []
    fmt = timestamp_format
    for lineno, row in _data_rows(path, value_column=None):
        if fmt == "auto":
            fmt = _detect_format(row[0])
        try:
            start = parse_timestamp(row[0], fmt)
            end = parse_timestamp(row[1], fmt)
        except (ValueError, IndexError) as exc:
            raise DataError(f"{path}: row {lineno}: cannot parse ({exc})") from None
        out.append(ExclusionWindow(start, end, row[2].strip() if len(row) > 2 else ""))
    return sorted(out, key=lambda w: w.start)


# ---------------------------------------------------------------------------
# Returns and preprocessing

def to_log_returns(ticks: TickSeries, delta_t: int, anchor: int = 0, label: str | None = None) -> ReturnSeries:
    """Sample prices on a uniform grid and take log differences.

    Grid points are ``anchor + k * delta_t``; the price at each grid point is
    the last trade at or before it, so stretches without trades give exact
    zero returns.
    """
    delta_t = int(delta_t)
    if delta_t <= 0:
        raise DataError("delta_t must be positive")
    ts = ticks.timestamps
    first = anchor + -((anchor - int(ts[0])) // delta_t) * delta_t  # ceil to grid
    n_points = (int(ts[-1]) - first) // delta_t + 1
    if n_points < 3:
        raise DataError(
            f"tick span {int(ts[-1] - ts[0])} ns is too short for delta_t={delta_t} ns "
            "(need at least 3 grid points)"
        )
    grid = first + delta_t * np.arange(n_points, dtype=np.int64)
    idx = np.searchsorted(ts, grid, side="right") - 1
    logp = np.log(ticks.prices[idx])
    return ReturnSeries(np.diff(logp), delta_t, timestamps=grid[:-1], label=label or ticks.label)


def _check_windows(windows) -> list[ExclusionWindow]:
    windows = list(windows)
    for a, b in zip(windows, windows[1:]):
        if b.start < a.start:
            raise DataError("exclusion windows must be sorted by start")
        if b.start < a.end:
            raise DataError(f"exclusion windows overlap: [{a.start},{a.end}) and [{b.start},{b.end})")
    return windows


def exclusion_mask(series: ReturnSeries, windows) -> np.ndarray:
    """Boolean mask, True for returns whose interval intersects any window."""
    windows = _check_windows(windows)
    start = series.timestamps
    stop = start + series.delta_t
    hit = np.zeros(len(series), dtype=bool)
    for w in windows:
        lo = np.searchsorted(stop, w.start, side="right")
        hi = np.searchsorted(start, w.end, side="left")
        hit[lo:hi] = True
    return hit


def remove_exclusions(series: ReturnSeries, windows) -> ReturnSeries:
    """Delete returns overlapping any window and splice the remainder."""
    hit = exclusion_mask(series, windows)
    if not hit.any():
        return series
    keep = ~hit
    if keep.sum() < 2:
        raise DataError("exclusion windows remove (almost) the entire series")
    return series.replace(returns=series.returns[keep], timestamps=series.timestamps[keep])


def forex_closure_windows(start: int, end: int, reason: str = "forex weekend") -> list[ExclusionWindow]:
    """Weekly Forex closures, Friday 22:00 UTC to Sunday 22:00 UTC, covering [start, end)."""
    # 1970-01-02 was a Friday
    first_friday = NS_PER_DAY + 22 * 3600 * NS_PER_SECOND
    t = first_friday + ((start - first_friday) // NS_PER_WEEK) * NS_PER_WEEK
    out = []
    while t < end:
        if t + 2 * NS_PER_DAY > start:
            out.append(ExclusionWindow(t, t + 2 * NS_PER_DAY, reason))
        t += NS_PER_WEEK
    return out


def align_pair(x: ReturnSeries, y: ReturnSeries) -> AlignedPair:
    """Restrict both series to the timestamps they have in common."""
    if x.delta_t != y.delta_t:
        raise DataError(f"cannot align series with different delta_t ({x.delta_t} vs {y.delta_t})")
    common, ix, iy = np.intersect1d(x.timestamps, y.timestamps, assume_unique=True, return_indices=True)
    if common.size < 2:
        raise DataError(f"series {x.label!r} and {y.label!r} have no common support")
    xs = x if ix.size == len(x) else x.replace(returns=x.returns[ix], timestamps=common)
    ys = y if iy.size == len(y) else y.replace(returns=y.returns[iy], timestamps=common)
    return AlignedPair(xs, ys)


def slot_scale(series: ReturnSeries, method: str = "std") -> tuple[np.ndarray, np.ndarray]:
    """Per intraday-slot volatility level.

    ``method="std"`` is the standard deviation of the signed returns in each
    slot; ``"abs_std"`` uses the standard deviation of absolute returns and
    ``"mean_abs"`` the mean absolute return.  Returns ``(scale, counts)``
    indexed by slot.
    """
    slots = series.slot_index
    n = series.slots_per_day
    r = series.returns
    counts = np.bincount(slots, minlength=n)
    safe = np.maximum(counts, 1)
    if method == "mean_abs":
        return np.bincount(slots, np.abs(r), minlength=n) / safe, counts
    if method == "abs_std":
        r = np.abs(r)
    elif method != "std":
        raise ValueError(f"unknown deseasonalization method {method!r}")
    mean = np.bincount(slots, r, minlength=n) / safe
    dev = r - mean[slots]
    return np.sqrt(np.bincount(slots, dev * dev, minlength=n) / safe), counts


def deseasonalize_daily(series: ReturnSeries, method: str = "std") -> ReturnSeries:
    """Divide every return by the volatility level of its intraday slot.

    Slots whose level is zero are left unchanged and a warning is emitted.
    """
    if NS_PER_DAY % series.delta_t:
        raise DataError("delta_t must divide one day for intraday slots")
    span = int(series.timestamps[-1] - series.timestamps[0]) + series.delta_t
    if span < 2 * NS_PER_DAY:
        raise DataError(f"deseasonalization needs at least 2 days of data, got {span / NS_PER_DAY:.3f}")
    scale, counts = slot_scale(series, method)
    zero = (scale == 0) & (counts > 0)
    if zero.any():
        warnings.warn(
            f"{int(zero.sum())} intraday slot(s) have zero volatility; left unscaled",
            RuntimeWarning,
            stacklevel=2,
        )
    divisor = np.where(scale > 0, scale, 1.0)
    return series.replace(returns=series.returns / divisor[series.slot_index])


def normalize_unit_variance(series: ReturnSeries) -> ReturnSeries:
    """Shift to zero mean and scale to unit (population) variance."""
    r = series.returns
    sd = r.std()
    if not sd > 0:
        raise DataError(f"series {series.label!r} has zero variance")
    return series.replace(returns=(r - r.mean()) / sd)


def aggregate(series: ReturnSeries, factor: int) -> ReturnSeries:
    """Sum non-overlapping blocks of ``factor`` returns (coarser sampling interval)."""
    factor = int(factor)
    n = len(series) // factor if factor >= 1 else 0
    if n < 2:
        raise DataError("aggregation factor leaves fewer than 2 samples")
    r = series.returns[: n * factor].reshape(n, factor).sum(axis=1)
    ts = series.timestamps[: n * factor : factor]
    return ReturnSeries(r, series.delta_t * factor, timestamps=ts, label=series.label)
