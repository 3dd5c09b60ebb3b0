"""CSV and JSON writers for every derived object.

All CSV files may start with ``#`` comment lines (provenance); readers in
this package skip them.  Floats are written with 17 significant digits so
files round-trip exactly and repeated runs are byte-identical.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .cross import CrossScaling, QDccaCurve
from .fluctuation import FluctuationMatrix
from .series import ReturnSeries
from .spectrum import GeneralizedHurst, RollingHurstTrack, SingularitySpectrum
from .stylized import AutocorrCurve, TailDistribution, TailFit


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def jsonable(v):
    """Convert numpy containers and non-finite floats into strict-JSON values."""
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [jsonable(x) for x in v.tolist()]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_csv(path, columns: list[str], rows, header_lines=()) -> Path:
    path = Path(path)
    lines = [f"# {h}" for h in header_lines]
    lines.append(",".join(columns))
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")
    return path


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj))
    return path


# ---------------------------------------------------------------------------

def write_series_csv(series: ReturnSeries, path, header_lines=()) -> Path:
    return write_csv(path, ["timestamp", "value"], zip(series.timestamps, series.returns), header_lines)


def fluctuation_rows(fm: FluctuationMatrix):
    """Header ``s,<q_1>,<q_2>,...``; one row per scale."""
    columns = ["s"] + [fmt(q) for q in fm.q_grid]
    rows = [[s, *fm.values[:, j]] for j, s in enumerate(fm.scale_grid)]
    return columns, rows


def write_fluctuation_csv(fm: FluctuationMatrix, path, header_lines=()) -> Path:
    columns, rows = fluctuation_rows(fm)
    return write_csv(path, columns, rows, header_lines)


def fluctuation_dict(fm: FluctuationMatrix) -> dict:
    return {
        "kind": fm.kind,
        "label": fm.label,
        "order_m": fm.order_m,
        "n_samples": fm.n_samples,
        "q_grid": fm.q_grid,
        "scale_grid": fm.scale_grid,
        "values": fm.values,
        "defined_mask": fm.defined_mask,
    }


def write_hurst_csv(gh: GeneralizedHurst, path, header_lines=()) -> Path:
    return write_csv(path, ["q", "h", "stderr"], zip(gh.q_grid, gh.h, gh.stderr), header_lines)


def write_spectrum_csv(spec: SingularitySpectrum, path, header_lines=()) -> Path:
    return write_csv(path, ["alpha", "f_alpha"], zip(spec.alpha, spec.f_alpha), header_lines)


def spectrum_dict(gh: GeneralizedHurst, spec: SingularitySpectrum | None) -> dict:
    out = {
        "scaling_range": {"s_min": gh.range.s_min, "s_max": gh.range.s_max},
        "q": gh.q_grid,
        "h": gh.h,
        "h_stderr": gh.stderr,
        "hurst_H": gh.at(2.0) if np.any(np.isclose(gh.q_grid, 2.0)) else None,
    }
    if spec is not None:
        out["spectrum"] = {
            "alpha_min": spec.alpha_min,
            "alpha_0": spec.alpha_0,
            "alpha_max": spec.alpha_max,
            "width": spec.width,
            "delta_alpha_left": spec.delta_left,
            "delta_alpha_right": spec.delta_right,
            "asymmetry": spec.asymmetry,
            "f_alpha_at_q0": spec.f_alpha_0,
            "warnings": list(spec.warnings),
        }
    return out


def write_track_csv(track: RollingHurstTrack, path, header_lines=()) -> Path:
    return write_csv(path, ["time", "H", "stderr"], zip(track.times, track.H, track.stderr), header_lines)


def write_lambda_csv(cs: CrossScaling, path, header_lines=()) -> Path:
    n = cs.q_grid.size
    h_xy = cs.h_xy if cs.h_xy is not None else np.full(n, np.nan)
    d = cs.d_xy if cs.d_xy is not None else np.full(n, np.nan)
    rows = zip(cs.q_grid, cs.lambda_, cs.lambda_stderr, h_xy, d, cs.valid_q)
    return write_csv(path, ["q", "lambda", "stderr", "h_xy", "d_xy", "valid"], rows, header_lines)


def cross_dict(cs: CrossScaling) -> dict:
    return {
        "scaling_range": {"s_min": cs.range.s_min, "s_max": cs.range.s_max},
        "q": cs.q_grid,
        "lambda": cs.lambda_,
        "lambda_stderr": cs.lambda_stderr,
        "h_xy": cs.h_xy,
        "d_xy": cs.d_xy,
        "valid": cs.valid_q,
    }


def write_rho_csv(curve: QDccaCurve, path, header_lines=()) -> Path:
    return write_csv(path, ["s", "rho"], zip(curve.scales, curve.rho), header_lines)


def write_autocorr_csv(curve: AutocorrCurve, path, header_lines=()) -> Path:
    return write_csv(path, ["tau", "c"], zip(curve.lags, curve.c), header_lines)


def write_ccdf_csv(tail: TailDistribution, path, header_lines=()) -> Path:
    return write_csv(path, ["x", "ccdf"], zip(tail.thresholds, tail.cdf_complement), header_lines)


def tail_fit_dict(fit: TailFit) -> dict:
    return {
        "gamma": fit.gamma,
        "stderr": fit.stderr,
        "hill": fit.hill,
        "hill_stderr": fit.hill_stderr,
        "r_squared": fit.r_squared,
        "fit_range": list(fit.fit_range),
        "n_points": fit.n_points,
        "n_exceed": fit.n_exceed,
    }
