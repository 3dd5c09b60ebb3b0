"""Config-driven analysis pipelines behind the command-line interface.

Configuration is an INI file::

    [analysis]
    delta_t = 10s
    q_min = -4
    q_max = 4
    q_step = 0.2
    poly_order = 2
    output = out

    [input:btc_eur]
    path = btc_eur.csv
    kind = ticks            ; ticks | returns | auto
    exclusions = maintenance.csv

Command-line overrides take precedence over the file, which takes
precedence over the defaults of ``PipelineConfig``.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import re
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from . import export as ex
from .cross import d_xy, lambda_exponent, rho_curves
from .errors import ConfigError, DataError, MfccaError
from .fluctuation import default_scale_grid, fluctuation_cross, fluctuation_single, q_grid
from .series import (
    NS_PER_DAY,
    ReturnSeries,
    align_pair,
    deseasonalize_daily,
    load_exclusions_csv,
    load_returns_csv,
    load_ticks_csv,
    normalize_unit_variance,
    remove_exclusions,
    to_log_returns,
)
from .spectrum import RangePolicy, ScalingRange, generalized_hurst, legendre_transform, rolling_hurst, select_scaling_range
from .stylized import cumulative_tail, fit_decay_exponent, fit_tail_exponent, volatility_autocorrelation

_UNITS = {"ns": 1, "us": 10**3, "ms": 10**6, "s": 10**9, "m": 60 * 10**9, "min": 60 * 10**9,
          "h": 3600 * 10**9, "d": 86400 * 10**9}


def parse_interval(text) -> int:
    """``"10s"``, ``"500ms"``, ``"1h"`` or a bare number of seconds, to nanoseconds."""
    if isinstance(text, (int, np.integer)):
        return int(text) * 10**9
    m = re.fullmatch(r"\s*([0-9]*\.?[0-9]+)\s*([a-z]*)\s*", str(text))
    if not m or m.group(2) not in ("", *_UNITS):
        raise ConfigError(f"cannot parse interval {text!r}")
    ns = float(m.group(1)) * _UNITS.get(m.group(2) or "s")
    if ns <= 0 or ns != int(ns):
        raise ConfigError(f"interval {text!r} must be a positive whole number of nanoseconds")
    return int(ns)


@dataclass(frozen=True)
class InputSpec:
    label: str
    path: str
    kind: str = "auto"
    exclusions: str | None = None
    timestamp_format: str = "auto"


@dataclass(frozen=True)
class PipelineConfig:
    inputs: tuple = ()
    delta_t: int = 10 * 10**9
    q_min: float = -4.0
    q_max: float = 4.0
    q_step: float = 0.2
    poly_order: int = 2
    scale_min: int = 10
    scale_max: int | None = None
    scales_per_decade: int = 24
    fit_s_min: int | None = None
    fit_s_max: int | None = None
    cutoff: int | None = None
    rho_q: tuple = (1.0, 4.0)
    window: int = 259_200
    step: int | None = None
    max_lag: int | None = None
    decay_lo: int = 10
    decay_hi: int = 1000
    tail_q_lo: float | None = None
    tail_q_hi: float | None = None
    deseasonalize: str = "auto"
    deseason_method: str = "std"
    output: str = "mfcca-out"
    jobs: int = 1

    def validate(self) -> "PipelineConfig":
        if not self.q_step > 0:
            raise ConfigError(f"q_step must be positive, got {self.q_step}")
        if not self.q_min < self.q_max:
            raise ConfigError(f"q_min ({self.q_min}) must be below q_max ({self.q_max})")
        if self.poly_order < 0:
            raise ConfigError("poly_order must be non-negative")
        if self.delta_t <= 0:
            raise ConfigError("delta_t must be positive")
        if self.deseasonalize not in ("auto", "true", "false"):
            raise ConfigError("deseasonalize must be auto, true or false")
        if self.deseason_method not in ("std", "abs_std", "mean_abs"):
            raise ConfigError("deseason_method must be std, abs_std or mean_abs")
        if any(q <= 0 for q in self.rho_q):
            raise ConfigError("rho_q values must be positive")
        for spec in self.inputs:
            if spec.kind not in ("auto", "ticks", "returns"):
                raise ConfigError(f"input {spec.label}: kind must be ticks, returns or auto")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        return self

    @property
    def q_values(self) -> np.ndarray:
        return q_grid(self.q_min, self.q_max, self.q_step)

    @property
    def range_policy(self) -> RangePolicy:
        return RangePolicy(s_min=self.fit_s_min, s_max=self.fit_s_max, cutoff=self.cutoff)

    def digest(self) -> str:
        d = asdict(self)
        d.pop("output")
        d.pop("jobs")
        return hashlib.sha256(json.dumps(ex.jsonable(d), sort_keys=True).encode()).hexdigest()


_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def _coerce(key: str, value):
    if key not in _FIELD_TYPES or key == "inputs":
        raise ConfigError(f"unknown configuration key {key!r}")
    if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none")):
        if "None" in _FIELD_TYPES[key]:
            return None
        raise ConfigError(f"{key} cannot be empty")
    try:
        if key == "delta_t":
            return parse_interval(value)
        if key == "rho_q":
            if isinstance(value, str):
                value = [v for v in re.split(r"[,\s]+", value) if v]
            return tuple(float(v) for v in value)
        t = _FIELD_TYPES[key]
        if t.startswith("int"):
            return int(value)
        if t.startswith("float"):
            return float(value)
        v = str(value).strip()
        return v.lower() if key == "deseasonalize" else v
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None


def load_config(path=None, overrides: dict | None = None, inputs=None) -> PipelineConfig:
    """Merge defaults, the INI file at ``path`` and ``overrides`` (highest precedence)."""
    values = {}
    specs = []
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        try:
            cp.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        base = path.parent
        for section in cp.sections():
            if section == "analysis":
                for k, v in cp.items(section):
                    values[k] = _coerce(k, v)
            elif section.startswith("input:"):
                sec = cp[section]
                if "path" not in sec:
                    raise ConfigError(f"[{section}] needs a path")
                excl = sec.get("exclusions")
                specs.append(InputSpec(
                    label=section.split(":", 1)[1].strip(),
                    path=str(base / sec["path"]),
                    kind=sec.get("kind", "auto"),
                    exclusions=str(base / excl) if excl else None,
                    timestamp_format=sec.get("timestamp_format", "auto"),
                ))
            else:
                raise ConfigError(f"unknown config section [{section}]")
    for k, v in (overrides or {}).items():
        values[k] = _coerce(k, v)
    if inputs:
        specs = list(inputs)
    return PipelineConfig(inputs=tuple(specs), **values).validate()


# ---------------------------------------------------------------------------

@contextmanager
def stage(label: str, name: str):
    """Prefix package errors with the input label and pipeline stage."""
    try:
        yield
    except MfccaError as exc:
        raise type(exc)(f"[{label}] {name}: {exc}") from exc
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        from .errors import NumericalError
        raise NumericalError(f"[{label}] {name}: {exc}") from exc


def _detect_kind(path: Path) -> str:
    with open(path) as fh:
        for line in fh:
            if line.strip() and not line.lstrip().startswith("#"):
                return "returns" if "value" in line.lower() else "ticks"
    return "ticks"


def load_input(spec: InputSpec, cfg: PipelineConfig) -> ReturnSeries:
    path = Path(spec.path)
    with stage(spec.label, "load"):
        if not path.exists():
            raise DataError(f"input file not found: {path}")
        kind = _detect_kind(path) if spec.kind == "auto" else spec.kind
        if kind == "returns":
            series = load_returns_csv(path, label=spec.label)
        else:
            ticks = load_ticks_csv(path, spec.timestamp_format, label=spec.label)
            series = to_log_returns(ticks, cfg.delta_t, label=spec.label)
    if spec.exclusions:
        with stage(spec.label, "exclusions"):
            series = remove_exclusions(series, load_exclusions_csv(spec.exclusions, spec.timestamp_format))
    return series


def _want_deseason(series: ReturnSeries, cfg: PipelineConfig) -> bool:
    if cfg.deseasonalize == "false":
        return False
    if cfg.deseasonalize == "true":
        return True
    span = int(series.timestamps[-1] - series.timestamps[0]) + series.delta_t
    return span >= 2 * NS_PER_DAY and NS_PER_DAY % series.delta_t == 0


class Run:
    """Output directory plus the provenance header shared by every file."""

    def __init__(self, cfg: PipelineConfig, command: str):
        self.cfg = cfg
        self.command = command
        self.out = Path(cfg.output)
        self.out.mkdir(parents=True, exist_ok=True)
        self.header = [f"mfcca {__version__} {command}", f"config_sha256 {cfg.digest()}"]
        self.files: list[str] = []

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.out / name

    def summary(self, body: dict) -> Path:
        doc = {"tool": "mfcca", "version": __version__, "command": self.command,
               "config_sha256": self.cfg.digest(), "files": sorted(self.files), **body}
        return ex.write_json(self.out / f"{self.command}.summary.json", doc)


def _map(cfg: PipelineConfig, fn, items):
    items = list(items)
    if cfg.jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(cfg.jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def _scales(n: int, cfg: PipelineConfig) -> np.ndarray:
    return default_scale_grid(n, cfg.scale_min, cfg.scale_max, cfg.scales_per_decade, cfg.poly_order)


def _require_inputs(cfg: PipelineConfig, n: int | None = None, at_least: int = 1):
    if n is not None and len(cfg.inputs) != n:
        raise ConfigError(f"this command needs exactly {n} inputs, got {len(cfg.inputs)}")
    if len(cfg.inputs) < at_least:
        raise ConfigError("no inputs configured")


def _mfdfa_one(cfg: PipelineConfig, series: ReturnSeries):
    label = series.label
    with stage(label, "fluctuation"):
        fm = fluctuation_single(series, cfg.q_values, _scales(len(series), cfg), cfg.poly_order)
    with stage(label, "scaling"):
        gh = generalized_hurst(fm, select_scaling_range(fm, cfg.range_policy))
    spec = None
    try:
        with stage(label, "spectrum"):
            spec = legendre_transform(gh)
    except DataError:
        pass
    return fm, gh, spec


def run_mfdfa(cfg: PipelineConfig) -> dict:
    _require_inputs(cfg)
    run = Run(cfg, "mfdfa")
    series = _map(cfg, lambda s: load_input(s, cfg), cfg.inputs)
    results = _map(cfg, lambda s: _mfdfa_one(cfg, s), series)
    body = {}
    for s, (fm, gh, spec) in zip(series, results):
        ex.write_fluctuation_csv(fm, run.path(f"{s.label}.fluct.csv"), run.header)
        ex.write_json(run.path(f"{s.label}.fluct.json"), ex.fluctuation_dict(fm))
        ex.write_hurst_csv(gh, run.path(f"{s.label}.hurst.csv"), run.header)
        if spec is not None:
            ex.write_spectrum_csv(spec, run.path(f"{s.label}.spectrum.csv"), run.header)
        body[s.label] = {"n_samples": len(s), **ex.spectrum_dict(gh, spec)}
    run.summary({"inputs": body})
    return body


def _load_pair(cfg: PipelineConfig):
    _require_inputs(cfg, n=2)
    a, b = (load_input(s, cfg) for s in cfg.inputs)
    with stage(f"{a.label}~{b.label}", "align"):
        return align_pair(a, b)


def _pair_name(pair) -> str:
    return f"{pair.x.label}~{pair.y.label}"


def _write_rho(run: Run, name: str, curves) -> dict:
    out = {}
    for c in curves:
        ex.write_rho_csv(c, run.path(f"{name}.rho_q{ex.fmt(c.q)}.csv"), run.header)
        out[ex.fmt(c.q)] = {"scales": c.scales, "rho": c.rho}
    return out


def run_mfcca(cfg: PipelineConfig) -> dict:
    run = Run(cfg, "mfcca")
    pair = _load_pair(cfg)
    name = _pair_name(pair)
    scales = _scales(len(pair), cfg)
    with stage(name, "fluctuation"):
        qs = cfg.q_values
        fx = fluctuation_single(pair.x, qs, scales, cfg.poly_order)
        fy = fluctuation_single(pair.y, qs, scales, cfg.poly_order)
        fc = fluctuation_cross(pair, qs, scales, cfg.poly_order)
    with stage(name, "scaling"):
        rx = select_scaling_range(fx, cfg.range_policy)
        ry = select_scaling_range(fy, cfg.range_policy)
        common = ScalingRange(max(rx.s_min, ry.s_min), min(rx.s_max, ry.s_max))
        gx, gy = generalized_hurst(fx, common), generalized_hurst(fy, common)
        cs = d_xy(gx, gy, lambda_exponent(fc, common))
    with stage(name, "rho"):
        curves = rho_curves(pair, cfg.rho_q, scales, cfg.poly_order)
    ex.write_fluctuation_csv(fc, run.path(f"{name}.cross_fluct.csv"), run.header)
    ex.write_json(run.path(f"{name}.cross_fluct.json"), ex.fluctuation_dict(fc))
    ex.write_lambda_csv(cs, run.path(f"{name}.lambda.csv"), run.header)
    body = {"pair": name, "n_samples": len(pair), "cross": ex.cross_dict(cs),
            "rho": _write_rho(run, name, curves)}
    run.summary(body)
    return body


def run_rho(cfg: PipelineConfig) -> dict:
    run = Run(cfg, "rho")
    pair = _load_pair(cfg)
    name = _pair_name(pair)
    with stage(name, "rho"):
        curves = rho_curves(pair, cfg.rho_q, _scales(len(pair), cfg), cfg.poly_order)
    body = {"pair": name, "n_samples": len(pair), "rho": _write_rho(run, name, curves)}
    run.summary(body)
    return body


def run_hurst_roll(cfg: PipelineConfig) -> dict:
    _require_inputs(cfg)
    run = Run(cfg, "hurst-roll")
    series = _map(cfg, lambda s: load_input(s, cfg), cfg.inputs)

    def one(s):
        with stage(s.label, "rolling-hurst"):
            scales = _scales(min(cfg.window, len(s)), cfg)
            return rolling_hurst(s, cfg.window, cfg.step, cfg.range_policy, scales, cfg.poly_order)

    body = {}
    for s, track in zip(series, _map(cfg, one, series)):
        ex.write_track_csv(track, run.path(f"{s.label}.hurst_roll.csv"), run.header)
        body[s.label] = {"window_points": track.window_points, "step_points": track.step_points,
                         "n_windows": int(track.H.size), "mean_H": float(np.mean(track.H))}
    run.summary({"inputs": body})
    return body


def _stylized_one(cfg: PipelineConfig, s: ReturnSeries):
    info = {"n_samples": len(s)}
    with stage(s.label, "normalize"):
        normed = normalize_unit_variance(s)
    with stage(s.label, "deseasonalize"):
        des = deseasonalize_daily(s, cfg.deseason_method) if _want_deseason(s, cfg) else s
        info["deseasonalized"] = des is not s
    with stage(s.label, "autocorrelation"):
        max_lag = cfg.max_lag or min(10 * cfg.decay_hi, (len(s) - 1) // 4)
        ac = volatility_autocorrelation(des, max_lag, normalized=True)
        lo, hi = cfg.decay_lo, min(cfg.decay_hi, max_lag)
        gamma, se = fit_decay_exponent(ac, (lo, hi))
        positive = ac.lags[(ac.c > 0) & (ac.lags >= lo) & (ac.lags <= hi)]
        info["autocorrelation"] = {"decay_gamma": gamma, "stderr": se, "fit_range": [lo, hi],
                                   "max_lag": max_lag, "largest_positive_lag_in_fit": positive.max()}
    with stage(s.label, "tail"):
        tail = cumulative_tail(normed)
        q = (cfg.tail_q_lo, cfg.tail_q_hi)
        fit = fit_tail_exponent(tail, quantiles=q if None not in q else None)
        info["tail"] = ex.tail_fit_dict(fit)
    return ac, tail, info


def run_stylized(cfg: PipelineConfig) -> dict:
    _require_inputs(cfg)
    run = Run(cfg, "stylized")
    series = _map(cfg, lambda s: load_input(s, cfg), cfg.inputs)
    body = {}
    for s, (ac, tail, info) in zip(series, _map(cfg, lambda s: _stylized_one(cfg, s), series)):
        ex.write_autocorr_csv(ac, run.path(f"{s.label}.autocorr.csv"), run.header)
        ex.write_ccdf_csv(tail, run.path(f"{s.label}.ccdf.csv"), run.header)
        body[s.label] = info
    run.summary({"inputs": body})
    return body


COMMANDS = {"mfdfa": run_mfdfa, "mfcca": run_mfcca, "rho": run_rho, "hurst-roll": run_hurst_roll,
            "stylized": run_stylized}


def with_overrides(cfg: PipelineConfig, **kw) -> PipelineConfig:
    return replace(cfg, **{k: _coerce(k, v) for k, v in kw.items()}).validate()
