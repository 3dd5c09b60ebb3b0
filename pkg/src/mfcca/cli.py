"""Command-line driver: ``mfcca {mfdfa,mfcca,rho,hurst-roll,stylized,synth}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from . import export as ex
from .errors import ConfigError, MfccaError
from .pipeline import COMMANDS, InputSpec, load_config, parse_interval
from .synthetic import (
    CascadeSpec,
    FgnSpec,
    generate_binomial_cascade,
    generate_fgn,
    generate_pareto_tail,
    generate_volatility_clusters,
)

SCHEMAS = """\
output files (all CSV files start with '#' provenance lines: tool version,
command and config_sha256; floats use 17 significant digits, nan marks
undefined values):

  mfdfa       <label>.fluct.csv       s,<q_1>,<q_2>,...   one row per scale, F(q,s)
              <label>.fluct.json      q_grid, scale_grid, values, defined_mask
              <label>.hurst.csv       q,h,stderr
              <label>.spectrum.csv    alpha,f_alpha
  mfcca       <x>~<y>.cross_fluct.csv s,<q_1>,<q_2>,...   signed F_XY(q,s)
              <x>~<y>.cross_fluct.json  as above, defined_mask false where F_XY <= 0
              <x>~<y>.lambda.csv      q,lambda,stderr,h_xy,d_xy,valid
              <x>~<y>.rho_q<q>.csv    s,rho
  rho         <x>~<y>.rho_q<q>.csv    s,rho
  hurst-roll  <label>.hurst_roll.csv  time,H,stderr      (time = last timestamp of window, ns)
  stylized    <label>.autocorr.csv    tau,c
              <label>.ccdf.csv        x,ccdf
  synth       <file>                  timestamp,value
  every run   <command>.summary.json  fitted exponents, ranges, A_alpha, widths

input files:
  ticks       timestamp,price         timestamp = epoch nanoseconds or ISO-8601 UTC
  returns     timestamp,value         (format written by 'synth')
  exclusions  start,end,reason

exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical failure
"""


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("-c", "--config", help="INI configuration file")
    p.add_argument("-i", "--input", action="append", default=[], metavar="LABEL=PATH",
                   help="input series (replaces the config inputs); repeatable")
    p.add_argument("--kind", choices=["auto", "ticks", "returns"], default=None,
                   help="file kind for --input series")
    p.add_argument("--exclusions", action="append", default=[], metavar="LABEL=PATH",
                   help="exclusion-window CSV for an --input label")
    p.add_argument("-o", "--output", help="output directory")
    p.add_argument("--delta-t", dest="delta_t", help="sampling interval, e.g. 10s")
    p.add_argument("--q-min", dest="q_min")
    p.add_argument("--q-max", dest="q_max")
    p.add_argument("--q-step", dest="q_step")
    p.add_argument("--order", dest="poly_order", help="detrending polynomial order")
    p.add_argument("--window", help="rolling window length in samples")
    p.add_argument("--step", help="rolling window step in samples")
    p.add_argument("--rho-q", dest="rho_q", help="comma-separated q values for rho_q")
    p.add_argument("--jobs", help="inputs processed concurrently")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any [analysis] key")


def _pairs(items, what):
    out = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"{what} expects LABEL=PATH, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _config_from_args(args):
    overrides = {}
    for key in ("output", "delta_t", "q_min", "q_max", "q_step", "poly_order", "window", "step", "rho_q", "jobs"):
        v = getattr(args, key)
        if v is not None:
            overrides[key] = v
    overrides.update(_pairs(args.set, "--set"))
    inputs = None
    if args.input:
        excl = _pairs(args.exclusions, "--exclusions")
        inputs = [InputSpec(label, path, kind=args.kind or "auto", exclusions=excl.get(label))
                  for label, path in _pairs(args.input, "--input").items()]
    return load_config(args.config, overrides, inputs)


def _synth(args) -> Path:
    dt = parse_interval(args.delta_t or "10s")
    if args.generator == "fgn":
        spec = FgnSpec(args.hurst, args.length, args.seed)
        series, desc = generate_fgn(spec, dt), f"fgn hurst_H={args.hurst} length={args.length} seed={args.seed}"
    elif args.generator == "cascade":
        spec = CascadeSpec(args.p, args.levels, args.seed, args.variant)
        series = generate_binomial_cascade(spec, dt)
        desc = f"binomial_cascade p={args.p} num_levels={args.levels} variant={args.variant} seed={args.seed}"
    elif args.generator == "pareto":
        args.gamma = 3.0 if args.gamma is None else args.gamma
        series = generate_pareto_tail(args.gamma, args.length, args.seed, dt)
        desc = f"pareto gamma={args.gamma} length={args.length} seed={args.seed}"
    else:
        args.gamma = 0.2 if args.gamma is None else args.gamma
        series = generate_volatility_clusters(args.gamma, args.length, args.seed, dt)
        desc = f"volatility_clusters decay_gamma={args.gamma} length={args.length} seed={args.seed}"
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    header = [f"mfcca {__version__} synth", f"spec {desc} delta_t_ns={dt}"]
    return ex.write_series_csv(series, out, header)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mfcca", description=__doc__, epilog=SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"mfcca {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "mfdfa": "F(q,s), h(q) and f(alpha) for each input",
        "mfcca": "cross fluctuation functions, lambda(q), d_xy(q) and rho_q(s) for a pair",
        "rho": "rho_q(s) curves for a pair",
        "hurst-roll": "Hurst exponent H = h(2) over rolling windows",
        "stylized": "volatility autocorrelation decay and tail exponent",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text, epilog=SCHEMAS,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        _add_common(p)
    p = sub.add_parser("synth", help="write a synthetic fixture as timestamp,value CSV", epilog=SCHEMAS,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("generator", choices=["fgn", "cascade", "pareto", "volclust"])
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--length", type=int, default=2**17)
    p.add_argument("--hurst", type=float, default=0.5, help="fgn Hurst exponent")
    p.add_argument("--p", type=float, default=0.3, help="cascade weight")
    p.add_argument("--levels", type=int, default=16, help="cascade levels")
    p.add_argument("--variant", choices=["none", "sign", "shuffle"], default="none")
    p.add_argument("--gamma", type=float, default=None,
                   help="pareto tail exponent (default 3) / volclust decay exponent (default 0.2)")
    p.add_argument("--delta-t", dest="delta_t", default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "synth":
            path = _synth(args)
            print(path)
            return 0
        cfg = _config_from_args(args)
        COMMANDS[args.command](cfg)
        print(cfg.output)
        return 0
    except MfccaError as exc:
        print(f"mfcca {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
