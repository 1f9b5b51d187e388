"""Command-line driver.

Subcommands ``calibrate``, ``pd-curve``, ``cfar-check`` and ``verify``.
Experiment settings come from a JSON config file (schema below); a few
flags override individual fields.

Config schema (version 1)::

    {
      "schema_version": 1,
      "scenario_id": "desk-k19",
      "dims": {"N": 8, "K": 19, "M": 3, "r": 2, "t": 4},
      "pfa_target": 0.01,
      "cal_trials": 100000,
      "pd_trials": 5000,
      "sinr_grid_db": [6, 8, 10],
      "seed": 1,
      "cnr_db": 30.0,
      "corr": 0.95,
      "sigma_n2": 1.0,
      "detectors": ["glr", "rao", "wald", "gradient", "durbin", "2s-glr", "lh"],
      "threads": 1,
      "out": null,
      "cfar_variants": [{"r_scale": 1.0, "bt_scale": 1.0, "bt_draw": 0}, ...]
    }

Only ``schema_version`` and ``dims`` are required. Unknown keys are
rejected. Exit codes: 0 ok, 1 verification failure, 2 config error,
3 numerical error.
"""
from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass

from . import montecarlo as mc
from .detectors import DETECTORS
from .errors import ConfigError, NumericalError
from .model import ProblemDims
from .verification import run_verification

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

CSV_HEADER = ("scenario_id", "detector", "rho_db", "pd", "pd_stderr", "trials",
              "threshold", "pfa_target", "seed")
THRESHOLD_HEADER = ("scenario_id", "detector", "threshold", "trials", "discarded",
                    "pfa_target", "seed")
CFAR_HEADER = ("scenario_id", "variant", "detector", "pfa", "pfa_stderr", "trials",
               "threshold", "pfa_target", "seed", "status")

DEFAULT_CFAR_VARIANTS = (
    {"r_scale": 1.0, "bt_scale": 1.0, "bt_draw": 0},
    {"r_scale": 10.0, "bt_scale": 1.0, "bt_draw": 1},
    {"r_scale": 1.0, "bt_scale": 0.0, "bt_draw": 0},
    {"r_scale": 1.0, "bt_scale": 100.0, "bt_draw": 0},
)


@dataclass(frozen=True)
class RunConfig:
    dims: ProblemDims
    scenario_id: str = "scenario"
    pfa_target: float = 1e-2
    cal_trials: int = 100_000
    pd_trials: int = 5_000
    sinr_grid_db: tuple = ()
    seed: int = 0
    cnr_db: float = 30.0
    corr: float = 0.95
    sigma_n2: float = 1.0
    detectors: tuple = DETECTORS
    threads: int = 1
    out: str | None = None
    cfar_variants: tuple = DEFAULT_CFAR_VARIANTS

    def mc_config(self) -> mc.McConfig:
        return mc.McConfig(
            dims=self.dims, pfa_target=self.pfa_target, cal_trials=self.cal_trials,
            pd_trials=self.pd_trials, sinr_grid_db=self.sinr_grid_db, seed=self.seed,
            cnr_db=self.cnr_db, corr=self.corr, sigma_n2=self.sigma_n2,
            detectors=self.detectors)

    @property
    def workers(self):
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)

    def to_dict(self):
        d = {"schema_version": SCHEMA_VERSION}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if f.name == "dims":
                v = dict(zip("NKMrt", v.as_tuple()))
            elif isinstance(v, tuple):
                v = [dict(x) if isinstance(x, dict) else x for x in v]
            d[f.name] = v
        return d

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_VARIANT_KEYS = {"r_scale": float, "bt_scale": float, "bt_draw": int}


def _expect(value, kinds, name):
    if isinstance(value, bool) or not isinstance(value, kinds):
        raise ConfigError(f"{name}: expected {getattr(kinds, '__name__', kinds)}, got {value!r}")
    return value


def _number(value, name):
    return float(_expect(value, (int, float), name))


def _integer(value, name):
    return _expect(value, int, name)


def _parse_variant(v, i):
    if not isinstance(v, dict):
        raise ConfigError(f"cfar_variants[{i}] must be an object")
    unknown = set(v) - set(_VARIANT_KEYS)
    if unknown:
        raise ConfigError(f"cfar_variants[{i}]: unknown keys {sorted(unknown)}")
    out = {"r_scale": 1.0, "bt_scale": 1.0, "bt_draw": 0}
    for k, val in v.items():
        out[k] = (_integer if _VARIANT_KEYS[k] is int else _number)(val, f"cfar_variants[{i}].{k}")
    if not out["r_scale"] > 0:
        raise ConfigError(f"cfar_variants[{i}].r_scale must be positive")
    return out


def config_from_dict(d) -> RunConfig:
    """Validate a decoded JSON object and build a :class:`RunConfig`."""
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {d.get('schema_version')!r}")
    unknown = set(d) - set(_FIELDS) - {"schema_version"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "dims" not in d:
        raise ConfigError("missing required key 'dims'")
    dims = d["dims"]
    if not isinstance(dims, dict) or set(dims) - set("NKMrt") or not set("NKMr") <= set(dims):
        raise ConfigError("dims must be an object with keys N, K, M, r and optional t")
    kw = {}
    try:
        kw["dims"] = ProblemDims(**{k: _integer(v, f"dims.{k}") for k, v in dims.items()})
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for key, val in d.items():
        if key in ("schema_version", "dims"):
            continue
        if key == "scenario_id":
            kw[key] = _expect(val, str, key)
            if "," in val or "\n" in val:
                raise ConfigError("scenario_id must not contain commas or newlines")
        elif key in ("pfa_target", "cnr_db", "corr", "sigma_n2"):
            kw[key] = _number(val, key)
        elif key in ("cal_trials", "pd_trials", "seed", "threads"):
            kw[key] = _integer(val, key)
        elif key == "sinr_grid_db":
            kw[key] = tuple(_number(x, key) for x in _expect(val, list, key))
        elif key == "detectors":
            kw[key] = tuple(_expect(x, str, key) for x in _expect(val, list, key))
        elif key == "out":
            kw[key] = None if val is None else _expect(val, str, key)
        elif key == "cfar_variants":
            kw[key] = tuple(_parse_variant(v, i) for i, v in enumerate(_expect(val, list, key)))
    cfg = RunConfig(**kw)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig):
    if cfg.seed < 0 or cfg.seed >= 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if cfg.threads < 0:
        raise ConfigError("threads must be >= 0")
    if len(set(cfg.detectors)) != len(cfg.detectors):
        raise ConfigError("detectors contains duplicates")
    if not cfg.detectors:
        raise ConfigError("detectors must not be empty")
    if any(not math.isfinite(x) for x in cfg.sinr_grid_db):
        raise ConfigError("sinr_grid_db values must be finite")
    try:
        cfg.mc_config().covariance()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def loads(text) -> RunConfig:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(d)


def load(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from exc
    return loads(text)


# --- CSV ---------------------------------------------------------------------

def fmt(x):
    """CSV cell: integers verbatim, reals with 10 significant digits."""
    if isinstance(x, (bool, str)):
        return str(x)
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".10g")


def csv_text(header, rows):
    buf = io.StringIO(newline="")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def pd_curve_rows(cfg: RunConfig, curve: mc.PdCurve):
    th = curve.thresholds.thresholds
    return [(cfg.scenario_id, r.detector, r.rho_db, r.pd, r.stderr, r.trials, th[r.detector],
             cfg.pfa_target, cfg.seed) for r in curve.rows]


def threshold_rows(cfg: RunConfig, table: mc.ThresholdTable):
    return [(cfg.scenario_id, d, table.thresholds[d], table.trials, table.discarded,
             table.pfa_target, table.seed) for d in cfg.detectors]


def gnuplot_script(cfg: RunConfig, csv_path):
    """Gnuplot commands that draw P_d versus SINR from a pd-curve CSV."""
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead bottom right",
        "set xlabel 'SINR [dB]'",
        "set ylabel 'P_d'",
        "set yrange [0:1]",
        "set grid",
        f"set title '{cfg.scenario_id} {cfg.dims} P_{{fa}}={cfg.pfa_target:g}'",
    ]
    plots = [f"'{csv_path}' using ($2 eq '{d}' ? $3 : 1/0):4 with linespoints title '{d}'"
             for d in cfg.detectors]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def _write(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# --- commands ---------------------------------------------------------------------

def _variants(cfg: RunConfig):
    m = cfg.mc_config()
    R = m.covariance()
    return [(v["r_scale"] * R, v["bt_scale"] * mc.nuisance_interference(m, v["bt_draw"]))
            for v in cfg.cfar_variants]


def cmd_calibrate(cfg: RunConfig, args):
    table = mc.calibrate(cfg.mc_config(), workers=cfg.workers)
    _write(csv_text(THRESHOLD_HEADER, threshold_rows(cfg, table)), cfg.out)
    return EXIT_OK


def cmd_pd_curve(cfg: RunConfig, args):
    if not cfg.sinr_grid_db:
        _write(csv_text(CSV_HEADER, []), cfg.out)
    else:
        curve = mc.pd_vs_sinr(cfg.mc_config(), workers=cfg.workers)
        _write(csv_text(CSV_HEADER, pd_curve_rows(cfg, curve)), cfg.out)
        for a, b in curve.monotonicity_violations():
            print(f"note: {a.detector} P_d drops from {a.pd:.4f} at {a.rho_db:g} dB to "
                  f"{b.pd:.4f} at {b.rho_db:g} dB", file=sys.stderr)
    if args.gnuplot:
        _write(gnuplot_script(cfg, cfg.out or "pd_curve.csv"), args.gnuplot)
    return EXIT_OK


def cmd_cfar_check(cfg: RunConfig, args):
    if len(cfg.cfar_variants) < 2:
        raise ConfigError("cfar-check needs at least two cfar_variants")
    report = mc.cfar_check(cfg.mc_config(), _variants(cfg), workers=cfg.workers)
    rows = [(cfg.scenario_id, r.variant, r.detector, r.pfa, r.stderr, r.trials, r.threshold,
             r.pfa_target, cfg.seed, "PASS" if r.passed else "FAIL") for r in report.rows]
    _write(csv_text(CFAR_HEADER, rows), cfg.out)
    status = "PASS" if report.invariance_gap <= report.invariance_tol else "FAIL"
    print(f"deterministic invariance gap {report.invariance_gap:.3e} "
          f"(tol {report.invariance_tol:.0e}) {status}", file=sys.stderr)
    print("cfar-check " + ("PASS" if report.passed else "FAIL"), file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_verify(args):
    report = run_verification(args.dims_filter, instances=args.instances,
                              seed=args.seed or 0, perturb=args.perturb)
    text = report.format() + "\n"
    _write(text, args.out)
    return EXIT_OK if report.passed else EXIT_VERIFY


# --- argument parsing ---------------------------------------------------------------

def _seed(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _threads(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("threads must be >= 0")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="igmanova",
                                description="Adaptive detection under the I-GMANOVA model.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_config=True):
        if need_config:
            sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--out", help="output path (default: config 'out' or stdout)")
        sp.add_argument("--seed", type=_seed, help="override the config seed")

    for name, helptext in (("calibrate", "write a threshold table"),
                           ("pd-curve", "write P_d versus SINR rows"),
                           ("cfar-check", "empirical and deterministic CFAR check")):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("--threads", type=_threads, help="worker threads (0 = auto)")
        sp.add_argument("--detectors", help="comma-separated detector ids")
        if name == "pd-curve":
            sp.add_argument("--gnuplot", metavar="PATH", help="also write a gnuplot script")

    sp = sub.add_parser("verify", help="run the numerical property suite")
    common(sp, need_config=False)
    sp.add_argument("--dims-filter", help="restrict dims, e.g. 'M=1' or 'M=1,t=0'")
    sp.add_argument("--instances", type=int, default=40,
                    help="random instances per dims (default 40)")
    sp.add_argument("--perturb", help=argparse.SUPPRESS)
    return p


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["out"] = args.out
    if getattr(args, "threads", None) is not None:
        changes["threads"] = args.threads
    if getattr(args, "detectors", None):
        changes["detectors"] = tuple(s.strip() for s in args.detectors.split(",") if s.strip())
    if not changes:
        return cfg
    cfg = dataclasses.replace(cfg, **changes)
    validate(cfg)
    return cfg


_COMMANDS = {"calibrate": cmd_calibrate, "pd-curve": cmd_pd_curve, "cfar-check": cmd_cfar_check}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.command == "verify":
            return cmd_verify(args)
        cfg = _apply_overrides(load(args.config), args)
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = _warn_to_stderr
            return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def _warn_to_stderr(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
