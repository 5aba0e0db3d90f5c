"""Command-line entry point: ``levysim <subcommand> [--config PATH] [--seed N] [--out DIR] [--workers N]``.

Configuration files are flat ``key = value`` text (``#`` starts a comment).
Pairs are written ``lo,hi`` and lists as comma-separated numbers. Command-line
flags override the file. Unknown keys, malformed values and out-of-range
values are reported per field and exit with status 2 before any simulation.
"""

from __future__ import annotations

import argparse
import math
import sys

from . import experiments

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ACCEPTANCE = 3


class ConfigError(ValueError):
    pass


def _pair(text):
    parts = [float(t) for t in str(text).split(",")]
    if len(parts) != 2:
        raise ValueError("expected two comma-separated numbers")
    return tuple(parts)


def _floats(text):
    vals = [float(t) for t in str(text).split(",") if t.strip()]
    if not vals:
        raise ValueError("expected at least one number")
    return vals


def _int(text):
    f = float(text)
    if not f.is_integer():
        raise ValueError("expected an integer")
    return int(f)


def _opt_int(text):
    return None if str(text).strip().lower() in ("", "none", "default") else _int(text)


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    return parse


def _positive(v):
    return v > 0


def _nonneg(v):
    return v >= 0


def _interval(v):
    return v[0] < v[1]


def _positive_list(v):
    return all(x > 0 for x in v)


def _at_least(k):
    return lambda v: v >= k


# key -> (parser, default, validator, message)
_COMMON = {
    "seed": (_int, 0, _nonneg, "must be a nonnegative integer"),
    "workers": (_int, 1, _at_least(1), "must be >= 1"),
}

_ADAPTIVE = {
    "n_cells": (_opt_int, None, lambda v: v is None or v >= 1, "must be >= 1 (or 'default')"),
    "rebuild_period": (_int, 4096, _at_least(1), "must be >= 1"),
}

_PATHS = {
    "n_paths": (_int, 100_000, _at_least(1), "must be >= 1"),
    "bins": (_int, 100, _at_least(1), "must be >= 1"),
    "oracle_extent": (float, 40.0, _positive, "must be positive"),
}

DEFAULT_WIDTHS = [0.5, 1, 1.5, 2, 3, 4, 5, 6, 6.5, 7, 7.5, 8, 9, 10, 12, 14, 16, 20]

SCHEMAS = {
    "sweep-width": {
        "n_samples": (_int, 1_000_000, _at_least(100_000), "must be >= 100000"),
        "widths": (_floats, DEFAULT_WIDTHS, _positive_list, "widths must be positive"),
        "omega": (_pair, (-8.0, 8.0), _interval, "needs lo < hi"),
        "burn_in": (_int, 10_000, _nonneg, "must be >= 0"),
    },
    "two-mode": {
        "n_samples": (_int, 100_000, _at_least(2), "must be >= 2"),
        "width": (float, 0.5, _positive, "must be positive"),
        "grid_dt": (float, 1.01, lambda v: v >= 1.0, "must be >= sup of the density (1)"),
        "burn_in": (_int, 10_000, _nonneg, "must be >= 0"),
    },
    "gauss-convergence": {
        "n_samples": (_int, 1_000_000, _at_least(2), "must be >= 2"),
        "width": (float, 7.0, _positive, "must be positive"),
        "omega": (_pair, (-5.0, 5.0), _interval, "needs lo < hi"),
        "bins": (_int, 100, _at_least(1), "must be >= 1"),
        "burn_in": (_int, 10_000, _nonneg, "must be >= 0"),
        **_ADAPTIVE,
    },
    "merton": {
        "width": (float, 4.0, _positive, "must be positive"),
        "lam": (float, 10.0, _positive, "must be positive"),
        "sigma": (float, 1.0, _nonneg, "must be >= 0"),
        "jump_mean": (float, 0.0, math.isfinite, "must be finite"),
        "jump_std": (float, 1.0, _positive, "must be positive"),
        "omega": (_pair, (-8.0, 8.0), _interval, "needs lo < hi"),
        "range": (_pair, (-10.0, 10.0), _interval, "needs lo < hi"),
        "tail_threshold": (float, 8.0, _positive, "must be positive"),
        **_PATHS,
        **_ADAPTIVE,
    },
    "nig": {
        "sigma": (float, 1.0, _positive, "must be positive"),
        "theta": (float, 0.0, math.isfinite, "must be finite"),
        "kappa": (float, 0.5, _positive, "must be positive"),
        "eps": (float, 0.005, _positive, "must be positive"),
        "omega": (_pair, (-25.0, 25.0), _interval, "needs lo < hi"),
        "range": (_pair, (-8.0, 8.0), _interval, "needs lo < hi"),
        "tail_threshold": (float, 4.0, _positive, "must be positive"),
        "lambda_mode": (_choice("fixed", "adaptive"), "fixed", None, ""),
        "sigma_target": (float, 0.067, _positive, "must be positive"),
        **_PATHS,
        **_ADAPTIVE,
    },
    "cgmy": {
        "C": (float, 1.0, _positive, "must be positive"),
        "G": (float, 1.0, _positive, "must be positive"),
        "M": (float, 1.0, _positive, "must be positive"),
        "Y": (float, 0.5, lambda v: 0 < v <= 1,
              "must satisfy 0 < Y <= 1 for the small-jump Brownian approximation"),
        "eps": (float, 0.005, _positive, "must be positive"),
        "omega": (_pair, (-25.0, 25.0), _interval, "needs lo < hi"),
        "range": (_pair, (-6.0, 6.0), _interval, "needs lo < hi"),
        "tail_threshold": (float, 4.0, _positive, "must be positive"),
        "lambda_mode": (_choice("fixed", "adaptive"), "fixed", None, ""),
        "sigma_target": (float, 0.022, _positive, "must be positive"),
        **_PATHS,
        **_ADAPTIVE,
    },
    "selftest": {},
}

RUNNERS = {
    "sweep-width": experiments.run_sweep_width,
    "two-mode": experiments.run_two_mode,
    "gauss-convergence": experiments.run_gauss_convergence,
    "merton": experiments.run_merton,
    "nig": experiments.run_nig,
    "cgmy": experiments.run_cgmy,
}


def read_config_file(path) -> dict:
    """Parse a flat ``key = value`` file into raw strings."""
    raw = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{num}: empty key")
        raw[key] = value
    return raw


def resolve_config(command: str, raw: dict) -> dict:
    """Apply defaults, parse and validate. Raises :class:`ConfigError` naming the field."""
    schema = {**_COMMON, **SCHEMAS[command]}
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown config key(s) for {command}: {', '.join(unknown)}")
    out = {}
    for key, (parse, default, ok, msg) in schema.items():
        if key in raw:
            try:
                value = parse(raw[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{key}: cannot parse {raw[key]!r}: {exc}") from None
        else:
            value = default
        if ok is not None and not ok(value):
            raise ConfigError(f"{key}={value!r}: {msg}")
        out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat key=value config file")
    common.add_argument("--seed", type=int, help="master seed (default 0)")
    common.add_argument("--out", metavar="DIR", default="levysim-out", help="output directory")
    common.add_argument("--workers", type=int, help="worker processes for path simulation (default 1)")
    parser = argparse.ArgumentParser(prog="levysim", description="Markov-chain jump samplers for Lévy processes")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SCHEMAS:
        p = sub.add_parser(name, parents=[common])
        if name == "selftest":
            p.add_argument("--full", action="store_true",
                           help="also run every reproduction experiment at full size")
    return parser


def _selftest(cfg, out_dir, full: bool) -> int:
    from .acceptance import run_selftest

    ok = run_selftest(seed=cfg["seed"], out_dir=out_dir, full=full, stream=sys.stdout)
    return EXIT_OK if ok else EXIT_ACCEPTANCE


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        raw = read_config_file(args.config) if args.config else {}
        if args.seed is not None:
            raw["seed"] = str(args.seed)
        if args.workers is not None:
            raw["workers"] = str(args.workers)
        cfg = resolve_config(args.command, raw)
    except ConfigError as exc:
        print(f"levysim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "selftest":
        return _selftest(cfg, args.out, args.full)
    report = RUNNERS[args.command](cfg, args.out)
    print(f"[{report.name}] CSV written to {args.out}")
    print(report.summary())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
