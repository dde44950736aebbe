"""``fmmd`` command line: run an experiment and write its CSV.

Exit codes: 0 success, 2 usage error, 3 data error, 4 flagged validation case.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import DataError, FmmdError, InvalidArgument
from .experiments import EXPERIMENTS, ExperimentConfig, run, write_rows

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_FLAGGED = 0, 2, 3, 4

# config-file key -> (argparse dest, converter)
_CONFIG_KEYS = {
    "seed": int, "alpha": float, "trials": int, "perms": int, "n": None, "mesh": None,
    "kernel": None, "out": str, "paper_scale": bool, "deltas": None, "data": None,
}


def _int_list(text):
    try:
        return tuple(int(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    try:
        return tuple(float(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _str_list(text):
    return tuple(v.strip().upper() for v in str(text).split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fmmd", description="Kernel two-sample tests for functional data.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--alpha", type=float, help="test level (default 0.05)")
    p.add_argument("--trials", type=int, help="Monte-Carlo trials per cell (default 100)")
    p.add_argument("--perms", type=int, help="permutations per test (default 200)")
    p.add_argument("--n", type=_int_list, help="sample size(s), comma separated; M grid for size/growth")
    p.add_argument("--mesh", type=_int_list, help="mesh size(s), comma separated")
    p.add_argument("--kernel", type=_str_list, help="subset of ID,CEXP,COV,SQR,FPCA")
    p.add_argument("--deltas", type=_float_list, help="deviation grid (lengthscales for scaling)")
    p.add_argument("--data", action="append", help="FunctionSet CSV; give twice for growth")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.add_argument("--paper-scale", action="store_true", default=None,
                   help="500 trials and 1000 permutations")
    p.add_argument("--config", help="flat JSON object mirroring the flags; flags win")
    return p


def _load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise InvalidArgument(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidArgument(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise InvalidArgument("config must be a JSON object")
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    unknown = sorted(set(cfg) - set(_CONFIG_KEYS))
    if unknown:
        raise InvalidArgument(f"unknown config keys: {', '.join(unknown)}")
    parsers = {"n": _int_list, "mesh": _int_list, "deltas": _float_list, "kernel": _str_list}
    out = {}
    for k, v in cfg.items():
        if k in parsers:
            v = parsers[k](",".join(map(str, v)) if isinstance(v, list) else v)
        elif k == "data":
            v = [v] if isinstance(v, str) else list(v)
        else:
            v = _CONFIG_KEYS[k](v)
        out[k] = v
    return out


def config_from_args(args) -> ExperimentConfig:
    merged = _load_config(args.config) if args.config else {}
    for key in _CONFIG_KEYS:
        v = getattr(args, key)
        if v is not None:
            merged[key] = v
    trials, perms = (500, 1000) if merged.get("paper_scale") else (100, 200)
    kw = dict(
        experiment=args.experiment,
        deltas=merged.get("deltas"),
        n=merged.get("n"),
        mesh=merged.get("mesh"),
        alpha=merged.get("alpha", 0.05),
        n_trials=merged.get("trials", trials),
        n_perm=merged.get("perms", perms),
        seed=merged.get("seed", 0),
        out=merged.get("out"),
        data=tuple(merged.get("data") or ()),
    )
    if merged.get("kernel"):
        kw["kernels"] = merged["kernel"]
    return ExperimentConfig(**kw)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(args)
        rows, fields, flagged = run(cfg)
    except DataError as exc:
        print(f"fmmd: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (InvalidArgument, ValueError) as exc:
        print(f"fmmd: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FmmdError as exc:
        print(f"fmmd: {exc}", file=sys.stderr)
        return EXIT_DATA
    if cfg.out:
        write_rows(rows, cfg.out, fields)
    else:
        write_rows(rows, sys.stdout, fields)
    if flagged:
        print(f"fmmd: validation flagged: {', '.join(flagged)}", file=sys.stderr)
        return EXIT_FLAGGED
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
