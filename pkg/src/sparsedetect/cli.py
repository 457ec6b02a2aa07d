"""Command-line interface: boundary | simulate | sweep | oracle | selftest.

Exit codes: 0 success, 1 selftest failure, 2 usage or domain error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .boundary import classify_regime
from .decisions import TestSpec
from .lowerbound import EXACT_P_MAX, bayes_risk_oracle
from .model import DomainError, ProblemConfig
from .montecarlo import CellResult, SweepGrid, estimate_errors, run_sweep
from .selftest import run_selftest

CSV_HEADER = ("beta", "x", "n", "p", "k", "test", "alpha_hat", "beta_hat", "gamma_hat",
              "se_alpha", "se_beta", "reps", "seed")

_CELL_FIELDS = {"se_alpha": "stderr_alpha", "se_beta": "stderr_beta"}
_INT_FIELDS = {"n", "p", "k", "reps", "seed"}


class UsageError(Exception):
    pass


def fmt(value: float) -> str:
    """Nine significant digits."""
    return f"{value:.9g}"


def _round(value):
    if isinstance(value, float):
        return float(fmt(value)) if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: _round(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round(v) for v in value]
    return value


def cells_to_csv(cells) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for c in cells:
        row = []
        for col in CSV_HEADER:
            v = getattr(c, _CELL_FIELDS.get(col, col))
            row.append(fmt(v) if isinstance(v, float) else v)
        writer.writerow(row)
    return buf.getvalue()


def cells_from_csv(text: str) -> list[CellResult]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError("unexpected CSV header")
    out = []
    for row in reader:
        kwargs = {}
        for col in CSV_HEADER:
            key = _CELL_FIELDS.get(col, col)
            if col == "test":
                kwargs[key] = row[col]
            elif col in _INT_FIELDS:
                kwargs[key] = int(row[col])
            else:
                kwargs[key] = float(row[col])
        out.append(CellResult(**kwargs))
    return out


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment; keys mirror the long flags."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.lstrip("-").replace("-", "_")] = value
    return values


def _manifest(command: str, config: dict, seed, started: str) -> dict:
    return {
        "command": command,
        "config": _round(config),
        "seed": seed,
        "tool_version": __version__,
        "started": started,
        "finished": _now(),
    }


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _emit(text: str, out: str | None, manifest: dict | None = None):
    if out:
        Path(out).write_text(text)
        if manifest is not None:
            Path(out + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    else:
        sys.stdout.write(text)


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad number list {text!r}") from exc


def _problem_flags(parser: argparse.ArgumentParser, *, signal: bool = True):
    parser.add_argument("--config", help="flat key = value file; flags override it")
    parser.add_argument("--n", type=int, required=False)
    parser.add_argument("--p", type=int, required=False)
    parser.add_argument("--k", type=int)
    parser.add_argument("--beta", type=float)
    if signal:
        parser.add_argument("--r", type=float)
        parser.add_argument("--x", type=float)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", help="write the result to this file")
    parser.add_argument("--json", action="store_true", help="machine-readable JSON output")


def _mc_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--test", default="psi_hc")
    parser.add_argument("--alpha", type=float, default=0.05)
    parser.add_argument("--a", type=float, default=0.1, help="HC margin")
    parser.add_argument("--cutoff", type=float, default=0.5, help="HC p-value cutoff")
    parser.add_argument("--T-np", dest="T_np", type=float, help="threshold for psi0_T")
    parser.add_argument("--design", default="gaussian",
                        choices=["gaussian", "rademacher", "uniform",
                                 "gaussian_iid", "rademacher_iid", "uniform_iid"])
    parser.add_argument("--sigma", default="known", choices=["known", "unknown"])
    parser.add_argument("--sigma-unknown", dest="sigma", action="store_const", const="unknown")
    parser.add_argument("--noise-sd", type=float, default=1.0)
    parser.add_argument("--reps", type=int, default=1000)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--sampler", default="auto", choices=["auto", "full", "reduced"])
    parser.add_argument("--fixed-theta", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparsedetect",
                                     description="Sparse regression detection toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    parser.subcommands = sub.choices

    p = sub.add_parser("boundary", help="closed-form detection boundary")
    _problem_flags(p, signal=False)

    p = sub.add_parser("simulate", help="Monte Carlo errors of one test at one configuration")
    _problem_flags(p)
    _mc_flags(p)

    p = sub.add_parser("sweep", help="phase diagram over a (beta, x) grid")
    _problem_flags(p, signal=False)
    _mc_flags(p)
    p.add_argument("--betas", required=False, help="comma-separated, increasing")
    p.add_argument("--xs", required=False, help="comma-separated, increasing")

    p = sub.add_parser("oracle", help="Bayes-risk oracle on a tiny instance")
    _problem_flags(p)
    p.add_argument("--prior", default="three_point",
                   choices=["three_point", "boundary", "uniform_support"])
    p.add_argument("--c", type=float)
    p.add_argument("--design", default="gaussian", choices=["gaussian", "rademacher", "uniform"])
    p.add_argument("--reps", type=int, default=1000)

    p = sub.add_parser("selftest", help="fast invariant checks")
    p.add_argument("--json", action="store_true")
    return parser


def _parse(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    path = getattr(args, "config", None)
    if not path:
        return args
    values = read_config_file(path)
    sub = parser.subcommands[args.command]
    actions = {a.dest: a for a in sub._actions}
    unknown = set(values) - set(actions)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key, val in list(values.items()):
        if actions[key].nargs == 0 and actions[key].const in (True, False):
            values[key] = val.lower() in ("1", "true", "yes", "on")
    # string defaults pass through each action's type converter
    sub.set_defaults(**values)
    return parser.parse_args(argv)


def _require(args, *names):
    missing = [f"--{n}" for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError(f"missing required flags: {' '.join(missing)}")


def _config(args, **extra) -> ProblemConfig:
    _require(args, "n", "p")
    if args.k is None and args.beta is None:
        raise UsageError("one of --k or --beta is required")
    r, x = getattr(args, "r", None), getattr(args, "x", None)
    if r is None and x is None:
        raise UsageError("one of --r or --x is required")
    sigma_mode = getattr(args, "sigma", "known")
    return ProblemConfig(
        n=args.n, p=args.p, k=args.k, beta=args.beta, r=r, x=x,
        sigma=getattr(args, "noise_sd", 1.0), variance_known=sigma_mode != "unknown",
        design=_design(getattr(args, "design", "gaussian")), seed=args.seed, **extra)


def _design(name: str) -> str:
    return name if name.endswith("_iid") else name + "_iid"


def _test_spec(args) -> TestSpec:
    return TestSpec(args.test, alpha=args.alpha, a=args.a, T_np=args.T_np, cutoff=args.cutoff)


def cmd_boundary(args) -> int:
    started = _now()
    _require(args, "n", "p")
    if args.beta is None and args.k is None:
        raise UsageError("one of --beta or --k is required")
    if args.beta is not None and not 0.0 < args.beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {args.beta}")
    cfg = ProblemConfig(n=args.n, p=args.p, k=args.k, beta=args.beta, r=0.0)
    rep = classify_regime(cfg)
    payload = {
        "beta": rep.beta, "k": rep.k, "rate": rep.boundary_rate, "regime": rep.regime,
        "ratios": {"sharp_condition": rep.sharp_condition_ratio,
                   "unknown_variance": rep.unknown_variance_ratio},
        "sharp_constant_applicable": rep.sharp_constant_applicable,
    }
    if rep.phi is not None:
        payload["phi"] = rep.phi
        payload["sharp_radius"] = rep.sharp_radius
    payload = _round(payload)
    if args.out:
        doc = dict(payload, manifest=_manifest("boundary", vars_for(args), args.seed, started))
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    if args.json:
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
        return 0
    lines = [f"{'field':<28}value"]
    for key in ("beta", "k", "regime", "rate", "phi", "sharp_radius", "sharp_constant_applicable"):
        if key in payload:
            lines.append(f"{key:<28}{payload[key]}")
    for key, val in payload["ratios"].items():
        lines.append(f"{'ratio.' + key:<28}{val}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def vars_for(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func", "out", "config")}


def cmd_simulate(args) -> int:
    started = _now()
    cfg = _config(args)
    spec = _test_spec(args)
    cell = estimate_errors(cfg, spec, args.reps, threads=args.threads, sampler=args.sampler,
                           fixed_theta=args.fixed_theta)
    manifest = _manifest("simulate", vars_for(args), args.seed, started)
    if args.json:
        doc = _round({col: getattr(cell, _CELL_FIELDS.get(col, col)) for col in CSV_HEADER})
        if args.out:
            doc["manifest"] = manifest
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    else:
        _emit(cells_to_csv([cell]), args.out, manifest)
    return 0


def cmd_sweep(args) -> int:
    started = _now()
    _require(args, "n", "p", "betas", "xs")
    betas, xs = _float_list(args.betas), _float_list(args.xs)
    grid = SweepGrid(tuple(betas), tuple(xs), n=args.n, p=args.p, reps_per_cell=args.reps,
                     base_seed=args.seed, design=_design(args.design), sigma=args.noise_sd,
                     variance_known=args.sigma != "unknown")
    cells = run_sweep(grid, _test_spec(args), threads=args.threads, sampler=args.sampler)
    _emit(cells_to_csv(cells), args.out, _manifest("sweep", vars_for(args), args.seed, started))
    return 0


def cmd_oracle(args) -> int:
    started = _now()
    _require(args, "p")
    if args.p > EXACT_P_MAX:
        raise DomainError(f"exact oracle needs p <= {EXACT_P_MAX} (enumeration limit), got p={args.p}")
    cfg = _config(args)
    est = bayes_risk_oracle(cfg, args.prior, args.reps, np.random.default_rng(args.seed), c=args.c)
    payload = _round({"gamma_hat": est.gamma, "stderr": est.stderr, "reps": est.reps,
                      "prior": est.prior_parameters(),
                      "n": cfg.n, "p": cfg.p, "k": cfg.k, "r": cfg.r, "x": cfg.x})
    if args.out:
        doc = dict(payload, manifest=_manifest("oracle", vars_for(args), args.seed, started))
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    if args.json:
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    else:
        _print_oracle(payload)
    return 0


def _print_oracle(payload):
    prior = ", ".join(f"{k}={v}" for k, v in payload["prior"].items())
    sys.stdout.write(f"gamma_hat = {payload['gamma_hat']} +- {payload['stderr']} "
                     f"({payload['reps']} reps)\nprior: {prior}\n")


def cmd_selftest(args) -> int:
    results = run_selftest()
    failed = [r for r in results if not r.passed]
    if args.json:
        sys.stdout.write(json.dumps({
            "passed": [r.name for r in results if r.passed],
            "failed": [r.name for r in failed],
            "details": {r.name: r.detail for r in results},
        }, indent=2) + "\n")
    else:
        for r in results:
            sys.stdout.write(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<30}{r.detail}\n")
    for r in failed:
        sys.stderr.write(f"selftest failed: {r.name} ({r.detail})\n")
    return 1 if failed else 0


COMMANDS = {
    "boundary": cmd_boundary,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _parse(parser, argv)
        return COMMANDS[args.command](args)
    except (UsageError, DomainError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
