"""Command-line entry point: ``qoptml``."""

from __future__ import annotations

import argparse
import json
import sys
import warnings

from . import __version__
from .core_model import Convention, DetectorEfficiency, GaussianState
from .estimators import EstimationError, fit_gaussian_state
from .experiments import ConfigError, ScenarioConfig, run
from .hamiltonian_id import BranchAmbiguityError, UnidentifiableError
from .measurement_sim import HomodyneRecords, RngSeed, sample_homodyne

EXIT_OK, EXIT_ESTIMATION, EXIT_CONFIG = 0, 2, 3


def _scenario_args(p):
    p.add_argument("--config", help="flat 'key = value' configuration file")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one configuration key (repeatable)")
    p.add_argument("--seed", type=int, help="64-bit master seed")
    p.add_argument("--out", help="output directory for CSV and JSON report")


def build_parser():
    parser = argparse.ArgumentParser(prog="qoptml", description=__doc__)
    parser.add_argument("--version", action="version", version=f"qoptml {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reproduce", help="run one of the five figure scenarios")
    p.add_argument("--figure", type=int, choices=range(1, 6), required=True)
    _scenario_args(p)

    p = sub.add_parser("onoff", help="ON/OFF detector efficiency scenario")
    _scenario_args(p)

    p = sub.add_parser("hamiltonian-id", help="identify a quadratic Hamiltonian from probe data")
    _scenario_args(p)

    p = sub.add_parser("fit-gaussian", help="fit a Gaussian state to homodyne records (CSV columns phase,x)")
    p.add_argument("--input", required=True)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--convention", choices=[c.value for c in Convention], default="rescaled")
    p.add_argument("--orientation", action="store_true", help="also fit the squeezing angle")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("simulate", help="write simulated homodyne records to CSV")
    p.add_argument("--output", required=True)
    p.add_argument("--n", type=int, default=50000)
    p.add_argument("--n-th", type=float, default=0.1)
    p.add_argument("--n-sq", type=float, default=3.0)
    p.add_argument("--mu-re", type=float, default=0.0)
    p.add_argument("--mu-im", type=float, default=0.0)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--convention", choices=[c.value for c in Convention], default="rescaled")
    p.add_argument("--seed", type=int, default=0)
    return parser


def _run_scenario(scenario, args):
    cfg = ScenarioConfig.load(args.config, args.overrides, scenario=scenario, seed=args.seed, out_dir=args.out)
    report = run(cfg)
    path = report.write()
    print(f"wrote {path}")
    for name, ok in report.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return EXIT_OK


def _fit(args):
    try:
        records = HomodyneRecords.from_csv(args.input)
        det = DetectorEfficiency(args.eta, Convention(args.convention))
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    with warnings.catch_warnings():
        # problems are reported through the flags and the exit code
        warnings.simplefilter("ignore")
        _, res = fit_gaussian_state(records, det, orientation=args.orientation, seed=args.seed)
    names = ("delta", "r", "theta", "mu_re", "mu_im") if args.orientation else ("delta", "r", "mu_re", "mu_im")
    out = {
        "estimate": dict(zip(names, map(float, res.estimate))),
        "std_error": dict(zip(names, map(float, res.std_error))),
        "n_samples": res.n_samples,
        "log_likelihood": res.log_likelihood_at_max,
        "converged": res.converged,
        "flags": list(res.flags),
    }
    print(json.dumps(out, indent=2))
    if not res.converged or "degenerate_phases" in res.flags:
        raise EstimationError(f"fit is not reliable: {res.flags}")
    return EXIT_OK


def _simulate(args):
    try:
        state = GaussianState.from_photon_numbers(args.n_th, args.n_sq, complex(args.mu_re, args.mu_im), args.theta)
        det = DetectorEfficiency(args.eta, Convention(args.convention))
        seed = RngSeed(args.seed, 0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    sample_homodyne(state, det, args.n, seed).to_csv(args.output)
    print(f"wrote {args.output}")
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "reproduce":
            return _run_scenario(f"fig{args.figure}", args)
        if args.command in ("onoff", "hamiltonian-id"):
            return _run_scenario(args.command, args)
        if args.command == "fit-gaussian":
            return _fit(args)
        return _simulate(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EstimationError, UnidentifiableError, BranchAmbiguityError) as exc:
        print(f"estimation failure: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION


if __name__ == "__main__":
    sys.exit(main())
