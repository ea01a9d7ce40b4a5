"""Command-line entry point.

Subcommands
-----------
gof, indep
    Run one test on a CSV count table and print the outcome as JSON.
critical-value
    Print the asymptotic private goodness-of-fit threshold.
simulate-significance, simulate-power
    Run a sweep from a JSON config and print CSV.

Exit status is 0 on success, 1 for invalid input or flags and 2 when a
numerical routine fails.
"""
import argparse
import json
import sys

import numpy as np

from . import harness, procedures
from .asymptotics import (block_diag_identity, build_gof_sigma, build_weight_matrix,
                          dump_diagnostics, gof_null_distribution)
from .denoise import ProjectionConfig
from .errors import NumericError, ValidationError
from .model import check_probability_vector, uniform_probability
from .privacy import Mechanism, PrivacyParams
from .quadform import critical_value
from .tableio import read_count_table


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def _parse_p0(text, d):
    if text == "uniform":
        if d is None:
            raise ValidationError("--p0 uniform needs the table (or --d) to fix the dimension")
        return uniform_probability(d)
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise ValidationError(f"--p0 must be 'uniform' or comma-separated numbers: {text!r}") from exc
    return check_probability_vector(values)


def _privacy(args):
    mech = Mechanism.parse(args.mech)
    delta = args.delta if mech is Mechanism.GAUSSIAN else None
    return PrivacyParams(args.eps, delta, mech)


def _add_privacy_flags(p):
    p.add_argument("--mech", default="gauss", help="gauss or laplace (default gauss)")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=1e-6)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)


def _default_test(args):
    if args.test is not None:
        return args.test
    return "mc" if Mechanism.parse(args.mech) is Mechanism.LAPLACE else "priv"


def _emit_outcome(name, n, outcome):
    payload = {"test": name, "n": int(n)}
    payload.update(outcome.to_dict())
    print(json.dumps(payload, sort_keys=True))


def _cmd_gof(args):
    x = read_count_table(args.table)
    if x.ndim != 1:
        x = x.ravel()
    p0 = _parse_p0(args.p0, x.size)
    params = _privacy(args)
    rng = np.random.default_rng(args.seed)
    test = _default_test(args)
    if test == "classical":
        outcome = procedures.gof_classical(x, args.alpha, p0)
    elif test == "mc":
        outcome = procedures.mc_gof(x, params, args.alpha, p0, args.k, rng)
    else:
        outcome = procedures.priv_gof(x, params, args.alpha, p0, rng)
    _emit_outcome(f"{test}_gof", x.sum(), outcome)


def _cmd_indep(args):
    x = read_count_table(args.table)
    if x.ndim != 2:
        raise ValidationError("independence tests need a table with at least two rows")
    params = _privacy(args)
    cfg = ProjectionConfig.for_mechanism(params.mechanism, gamma_laplace=args.gamma)
    rng = np.random.default_rng(args.seed)
    test = _default_test(args)
    if test == "classical":
        outcome = procedures.indep_classical(x, args.alpha)
    elif test == "mc":
        outcome = procedures.mc_indep(x, params, args.alpha, args.k, rng, cfg)
    else:
        outcome = procedures.priv_indep(x, params, args.alpha, rng, cfg)
    _emit_outcome(f"{test}_indep", x.sum(), outcome)


def _cmd_critical_value(args):
    if args.p0 is not None and args.uniform:
        raise ValidationError("give either --uniform or --p0, not both")
    if args.p0 is None and not args.uniform:
        raise ValidationError("give --uniform or --p0")
    p0 = _parse_p0("uniform" if args.uniform else args.p0, args.d)
    if args.d is not None and p0.size != args.d:
        raise ValidationError(f"--p0 has {p0.size} entries but --d is {args.d}")
    params = PrivacyParams(args.eps, args.delta, Mechanism.GAUSSIAN)
    dist = gof_null_distribution(p0, args.n, params)
    tau = critical_value(dist, args.alpha)
    if args.dump_json:
        stacked = block_diag_identity(build_gof_sigma(p0), p0.size)
        dump_diagnostics(args.dump_json, stacked.sigma, build_weight_matrix(p0, args.n, params).A, dist.weights)
    print(f"{tau:.10g}")


def _cmd_simulate(args, power):
    overrides = {
        "trials": args.trials, "seed": args.seed, "epsilon": args.eps, "delta": args.delta,
        "alpha": args.alpha, "mechanism": args.mech, "k": args.k,
        "n_grid": args.n,
    }
    cfg = harness.load_config(args.config, **overrides)
    run = harness.run_power if power else harness.run_significance
    result = run(cfg, workers=args.workers, skip_failures=args.skip_failures)
    text = result.to_csv()
    if args.output:
        try:
            with open(args.output, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise ValidationError(f"cannot write {args.output!r}: {exc}") from exc
    else:
        sys.stdout.write(text)


def build_parser():
    parser = _Parser(prog="dpchisq", description="Differentially private chi-squared tests.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    for name, helptext in (("gof", "goodness-of-fit test on a CSV histogram"),
                           ("indep", "independence test on a CSV contingency table")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--table", required=True, help="CSV file of integer counts")
        if name == "gof":
            p.add_argument("--p0", default="uniform", help="'uniform' or comma-separated probabilities")
        else:
            p.add_argument("--gamma", type=float, default=0.01, help="elastic-net mix for Laplace noise")
        p.add_argument("--test", choices=("classical", "mc", "priv"),
                       help="default: priv for Gaussian noise, mc for Laplace")
        p.add_argument("--k", type=int, default=100, help="Monte Carlo replicas")
        _add_privacy_flags(p)

    p = sub.add_parser("critical-value", help="asymptotic private goodness-of-fit threshold")
    p.add_argument("--d", type=int)
    p.add_argument("--uniform", action="store_true")
    p.add_argument("--p0")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--dump-json", metavar="PATH", help="write sigma, A and the weights as JSON")

    for name in ("simulate-significance", "simulate-power"):
        p = sub.add_parser(name, help=f"{name.split('-')[1]} sweep from a JSON config")
        p.add_argument("--config", required=True)
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--eps", type=float)
        p.add_argument("--delta", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("--mech")
        p.add_argument("--k", type=int)
        p.add_argument("--n", type=int, nargs="+", help="override the n grid")
        p.add_argument("--workers", type=int, help=f"process count (default ${harness.WORKERS_ENV} or 1)")
        p.add_argument("--skip-failures", action="store_true",
                       help="count numeric failures in a failures column instead of aborting")
        p.add_argument("--output", help="write CSV here instead of stdout")
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if args.command == "gof":
            _cmd_gof(args)
        elif args.command == "indep":
            _cmd_indep(args)
        elif args.command == "critical-value":
            _cmd_critical_value(args)
        else:
            _cmd_simulate(args, power=args.command == "simulate-power")
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        if exc.diagnostics:
            print(json.dumps(exc.diagnostics, default=str), file=sys.stderr)
        return 2
    return 0
