"""Command-line interface: ``fermi-eq <subcommand> [options]``.

Every subcommand prints a human-readable summary by default, a versioned
JSON document with ``--json``, and (where the output is a series) CSV with
``--format csv``.  JSON documents embed a manifest of the run; with
``--no-timestamp`` two runs with equal arguments produce identical bytes.

Exit status: 0 on success or a passing check, 1 on a numerical failure or a
failing check, 2 on a usage error.
"""

import argparse
import csv
import datetime
import json
import math
import platform
import sys

import numpy as np

from . import __version__
from ._backend import BACKEND
from .collision import dissipation_estimate, equilibrium_residual
from .density import (
    AnnulusDensity,
    BallDensity,
    FermiDiracDensity,
    Moments,
    RadialGridDensity,
    compute_moments,
    entropy,
)
from .equilibrium import INVERSION_QUADRATURE, classify, invert_parameters, verify_classification
from .errors import FermiEquilibriaError
from .fermi import (
    extrapolated_threshold,
    fermi_dP,
    fermi_I,
    fermi_J,
    fermi_P,
    ibp_residual,
    threshold,
)
from .geometry import (
    annulus_lambda_bound,
    check_antipodal_condition,
    lambda_estimate,
    make_shape,
    reuleaux_witness,
)
from .numerics import McConfig, QuadratureSpec

SCHEMA = "fermi-equilibria/1"
# decimal moments typed on a command line carry ~1e-6 relative rounding
CLI_REGIME_TOLERANCE = 1e-5


class UsageError(Exception):
    pass


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def _versions():
    return (f"fermi-equilibria {__version__} ({BACKEND} kernels); numpy {np.__version__}; "
            f"python {platform.python_version()}")


def _manifest(args, argv):
    flags = {k: v for k, v in sorted(vars(args).items())
             if k not in ("func", "json", "no_timestamp", "format", "command_path")}
    stamp = None if args.no_timestamp else datetime.datetime.now(datetime.timezone.utc).isoformat()
    return {"subcommand": args.command_path, "flags": flags, "argv": list(argv),
            "seed": getattr(args, "seed", None), "versions": _versions(), "timestamp": stamp}


def _flatten(prefix, obj, out):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append((prefix, obj))


def _emit(args, argv, result, stream):
    result = _clean(result)
    if args.json:
        doc = {"schema": SCHEMA, "manifest": _clean(_manifest(args, argv)), "result": result}
        stream.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
        return
    if getattr(args, "format", "table") == "csv" and "rows" in result:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(result["columns"])
        writer.writerows(result["rows"])
        return
    rows = []
    _flatten("", result, rows)
    width = max((len(k) for k, _ in rows), default=0)
    for k, v in rows:
        stream.write(f"{k.ljust(width)}  {v}\n")


# ------------------------------------------------------------------ helpers

def _quad(args):
    return QuadratureSpec(abs_tol=args.abs_tol, rel_tol=args.rel_tol,
                          max_subdivisions=args.max_subdivisions)


def _mc(args):
    return McConfig(seed=args.seed, samples=args.samples, workers=args.workers)


def _density(args):
    n = args.n
    kind = args.kind
    if kind == "fd":
        return FermiDiracDensity(args.a, args.b, n)
    if kind == "ball":
        return BallDensity(args.R, n)
    if kind == "annulus":
        return AnnulusDensity(args.eps, n)
    if kind == "grid":
        if not args.input:
            raise UsageError("--kind grid needs --input FILE.csv")
        return RadialGridDensity.from_csv(args.input, n)
    raise UsageError(f"unknown density kind {kind!r}")


def _moments_from_args(args):
    if not (args.m0 > 0 and args.m2 > 0):
        raise UsageError("--m0 and --m2 must be positive")
    return Moments(args.m0, args.m2, np.zeros(args.n), args.n)


# --------------------------------------------------------------- commands

def cmd_fermi_int(args):
    spec = _quad(args)
    if args.curve:
        ts = np.geomspace(args.t_min, args.t_max, args.points)
        rows = [[float(t), fermi_P(t, args.n, spec), fermi_dP(t, args.n, spec)] for t in ts]
        return 0, {"n": args.n, "columns": ["t", "P", "dP"], "rows": rows}
    out = {"s": args.s, "t": args.t,
           "I": fermi_I(args.s, args.t, spec), "J": fermi_J(args.s, args.t, spec),
           "ibp_residual": ibp_residual(args.s, args.t, spec)}
    if args.n is not None:
        out.update(n=args.n, P=fermi_P(args.t, args.n, spec), dP=fermi_dP(args.t, args.n, spec),
                   threshold=threshold(args.n),
                   extrapolated_threshold=extrapolated_threshold(args.n, spec))
    return 0, out


def cmd_classify(args):
    c = classify(_moments_from_args(args), args.tol)
    return 0, c.as_dict()


def cmd_invert(args):
    m = _moments_from_args(args)
    a, b = invert_parameters(m)
    fit = compute_moments(FermiDiracDensity(a, b, args.n), INVERSION_QUADRATURE)
    return 0, {"a": a, "b": b, "residuals": {"M0": abs(fit.M0 - m.M0) / m.M0,
                                             "M2": abs(fit.M2 - m.M2) / m.M2}}


def cmd_moments(args):
    center = None
    if args.center:
        center = [float(x) for x in args.center.split(",")]
    f = RadialGridDensity.from_csv(args.input, args.n, center)
    spec = _quad(args)
    m = compute_moments(f, spec)
    out = {"n": args.n, "M0": m.M0, "M2": m.M2, "v0": m.v0, "ratio": m.ratio,
           "threshold": threshold(args.n), "entropy": entropy(f, spec)}
    try:
        out["classification"] = classify(m, args.tol).as_dict()
    except FermiEquilibriaError as exc:
        out["classification"] = {"regime": "infeasible", "error": str(exc)}
        return 1, out
    return 0, out


def cmd_residual(args):
    f = _density(args)
    rep = equilibrium_residual(f, None, _quad(args), _mc(args), factor=args.factor)
    return (0 if rep.passed else 1), {"kind": args.kind, "n": args.n, **rep.as_dict()}


def cmd_dissipation(args):
    f = _density(args)
    est = dissipation_estimate(f, _mc(args))
    zero = est.infinite_hits == 0 and abs(est.value) <= args.sigmas * est.std_error
    out = {"kind": args.kind, "n": args.n, **est.as_dict(), "zero_within_error": zero}
    return (0 if zero else 1), out


def cmd_verify(args):
    f = _density(args)
    spec = _quad(args)
    m = compute_moments(f, spec)
    c = classify(m, args.tol)
    rep = verify_classification(f, c, spec, form_tol=args.form_tol)
    return (0 if rep.passed else 1), {"classification": c.as_dict(), **rep.as_dict()}


def cmd_geometry_check(args):
    K = make_shape(args.shape, args.n, args.eps)
    mc = McConfig(seed=args.seed, samples=args.pairs, workers=args.workers)
    extra = reuleaux_witness() if (args.include_witness and args.shape == "reuleaux") else None
    rep = check_antipodal_condition(K, mc, args.slack, extra_triples=extra)
    return (0 if rep.passed else 1), {**K.as_dict(), **rep.as_dict()}


def cmd_geometry_lambda(args):
    K = make_shape("annulus", args.n, args.eps)
    mc = McConfig(seed=args.seed, samples=args.sigma_samples, workers=args.workers)
    est = lambda_estimate(K, mc, pairs=args.pairs)
    bound = annulus_lambda_bound(args.eps, args.n)
    ok = est.lambda_hat >= bound - 3.0 * est.std_error
    return (0 if ok else 1), {**K.as_dict(), **est.as_dict(), "bound": bound, "pass": ok}


# ----------------------------------------------------------------- parser

def _common(p, mc=False):
    p.add_argument("--json", action="store_true", help="emit the versioned JSON document")
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit the manifest timestamp (byte-identical reruns)")
    p.add_argument("--abs-tol", type=float, default=1e-12, help="quadrature absolute tolerance")
    p.add_argument("--rel-tol", type=float, default=1e-10, help="quadrature relative tolerance")
    p.add_argument("--max-subdivisions", type=int, default=1000)
    if mc:
        p.add_argument("--samples", type=int, default=100_000, help="Monte-Carlo samples")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1, help="threads; results do not depend on it")


def _density_flags(p):
    p.add_argument("--n", type=int, required=True, help="dimension")
    p.add_argument("--kind", choices=["fd", "ball", "annulus", "grid"], required=True)
    p.add_argument("--a", type=float, default=1.0, help="Fermi-Dirac amplitude")
    p.add_argument("--b", type=float, default=1.0, help="Fermi-Dirac rate")
    p.add_argument("--R", type=float, default=1.0, help="ball radius")
    p.add_argument("--eps", type=float, default=0.5, help="annulus inner radius")
    p.add_argument("--input", help="radial grid CSV (columns r,value) for --kind grid")


def build_parser():
    parser = argparse.ArgumentParser(prog="fermi-eq", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=_versions())
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fermi-int", help="Fermi integrals I_s, J_s and the ratio P(t)")
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--n", type=int, help="dimension for P, dP/dt and the threshold")
    p.add_argument("--curve", action="store_true", help="tabulate P(t) on a log grid")
    p.add_argument("--t-min", type=float, default=1e-2)
    p.add_argument("--t-max", type=float, default=1e2)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--format", choices=["table", "csv"], default="table")
    _common(p)
    p.set_defaults(func=cmd_fermi_int)

    for name, func, hlp in (("classify", cmd_classify, "classify (M0, M2) into a regime"),
                            ("invert", cmd_invert, "Fermi-Dirac parameters from (M0, M2)")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--m0", type=float, required=True)
        p.add_argument("--m2", type=float, required=True)
        p.add_argument("--tol", type=float, default=CLI_REGIME_TOLERANCE,
                       help="relative tolerance for the ball case (default 1e-5)")
        _common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("moments", help="moments and regime of a radial CSV density")
    p.add_argument("--input", required=True, help="CSV with columns r,value")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--center", help="comma-separated centre (default origin)")
    p.add_argument("--tol", type=float, default=CLI_REGIME_TOLERANCE)
    _common(p)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("residual", help="equilibrium residual f(I+J) - I")
    _density_flags(p)
    p.add_argument("--factor", type=float, default=5.0, help="pass if residual <= factor * error")
    _common(p, mc=True)
    p.set_defaults(func=cmd_residual)

    p = sub.add_parser("dissipation", help="Monte-Carlo entropy production D(f)")
    _density_flags(p)
    p.add_argument("--sigmas", type=float, default=3.0, help="zero if |D| <= sigmas * std_error")
    _common(p, mc=True)
    p.set_defaults(func=cmd_dissipation)

    p = sub.add_parser("verify", help="check the equilibrium characterisations of a density")
    _density_flags(p)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--form-tol", type=float, default=1e-6)
    _common(p)
    p.set_defaults(func=cmd_verify)

    g = sub.add_parser("geometry", help="ball characterisation checks")
    gsub = g.add_subparsers(dest="geometry_command", required=True)
    p = gsub.add_parser("check", help="sample the antipodal-pair condition on a shape")
    p.add_argument("--shape", choices=["ball", "reuleaux", "annulus"], required=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--pairs", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--slack", type=float, default=None, help="membership slack (1e-9 * diameter)")
    p.add_argument("--include-witness", action="store_true",
                   help="also test the known Reuleaux witness triple")
    _common(p)
    p.set_defaults(func=cmd_geometry_check)
    p = gsub.add_parser("lambda", help="annulus sphere-fraction minimum vs its lower bound")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--pairs", type=int, default=200)
    p.add_argument("--sigma-samples", type=int, default=4096)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    _common(p)
    p.set_defaults(func=cmd_geometry_lambda)
    return parser


def run(argv=None, stdout=None, stderr=None):
    """Parse ``argv``, run the subcommand and return the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.command_path = args.command + (
        f" {args.geometry_command}" if args.command == "geometry" else "")
    try:
        code, result = args.func(args)
    except (UsageError, ValueError) as exc:
        # invalid inputs (bad dimension, density parameters, CSV) are usage errors
        parser.print_usage(stderr)
        stderr.write(f"fermi-eq: error: {exc}\n")
        return 2
    except FermiEquilibriaError as exc:
        result = {"error": type(exc).__name__, "message": str(exc)}
        for attr in ("ratio", "threshold"):
            if getattr(exc, attr, None) is not None:
                result[attr] = getattr(exc, attr)
        if type(exc).__name__ == "InfeasibleMoments":
            result["regime"] = "infeasible"
        _emit(args, argv, result, stdout)
        return 1
    _emit(args, argv, result, stdout)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
