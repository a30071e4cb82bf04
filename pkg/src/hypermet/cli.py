"""Command-line front end: ``hypermet <subcommand> ...``.

Exit codes: 0 when every check passes, 2 when a certificate or bound fails,
1 on invalid input. Diagnostics go to standard error; reports are JSON.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import io as hio
from .boundary import ParameterError as BoundaryParameterError
from .boundary import bourdon_metric, hamenstadt_metric, lemma3_certificate, quasimobius_distortion
from .hyperbolicity import ConfigurationError, ConnectivityError, delta_four_point
from .metric import TAU_REL, DomainError, FiniteMetricSpace, InputError, UndefinedCrossRatio
from .phi import parse_phi
from .regularity import DegenerateFit, ahlfors_fit, doubling_constant
from .sphericalize import DegenerateMetrization, sphericalize

EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 1, 2

_INPUT_ERRORS = (
    InputError,
    DomainError,
    UndefinedCrossRatio,
    ConfigurationError,
    ConnectivityError,
    BoundaryParameterError,
    DegenerateFit,
    KeyError,
    ValueError,
    OSError,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _glue_negative_values(argv: Sequence[str]) -> list[str]:
    """Let ``--window -8,-1,8,2`` through: argparse would read the value as a flag."""
    out, it = [], iter(argv)
    for a in it:
        if a in ("--window", "--point", "--anchor", "--t"):
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and (nxt[1:2].isdigit() or nxt[1:2] == "."):
                out.append(f"{a}={nxt}")
                continue
            out.append(a)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(a)
    return out


class _Failure(Exception):
    """A check ran to completion and failed; carries the report to write."""

    def __init__(self, report):
        super().__init__("check failed")
        self.report = report


def _config(args, drop=("func", "report", "output")) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in drop}


def _emit(args, result: dict, passed: Optional[bool], tolerances: dict) -> dict:
    report = hio.make_report(args.command, _config(args), tolerances, result, passed)
    target = getattr(args, "report", None) or getattr(args, "output", None)
    if target:
        hio.write_report(report, target)
    else:
        sys.stdout.write(hio.dumps_report(report))
    if passed is False:
        raise _Failure(report)
    return report


def cmd_sphericalize(args) -> dict:
    space = hio.load_space(args.input)
    tol = args.tolerance if args.tolerance is not None else 1e-12
    try:
        sph = sphericalize(space, args.base)
    except DegenerateMetrization as exc:
        return _emit(args, exc.to_dict(), False, {"absolute": 1e-12})
    ok = sph.comparison_ratio <= 4.0 * (1 + tol) and sph.metrized.diameter <= 1.0 + tol
    return _emit(args, sph.to_dict(), bool(ok), {"relative": tol})


def cmd_delta(args) -> dict:
    space = hio.load_space(args.input)
    if args.sup_base:
        base = None
    else:
        base = args.base if args.base is not None else space.labels[0]
    cert = delta_four_point(space, base)
    res = cert.to_dict()
    res["base"] = base
    res["sup_base"] = base is None
    return _emit(args, res, None, {"relative": TAU_REL})


def cmd_boundary(args) -> dict:
    chart = hio.load_chart(args.chart)
    tol = args.tolerance if args.tolerance is not None else TAU_REL
    res, ok = {"chart": {"points": list(chart.points), "base": chart.base, "delta": chart.delta}}, True
    bour = ham = None
    if args.bourdon_eps is not None:
        bour = bourdon_metric(chart, args.bourdon_eps)
        res["bourdon"] = bour.to_dict()
        res["bourdon"]["doubling"] = doubling_constant(bour.space(), seed=args.seed).to_dict()
        ok &= bour.within_half_bound
    if args.hamenstadt_eps is not None:
        if args.anchor is None:
            raise InputError("--hamenstadt-eps needs --anchor")
        ham = hamenstadt_metric(chart, args.anchor, args.hamenstadt_eps)
        res["hamenstadt"] = ham.to_dict()
        res["hamenstadt"]["doubling"] = doubling_constant(ham.space(), seed=args.seed).to_dict()
        ok &= ham.within_half_bound
    if bour is not None and ham is not None and len(ham.labels) >= 4:
        src = bour.space().subspace(list(ham.labels))
        prof = quasimobius_distortion(src, ham.space(), seed=args.seed)
        res["distortion"] = prof.to_dict()
        res["theta_envelope"] = res["distortion"]["theta_envelope"]
    if args.certify_lemma3:
        if args.bourdon_eps is None or args.hamenstadt_eps is None or args.anchor is None:
            raise InputError("--certify-lemma3 needs --bourdon-eps, --hamenstadt-eps and --anchor")
        cert = lemma3_certificate(chart, args.anchor, args.bourdon_eps, args.hamenstadt_eps, seed=args.seed)
        res["lemma3"] = cert.to_dict()
        ok &= cert.passed
    return _emit(args, res, bool(ok), {"relative": tol})


def _pairs(args, dim):
    if args.pairs is None:
        raise InputError(f"--check {args.check} needs --pairs")
    return hio.load_pairs(args.pairs, dim)


def _point(text: Optional[str], name: str):
    if text is None:
        raise InputError(f"{name} is required")
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise InputError(f"{name} must be comma-separated numbers") from None


def cmd_domain(args) -> dict:
    from .domains import conditions as cond
    from .domains.grid import discretize
    from .domains.growth import integral_condition, psi_transfer
    from .domains.shapes import load_domain

    tol = args.tolerance if args.tolerance is not None else cond.GRID_TOLERANCE
    tols = {"grid": tol}
    check = args.check
    if check in ("integral", "psi"):
        if args.phi is None:
            raise InputError(f"--check {check} needs --phi")
        phi = parse_phi(args.phi)
        if check == "integral":
            v = integral_condition(phi, args.variant, cap=args.cap)
            return _emit(args, v.to_dict(), None, {"cap": args.cap, "decay": 1.5})
        psi = psi_transfer(phi, args.c, args.c0, args.lam)
        res = psi.to_dict()
        if args.t is not None:
            t = np.asarray([float(v) for v in args.t.split(",")])
            res["t"], res["psi"], res["majorant"] = t, psi(t), psi.majorant(t)
        return _emit(args, res, None, {})

    if args.spec is None:
        raise InputError(f"--check {check} needs --spec")
    spec = load_domain(args.spec)
    if check == "annulus":
        x = _point(args.point, "--point")
        r = cond.annulus_classify(spec, x, args.lam)
        res = {"kind": r.kind, "boundary_point": r.boundary_point, "t": r.t, "witness": r.witness, "lambda": args.lam}
        return _emit(args, res, None, {})

    if args.h is None or args.window is None:
        raise InputError(f"--check {check} needs --h and --window")
    graph = discretize(spec, args.h, args.window)
    pairs = _pairs(args, spec.dimension)
    if check == "phi-uniform":
        if args.phi is None:
            raise InputError("--check phi-uniform needs --phi")
        prof = cond.phi_uniform_profile(spec, graph, pairs, parse_phi(args.phi), tol, growth=args.growth)
        return _emit(args, prof.to_dict(), prof.passed, tols)
    if check == "uniformity":
        return _emit(args, cond.uniformity_constant(spec, graph, pairs).to_dict(), None, tols)
    if check == "geodesic":
        gh, bs = cond.geodesic_conditions(spec, graph, pairs, args.competitors, args.seed)
        return _emit(args, {"gehring_hayman": gh.to_dict(), "ball_separation": bs.to_dict()}, None, tols)
    if check == "spherical-compare":
        a = _point(args.anchor, "--anchor")
        r = cond.spherical_compare(spec, graph, a, pairs, args.c)
        return _emit(args, r.to_dict(), r.passed, tols)
    raise InputError(f"unknown check {check!r}")


def cmd_regularity(args) -> dict:
    space = hio.load_space(args.input)
    res = doubling_constant(space, args.sample_size, seed=args.seed).to_dict()
    if args.weights:
        if space.weights is None:
            space = FiniteMetricSpace(space.labels, space.dist, space.coords, np.ones(space.n))
        res["ahlfors"] = ahlfors_fit(space, seed=args.seed).to_dict()["ahlfors"]
    return _emit(args, res, None, {})


def cmd_export(args) -> dict:
    report = hio._read_json(args.report_in)
    if not isinstance(report, dict):
        raise InputError(f"{args.report_in}: expected a JSON object")
    if args.format != "csv":
        raise InputError("only CSV export is supported")
    cols = hio.export_scatter(report, args.output)
    print(f"wrote {args.output} ({','.join(cols)})", file=sys.stderr)
    return {}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every sampled estimate")
    common.add_argument("--threads", type=int, default=1, help="worker threads for numerical kernels")
    common.add_argument("--tolerance", type=float, default=None, help="relative slack for pass/fail checks")

    p = _Parser(prog="hypermet", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sphericalize", parents=[common], help="sphericalize a finite space at a base point")
    s.add_argument("--input", required=True)
    s.add_argument("--base", required=True)
    s.add_argument("--output")
    s.set_defaults(func=cmd_sphericalize)

    s = sub.add_parser("delta", parents=[common], help="four-point Gromov delta")
    s.add_argument("--input", required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--base")
    g.add_argument("--sup-base", action="store_true", help="take the supremum over all base points")
    s.add_argument("--output")
    s.set_defaults(func=cmd_delta)

    s = sub.add_parser("boundary", parents=[common], help="visual metrics on a boundary chart")
    s.add_argument("--chart", required=True)
    s.add_argument("--bourdon-eps", type=float)
    s.add_argument("--hamenstadt-eps", type=float)
    s.add_argument("--anchor")
    s.add_argument("--certify-lemma3", action="store_true")
    s.add_argument("--report")
    s.set_defaults(func=cmd_boundary)

    s = sub.add_parser("domain", parents=[common], help="grid checks on a Euclidean domain")
    s.add_argument("--spec")
    s.add_argument("--h", type=float)
    s.add_argument("--window", help="x0,y0,x1,y1 (or six numbers in 3D)")
    s.add_argument(
        "--check",
        required=True,
        choices=["phi-uniform", "uniformity", "geodesic", "annulus", "spherical-compare", "integral", "psi"],
    )
    s.add_argument("--phi")
    s.add_argument("--pairs", help="CSV with rows x1,y1,x2,y2")
    s.add_argument("--growth", action="store_true", help="also run the bounded-domain growth check")
    s.add_argument("--point", help="interior point for --check annulus")
    s.add_argument("--anchor", help="boundary point a for --check spherical-compare")
    s.add_argument("--lambda", dest="lam", type=float, default=0.5)
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--c0", type=float, default=1.0)
    s.add_argument("--t", help="comma-separated evaluation points for --check psi")
    s.add_argument("--variant", choices=["PLAIN", "SQRT"], default="PLAIN")
    s.add_argument("--cap", type=float, default=10.0)
    s.add_argument("--competitors", type=int, default=16)
    s.add_argument("--report")
    s.set_defaults(func=cmd_domain)

    s = sub.add_parser("regularity", parents=[common], help="doubling and Ahlfors estimates")
    s.add_argument("--input", required=True)
    s.add_argument("--weights", action="store_true", help="fit Ahlfors regularity (unit weights if none given)")
    s.add_argument("--sample-size", type=int, default=10_000)
    s.add_argument("--report")
    s.set_defaults(func=cmd_regularity)

    s = sub.add_parser("export", parents=[common], help="write a report's scatter data as CSV")
    s.add_argument("--report", dest="report_in", required=True)
    s.add_argument("--output", required=True)
    s.add_argument("--format", default="csv")
    s.set_defaults(func=cmd_export)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_glue_negative_values(argv))
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    os.environ.setdefault("OMP_NUM_THREADS", str(args.threads))
    try:
        args.func(args)
    except _Failure:
        print(f"{args.command}: check failed", file=sys.stderr)
        return EXIT_FAIL
    except _INPUT_ERRORS as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
