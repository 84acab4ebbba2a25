"""Command line front end: ``opalg verify | dilate | polar | kernel``.

Exit codes: 0 when every check passes, 1 when any check fails, 2 on input errors.
The seed is taken from ``--seed``, else from the ``OPALG_SEED`` environment
variable, else from the instance file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import geomorbit as gm
from . import numkernel as nk
from . import rkbundle as rk
from .dilation import dilation_residual, representation_residuals, stinespring
from .errors import IncompatibleData, OpalgError, ParseError, UnknownSuite, ValidationError
from .instance import encode_matrix, load_instances
from .report import Report, emit_report
from .suites import SUITES, Context, polar_targets, resolve_suites, run_suite

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
SEED_ENV = "OPALG_SEED"


class InputError(Exception):
    pass


def _seed(arg: int | None) -> int | None:
    if arg is not None:
        return arg
    env = os.environ.get(SEED_ENV)
    if env is None or env.strip() == "":
        return None
    try:
        value = int(env)
    except ValueError:
        raise InputError(f"{SEED_ENV}={env!r} is not an integer") from None
    if value < 0:
        raise InputError(f"{SEED_ENV} must be unsigned")
    return value


def _dump(obj, out) -> None:
    out.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def cmd_verify(args, out) -> int:
    suites = resolve_suites(args.suite)
    insts = load_instances(args.file)
    seed = _seed(args.seed)
    combined = None
    for k, inst in enumerate(insts):
        prefix = f"instance[{k}]." if len(insts) > 1 else ""
        r = run_suite(inst, suites, tol=args.tol, seed=seed, prefix=prefix)
        if combined is None:
            combined = r
        else:
            combined.extend(r.checks)
            combined.warnings.extend(r.warnings)
            combined.timings.update(r.timings)
    out.write(emit_report(combined, args.format, timings=args.timings))
    return EXIT_OK if combined.passed else EXIT_FAIL


def _instance(args):
    insts = load_instances(args.file)
    if not 0 <= args.index < len(insts):
        raise InputError(f"{args.file}: no instance at index {args.index}")
    return insts[args.index]


def cmd_dilate(args, out) -> int:
    inst = _instance(args)
    seed = _seed(args.seed)
    seed = inst.seed if seed is None else seed
    try:
        d = stinespring(inst.algebra, inst.cp_map)
    except OpalgError as exc:
        _dump({"pass": False, "error": f"{type(exc).__name__}: {exc}"}, out)
        return EXIT_FAIL
    res = representation_residuals(d)
    stine = dilation_residual(inst.cp_map, d, 20, Context(inst, seed, None).rng("dilation.stinespring"))
    ok = stine <= 1e-9 and res["multiplicativity"] <= 1e-9 and res["isometry"] <= 1e-10 and res["star"] <= 1e-10
    body = {
        "pass": bool(ok),
        "seed": seed,
        "algebra_dim": inst.algebra.dim,
        "h0_dim": d.h0_dim,
        "space_dim": d.space_dim,
        "minimal_rank": res["minimal_rank"],
        "residuals": {
            "stinespring": stine,
            "multiplicativity": res["multiplicativity"],
            "star": res["star"],
            "isometry": res["isometry"],
            "unit": res["unit"],
        },
        "warnings": list(inst.warnings) + list(d.warnings),
    }
    if args.matrices:
        body["isometry_v"] = encode_matrix(d.isometry_v)
        body["representation"] = [encode_matrix(r) for r in d.rep]
    _dump(body, out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_polar(args, out) -> int:
    inst = _instance(args)
    seed = _seed(args.seed)
    ctx = Context(inst, inst.seed if seed is None else seed, None)
    targets = polar_targets(ctx)
    if not 0 <= args.target < len(targets):
        raise InputError(f"target index {args.target} out of range (0..{len(targets) - 1})")
    a = targets[args.target]
    try:
        t = gm.porta_recht(a, ctx.expectation)
    except OpalgError as exc:
        _dump({"pass": False, "target": args.target, "error": f"{type(exc).__name__}: {exc}"}, out)
        return EXIT_FAIL
    e = ctx.expectation
    res = {
        "reconstruction": nk.opnorm(t.reconstruct() - a) / nk.opnorm(a),
        "e_of_x": nk.opnorm(e(t.x)),
        "x_antihermitian": nk.opnorm(t.x + t.x.conj().T),
    }
    ok = res["reconstruction"] <= 1e-7 and res["e_of_x"] <= 1e-8 and res["x_antihermitian"] <= 1e-10
    _dump({
        "pass": bool(ok),
        "target": args.target,
        "iterations": t.iterations,
        "method": t.method,
        "u": encode_matrix(t.u),
        "x": encode_matrix(t.x),
        "b": encode_matrix(t.b),
        "residuals": res,
    }, out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_kernel(args, out) -> int:
    inst = _instance(args)
    if args.samples < 1:
        raise InputError("--samples must be at least 1")
    seed = _seed(args.seed)
    ctx = Context(inst, inst.seed if seed is None else seed, None)
    try:
        bundle = ctx.bundle
    except IncompatibleData as exc:
        _dump({"pass": False, "error": f"IncompatibleData: {exc}"}, out)
        return EXIT_FAIL
    pts, vecs = rk.random_configuration(bundle, args.samples, ctx.rng("kernel.gram"))
    ks = rk.kernel_gram(pts, vecs)
    amb = nk.opnorm(ks.gram - rk.ambient_gram(vecs))
    ok = ks.min_eigenvalue >= -1e-8 and amb <= 1e-9
    _dump({
        "pass": bool(ok),
        "seed": ctx.seed,
        "samples": args.samples,
        "gram": encode_matrix(ks.gram),
        "min_eigenvalue": ks.min_eigenvalue,
        "hermitian_residual": ks.hermitian_residual,
        "ambient_residual": amb,
    }, out)
    return EXIT_OK if ok else EXIT_FAIL


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="opalg", description="Numerical verification of dilations, coset geometry and kernel bundles.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, index=True):
        sp.add_argument("file", help="line-delimited JSON instance file")
        sp.add_argument("--seed", type=int, default=None, help=f"override the instance seed (and {SEED_ENV})")
        if index:
            sp.add_argument("--index", type=int, default=0, help="instance line to use (default 0)")

    v = sub.add_parser("verify", help="run verification suites and print a report")
    common(v, index=False)
    v.add_argument("--suite", action="append", default=None, help=f"one of {', '.join(SUITES)}, all (repeatable)")
    v.add_argument("--tol", type=float, default=None, help="replace every residual threshold by T")
    v.add_argument("--format", choices=("json", "text"), default="json")
    v.add_argument("--timings", action="store_true", help="include wall-clock timings")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("dilate", help="print Stinespring dimensions and residuals")
    common(d)
    d.add_argument("--matrices", action="store_true", help="also print V and the representation")
    d.set_defaults(func=cmd_dilate)

    pr = sub.add_parser("polar", help="print the (u, X, b) factorization of a target")
    common(pr)
    pr.add_argument("--target", type=int, required=True, help="index into the instance targets")
    pr.set_defaults(func=cmd_polar)

    k = sub.add_parser("kernel", help="print a kernel Gram matrix and its minimum eigenvalue")
    common(k)
    k.add_argument("--samples", type=int, default=8, help="number of coset points")
    k.set_defaults(func=cmd_kernel)
    return p


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "suite", "x") is None:
            args.suite = ["all"]
        if getattr(args, "tol", None) is not None and not args.tol > 0:
            raise InputError("--tol must be positive")
        return args.func(args, out)
    except (InputError, ParseError, ValidationError, UnknownSuite) as exc:
        err.write(f"opalg: error: {exc}\n")
        return EXIT_INPUT
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
