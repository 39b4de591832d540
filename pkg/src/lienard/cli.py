"""Command-line entry point.

Exit status: 0 on success, 1 when a computation rejects its input, 2 on
malformed flags.  Floats are printed with 17 significant digits so that
output round-trips and repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import abelian, bounds, constructor, verifier
from .hamiltonian import OUTER, annuli, potential_of
from .poly import as_polynomial


def _fmt(x: float) -> str:
    if not math.isfinite(x):
        return json.dumps(str(x))
    s = format(x, ".17g")
    return s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k), ensure_ascii=False)}: {dumps(v, indent, _level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent, _level + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(float(obj))
    return json.dumps(obj, ensure_ascii=False)


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return v


def _finite(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError("must be finite")
    return v


def _poly_arg(text: str):
    try:
        return as_polynomial(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad coefficient list: {exc}") from None


def _x0_arg(text: str):
    return "auto" if text == "auto" else _finite(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lienard", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="lower bounds on H(n, m)")
    bsub = b.add_subparsers(dest="action", required=True)
    bt = bsub.add_parser("table")
    bt.add_argument("--n-max", type=_positive_int, required=True)
    bt.add_argument("--m-max", type=_positive_int, required=True)
    bt.add_argument("--format", choices=("csv", "json"), default="csv")
    bb = bsub.add_parser("best")
    bb.add_argument("--n", type=_positive_int, required=True)
    bb.add_argument("--m", type=_positive_int, required=True)

    a = sub.add_parser("abelian", help="I_j(h) on the outer annulus of G = int g")
    a.add_argument("action", nargs="?", choices=("fit",))
    a.add_argument("--g", type=_poly_arg, required=True)
    a.add_argument("--j", type=_nonneg_int, required=True)
    a.add_argument("--h", type=_finite)
    a.add_argument("--h-lo", type=_finite)
    a.add_argument("--h-hi", type=_finite)

    m = sub.add_parser("melnikov")
    msub = m.add_subparsers(dest="action", required=True)
    mp = msub.add_parser("profile")
    mp.add_argument("--system", type=Path, required=True)
    mp.add_argument("--annulus", required=True, help="index into the annulus list, or 'outer'")
    mp.add_argument("--h-lo", type=_finite, required=True)
    mp.add_argument("--h-hi", type=_finite, required=True)
    mp.add_argument("--points", type=_positive_int, default=64)
    mp.add_argument("--format", choices=("csv", "json"), default="csv")

    c = sub.add_parser("construct")
    csub = c.add_subparsers(dest="action", required=True)
    cs = csub.add_parser("step")
    cs.add_argument("--seed", type=Path, required=True)
    cs.add_argument("--parity", choices=("odd", "even"), required=True)
    cs.add_argument("--x0", type=_x0_arg, default="auto")
    cs.add_argument("--lambda", dest="lam", type=_finite)
    cs.add_argument("--mu-ratio", type=_finite, default=1e-2)
    cp = csub.add_parser("plan")
    cp.add_argument("--n0", type=_positive_int, required=True)
    cp.add_argument("--m0", type=_positive_int, required=True)
    cp.add_argument("--k0", type=_nonneg_int, required=True)
    cp.add_argument("--depth", type=_positive_int, required=True)
    cv = csub.add_parser("seed", help="the van der Pol seed system")
    cv.add_argument("--epsilon0", type=_finite, default=0.1)

    v = sub.add_parser("verify")
    vsub = v.add_subparsers(dest="action", required=True)
    vc = vsub.add_parser("cycles")
    vc.add_argument("--system", type=Path, required=True)
    vc.add_argument("--epsilon", type=_finite, required=True)
    vc.add_argument("--a-lo", type=_finite, required=True)
    vc.add_argument("--a-hi", type=_finite, required=True)
    vc.add_argument("--grid", type=_positive_int, default=32)
    return ap


def _validate(ap: argparse.ArgumentParser, args):
    if args.command == "abelian":
        if args.action == "fit":
            if args.h_lo is None or args.h_hi is None:
                ap.error("abelian fit needs --h-lo and --h-hi")
        elif args.h is None:
            ap.error("abelian needs --h")
    if args.command == "melnikov":
        if args.points < 8:
            ap.error("--points must be at least 8")
        if not args.h_lo < args.h_hi:
            ap.error("--h-lo must be below --h-hi")
        if args.annulus != "outer":
            try:
                if int(args.annulus) < 0:
                    raise ValueError
            except ValueError:
                ap.error("--annulus must be a non-negative index or 'outer'")
    if args.command == "construct" and args.action == "plan" and args.depth > constructor.MAX_DEPTH:
        ap.error(f"--depth must be at most {constructor.MAX_DEPTH}")
    if args.command == "construct" and args.action == "step" and not 0 < args.mu_ratio:
        ap.error("--mu-ratio must be positive")
    if args.command == "verify":
        if args.grid < 2:
            ap.error("--grid must be at least 2")
        if not args.a_lo < args.a_hi:
            ap.error("--a-lo must be below --a-hi")


def _load_system(path: Path) -> constructor.ConstructedSystem:
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path} is not valid JSON: {exc.msg}") from None
    return constructor.ConstructedSystem.from_dict(data)


def _run(args, out) -> None:
    if args.command == "bounds":
        if args.action == "best":
            out.write(dumps(bounds.best_bound(args.n, args.m).to_dict()) + "\n")
            return
        table = bounds.bound_table(args.n_max, args.m_max)
        if args.format == "csv":
            out.write("n,m,bound,source\n")
            for r in table:
                out.write(f"{r.n},{r.m},{r.value},{r.source}\n")
        else:
            out.write(dumps([r.to_dict() for r in table]) + "\n")
        return

    if args.command == "abelian":
        P = potential_of(args.g)
        A = next(A for A in annuli(P) if A.kind == OUTER)
        if args.action == "fit":
            e = abelian.fit_growth_exponent(P, A, args.j, (args.h_lo, args.h_hi))
            out.write(dumps({"j": args.j, "h_lo": args.h_lo, "h_hi": args.h_hi, "exponent": e}) + "\n")
        else:
            out.write(_fmt(abelian.abelian_integral(P, A, args.j, args.h)) + "\n")
        return

    if args.command == "melnikov":
        sys_ = _load_system(args.system)
        P = sys_.potential
        ann = annuli(P)
        if args.annulus == "outer":
            A = next(A for A in ann if A.kind == OUTER)
        else:
            idx = int(args.annulus)
            if idx >= len(ann):
                raise ValueError(f"annulus {idx} does not exist (system has {len(ann)})")
            A = ann[idx]
        pr = abelian.profile(sys_.F, P, A, args.h_lo, args.h_hi, args.points)
        if args.format == "csv":
            out.write(pr.to_csv())
        else:
            out.write(dumps({"annulus": A.to_dict(), "h": pr.h_grid.tolist(), "M": pr.values.tolist(),
                             "zeros": [{"h": z, "parity": p} for z, p in pr.zeros]}) + "\n")
        return

    if args.command == "construct":
        if args.action == "plan":
            plan = constructor.plan_recursion((args.n0, args.m0, args.k0), args.depth)
            levels = [[list(t) for t in plan.level(i)] for i in range(plan.depth + 1)]
            out.write(dumps({"seed": [args.n0, args.m0, args.k0], "depth": args.depth,
                             "leaves": [list(t) for t in plan.leaves()], "levels": levels}) + "\n")
        elif args.action == "seed":
            out.write(dumps(constructor.van_der_pol_seed(args.epsilon0).to_dict()) + "\n")
        else:
            seed = _load_system(args.seed)
            if seed.certificate is None or not seed.certificate.realized:
                # recompute the zero windows for a bare system
                if seed.certificate is None:
                    raise ValueError("seed file carries no certificate")
                c = seed.certificate
                seed = constructor.realize(seed, c.n, c.m, epsilon0=c.epsilon0 or 1.0)
            res = constructor.compose_step(seed, args.parity, lam=args.lam, mu_ratio=args.mu_ratio, x0=args.x0)
            out.write(dumps(res.to_dict()) + "\n")
        return

    if args.command == "verify":
        sys_ = _load_system(args.system)
        cc = verifier.count_limit_cycles(sys_, (args.a_lo, args.a_hi), args.epsilon, args.grid)
        out.write(dumps(cc.to_dict()) + "\n")
        return


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        _validate(ap, args)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        _run(args, out)
    except (ValueError, ArithmeticError, RuntimeError, LookupError) as exc:
        err.write(f"error: {exc}\n")
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
