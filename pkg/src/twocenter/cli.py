"""
Command-line interface: ``twocenter {solve,symmetric,density,verify,mathieu}``.

Exit codes
----------
0  success
2  invalid flags or input file
3  no solution found
4  equal charges given to ``solve`` (use ``symmetric``)
5  ``verify`` found a residual above the tolerance
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence
from fractions import Fraction
from pathlib import Path

from .errors import SymmetricCaseError, TwoCenterError
from .records import RecordError, dumps, from_record, load_records

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_EMPTY = 3
EXIT_SYMMETRIC = 4
EXIT_RESIDUAL = 5


def _charge(text: str) -> Fraction:
    """Charges are parsed exactly: '5', '1/2' and '0.25' are all rational."""
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"charge must be positive, got {text}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _summary(solutions) -> None:
    for i, s in enumerate(solutions):
        print(f"[{i}] E={float(s.energy):.10g} R={float(s.R):.10g} lambda={float(s.lam):.10g} "
              f"{s.provenance.get('radial')} x {s.provenance.get('angular')}", file=sys.stderr)


def cmd_solve(args: argparse.Namespace) -> int:
    from .matching import find_elementary_solutions
    from .separation import CenterPair

    try:
        sols = find_elementary_solutions(CenterPair(args.z1, args.z2), n_max=args.n_max, r_max=args.r_max,
                                         tol=args.tol)
    except SymmetricCaseError as exc:
        print(f"error: {exc}. Equal charges are handled by the 'symmetric' command.", file=sys.stderr)
        return EXIT_SYMMETRIC
    _emit(dumps(sols), args.out)
    _summary(sols)
    if not sols:
        print("no elementary solutions found", file=sys.stderr)
        return EXIT_EMPTY
    return EXIT_OK


def cmd_symmetric(args: argparse.Namespace) -> int:
    from .symmetric import find_symmetric_solutions

    sols = find_symmetric_solutions(args.z, nr_max=args.nr_max, mathieu_n_max=args.mathieu_n_max,
                                    r_max=args.r_max, tol=args.tol)
    _emit(dumps(sols), args.out)
    _summary(sols)
    if not sols:
        print("no mixed solutions found", file=sys.stderr)
        return EXIT_EMPTY
    return EXIT_OK


def _load(path: str) -> list:
    return load_records(path)


def cmd_density(args: argparse.Namespace) -> int:
    from .evaluate import density_grid

    records = _load(args.solution_file)
    if not 0 <= args.index < len(records):
        print(f"error: index {args.index} out of range (file has {len(records)} records)", file=sys.stderr)
        return EXIT_USAGE
    sol = from_record(records[args.index])
    grid = density_grid(sol, args.window, args.nx, args.ny)
    grid.write_csv(args.out)
    print(f"wrote {args.nx}x{args.ny} grid over {grid.window} to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    from .evaluate import pde_residual

    records = _load(args.solution_file)
    if not records:
        print("error: solution file holds no records", file=sys.stderr)
        return EXIT_USAGE
    worst = 0.0
    for i, rec in enumerate(records):
        sol = from_record(rec)
        res = pde_residual(sol, sample_count=args.samples, seed=args.seed)
        worst = max(worst, res)
        status = "ok" if res < args.tolerance else "FAIL"
        print(f"[{i}] E={float(sol.energy):.10g} R={float(sol.R):.10g} residual={res:.3e} {status}")
    return EXIT_OK if worst < args.tolerance else EXIT_RESIDUAL


def cmd_mathieu(args: argparse.Namespace) -> int:
    from .mathieu import char_value

    ch = char_value(args.parity, args.order, args.p)
    print(f"{ch.label}({ch.p!r}) = {ch.value!r}")
    print(f"truncation = {ch.truncation}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twocenter",
                                     description="Elementary eigenfunctions of the planar two-Coulomb-center problem.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="elementary (polynomial x polynomial) solutions for Z1 != Z2")
    p.add_argument("--z1", type=_charge, required=True)
    p.add_argument("--z2", type=_charge, required=True)
    p.add_argument("--n-max", type=_non_negative_int, default=6, help="largest radial n1 = 2 n + gamma + delta")
    p.add_argument("--r-max", type=_positive_float, default=None)
    p.add_argument("--tol", type=_positive_float, default=1e-12)
    p.add_argument("--out", default=None, help="JSON output path (default: stdout)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("symmetric", help="mixed radial x Mathieu solutions for Z1 = Z2 = Z")
    p.add_argument("--z", type=_charge, required=True)
    p.add_argument("--nr-max", type=_non_negative_int, default=2)
    p.add_argument("--mathieu-n-max", type=_non_negative_int, default=2)
    p.add_argument("--r-max", type=_positive_float, default=None)
    p.add_argument("--tol", type=_positive_float, default=1e-12)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_symmetric)

    p = sub.add_parser("density", help="sample the normalized density of one stored solution to CSV")
    p.add_argument("--solution-file", required=True)
    p.add_argument("--index", type=_non_negative_int, default=0)
    p.add_argument("--window", type=float, nargs=4, metavar=("X1MIN", "X1MAX", "X2MIN", "X2MAX"), default=None)
    p.add_argument("--nx", type=int, default=201)
    p.add_argument("--ny", type=int, default=201)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("verify", help="check stored solutions against the full two-center equation")
    p.add_argument("--solution-file", required=True)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=_positive_float, default=1e-5)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("mathieu", help="Mathieu characteristic value a_n(p) or b_n(p)")
    p.add_argument("--parity", required=True, choices=["a", "b", "cosine", "sine", "ce", "se"])
    p.add_argument("--order", type=_non_negative_int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.set_defaults(func=cmd_mathieu)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (RecordError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TwoCenterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
