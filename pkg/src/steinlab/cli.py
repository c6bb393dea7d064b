"""``steinlab`` command line.

Exit codes: 0 pass (or no verdict), 1 verdict fail, 2 usage error,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiments as ex
from .errors import InvalidParameter, KinkError, MomentMismatch, NotConverged, SupportTooLarge
from .quadrature import QuadratureSpec

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NOT_CONVERGED = 0, 1, 2, 3


def _csv(cast):
    def parse(text: str):
        try:
            return [cast(part) for part in text.split(",") if part.strip()]
        except ValueError as err:
            raise argparse.ArgumentTypeError(str(err))
    return parse


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    common.add_argument("--out", type=Path, help="write output to PATH instead of stdout")
    common.add_argument("--tol", type=float, default=1e-10,
                        help="absolute and relative quadrature tolerance (default 1e-10)")

    parser = argparse.ArgumentParser(prog="steinlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", parents=[common], help="Stein factors and kernel integrals")
    p.add_argument("--k", type=int, default=10, help="largest k (default 10)")

    p = sub.add_parser("sharpness", parents=[common], help="ramp family approaching c_k")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--a", type=_csv(float), default=list(ex.DEFAULT_A))

    p = sub.add_parser("jump", parents=[common], help="discontinuity of f^(k+1) at 0")
    p.add_argument("--k", type=int, default=1)

    p = sub.add_parser("moments", parents=[common], help="moment identity for W_n")
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--dist", default="rademacher")
    p.add_argument("--n", type=_csv(int), default=list(ex.DEFAULT_MOMENT_N))

    p = sub.add_parser("clt", parents=[common], help="i.i.d. bound versus exact expectation")
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--dist", default="rademacher")
    p.add_argument("--h", default="smooth_probe")
    p.add_argument("--n", type=_csv(int), default=list(ex.DEFAULT_CLT_N))

    p = sub.add_parser("bounds", parents=[common], help="sup-norms of orders k-1, k, k+1")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--h", default="smooth_probe")

    p = sub.add_parser("solve", parents=[common], help="evaluate f_h^(j) at points")
    p.add_argument("--h", default="monomial")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--j", type=int, default=0)
    p.add_argument("--p", type=int, default=0, help="monomial exponent minus one")
    p.add_argument("--a", type=_csv(float), default=[1.0], help="ramp half-width")
    p.add_argument("--x", type=_csv(float), default=[0.0])
    p.add_argument("--side", choices=("left", "right", "two-sided"), default="two-sided")
    return parser


def run(args: argparse.Namespace) -> ex.ExperimentReport:
    spec = QuadratureSpec(abs_tol=args.tol, rel_tol=args.tol)
    if args.command == "constants":
        return ex.cmd_constants(args.k)
    if args.command == "sharpness":
        return ex.cmd_sharpness(args.k, args.a, spec)
    if args.command == "jump":
        return ex.cmd_jump(args.k, spec=spec)
    if args.command == "moments":
        return ex.cmd_moments(args.p, args.dist, args.n)
    if args.command == "clt":
        return ex.cmd_clt(args.p, args.dist, args.h, args.n, spec)
    if args.command == "bounds":
        return ex.cmd_bounds(args.k, args.h, spec)
    params = {"k": args.k, "p": args.p, "a": args.a[0]}
    return ex.cmd_solve(args.h, params, args.j, args.x, args.side, spec)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = run(args)
    except NotConverged as err:
        print(f"steinlab: {err}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (InvalidParameter, KinkError, MomentMismatch, SupportTooLarge) as err:
        print(f"steinlab: {err}", file=sys.stderr)
        return EXIT_USAGE
    text = report.to_json() if args.json else report.to_csv()
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
