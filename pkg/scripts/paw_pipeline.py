"""Paw (triangle plus pendant edge) end to end: build, solve, reduce, round, verify.

The first solve returns a floating bound near 1/32, but its dual blocks have
eigenvalues around 1e-6 where the exact optimum has zeros, so entrywise
rounding breaks positivity.  Facial reduction re-solves on the range of each
block; the tight slacks are then restored exactly after rounding, which gives
an exact certificate for 1/32 itself.
"""

import argparse
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

from flagsdp.certificate import parse_pins, project_round, round_to_rational, save_certificate, verify
from flagsdp.graphs import canonical, parse_graph
from flagsdp.sdp import extract_certificate, facial_reduction, inducibility_problem, run_solver

SOLVER = f"{sys.executable} {Path(__file__).with_name('cvxopt_sdpa_solver.py')} {{input}} {{output}}"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=5)
    ap.add_argument("--l", type=int, default=3)
    ap.add_argument("--cap", type=int, default=10**4)
    ap.add_argument("--bound", default="1/32", help="exact bound to certify")
    ap.add_argument("--pin", help="pin file for the reduced problem's blocks")
    ap.add_argument("--out", help="write the exact certificate here")
    args = ap.parse_args(argv)

    paw = canonical(parse_graph("{ab, ac, bc, cd}_{4,0}"))
    problem = inducibility_problem(paw, args.n, args.l, dedup_types=True)
    bound = Fraction(args.bound)
    pins = parse_pins(Path(args.pin).read_text()) if args.pin else {}
    with tempfile.TemporaryDirectory() as tmp:
        first = run_solver(problem, SOLVER, tmp, "paw")
        print(f"floating bound: {first.bound:.12f} (1/32 = {1 / 32})")
        naive = verify(round_to_rational(extract_certificate(first, problem, "paw"), args.cap, bound=bound))
        print(f"entrywise rounding at cap {args.cap}: {'accepted' if naive.accepted else 'rejected'}")

        reduced, s = facial_reduction(problem, SOLVER, tmp)
    print(f"after facial reduction: blocks {reduced.block_sizes[:-1]}, bound {s.bound:.12f}")
    exact = project_round(extract_certificate(s, reduced, "paw"), args.cap, pins, bound=bound)
    report = verify(exact)
    print(f"rounded at cap {args.cap} and projected, bound {bound}:")
    print(report.summary())
    if args.out:
        Path(args.out).write_text(save_certificate(exact))
    return 0 if report.accepted else 1


if __name__ == "__main__":
    sys.exit(main())
