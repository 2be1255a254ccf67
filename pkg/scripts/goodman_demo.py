"""Goodman's inequality t(K3) - 2 t(K2)^2 + t(K2) >= 0 by the SDP method.

Builds the program on 4-vertex graphs with types up to 2 labels, solves it
with the bundled cvxopt bridge, shrinks the blocks by facial reduction,
rounds with exact projection and verifies the certificate for bound 0.
"""

import argparse
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

from flagsdp.algebra import parse_quantum, to_ind
from flagsdp.certificate import project_round, save_certificate, verify
from flagsdp.sdp import assemble, build_bases, extract_certificate, facial_reduction, objective_for

SOLVER = f"{sys.executable} {Path(__file__).with_name('cvxopt_sdpa_solver.py')} {{input}} {{output}}"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--l", type=int, default=2)
    ap.add_argument("--cap", type=int, default=10**4)
    ap.add_argument("--out", help="write the exact certificate here")
    args = ap.parse_args(argv)

    f = parse_quantum("1*{ab, ac, bc}_{3,0} - 2*{ab, cd}_{4,0} + 1*{ab}_{2,0}", "plain")
    target = -to_ind(f)  # max t(-f) <= 0  is  min t(f) >= 0
    problem = assemble(objective_for(target, args.n), build_bases(args.n, args.l), args.n, True, target, "goodman")
    with tempfile.TemporaryDirectory() as tmp:
        reduced, solution = facial_reduction(problem, SOLVER, tmp, stem="goodman")
    print(f"floating bound on t(-f): {solution.bound:.3e}, reduced blocks {reduced.block_sizes[:-1]}")

    floating = extract_certificate(solution, reduced)
    exact = project_round(floating, args.cap, bound=Fraction(0))
    report = verify(exact)
    print(report.summary())
    if args.out:
        Path(args.out).write_text(save_certificate(exact))
    return 0 if report.accepted else 1


if __name__ == "__main__":
    sys.exit(main())
