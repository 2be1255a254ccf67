"""Solve a sparse SDPA file with cvxopt and write a CSDP-style solution.

    python scripts/cvxopt_sdpa_solver.py problem.dat-s problem.sol

Usable as the ``--solver-cmd`` template:
``"python3 scripts/cvxopt_sdpa_solver.py {input} {output}"``.
"""

import argparse
import sys
from pathlib import Path

import numpy as np
from cvxopt import matrix, solvers

from flagsdp.sdp import read_sdpa


def solve(text: str, abstol: float = 1e-9, reltol: float = 1e-9, feastol: float = 1e-9, verbose: bool = False):
    data = read_sdpa(text)
    m, sizes = data.m, data.block_sizes
    dense = [(b, s) for b, s in enumerate(sizes, 1) if s > 0]
    diag = [(b, -s) for b, s in enumerate(sizes, 1) if s < 0]
    f = {b: np.zeros((m + 1, abs(s), abs(s))) for b, s in enumerate(sizes, 1)}
    for (matno, b, i, j), v in data.entries.items():
        f[b][matno, i - 1, j - 1] = float(v)
        f[b][matno, j - 1, i - 1] = float(v)

    # cvxopt: G x + s = h with s in the cone; here s = sum F_i x_i - F_0
    gs = [matrix(-f[b][1:].reshape(m, s * s).T) for b, s in dense]
    hs = [matrix(-f[b][0]) for b, s in dense]
    gl_rows = [(-np.array([f[b][i + 1].diagonal() for i in range(m)]).T, -f[b][0].diagonal()) for b, s in diag]
    gl = matrix(np.vstack([g for g, _ in gl_rows])) if gl_rows else matrix(np.zeros((0, m)))
    hl = matrix(np.concatenate([h for _, h in gl_rows])) if gl_rows else matrix(np.zeros((0, 1)))
    c = matrix(np.array([float(x) for x in data.objective]))

    solvers.options.update(abstol=abstol, reltol=reltol, feastol=feastol, show_progress=verbose, maxiters=200)
    sol = solvers.sdp(c, Gl=gl, hl=hl, Gs=gs, hs=hs)
    if sol["status"] != "optimal":
        print(f"cvxopt status: {sol['status']}", file=sys.stderr)

    x = np.array(sol["x"]).ravel()
    slack, dual = {}, {}
    for (b, s), sv, zv in zip(dense, sol["ss"], sol["zs"]):
        slack[b] = np.array(sv).reshape(s, s)
        dual[b] = np.array(zv).reshape(s, s)
    offset = 0
    for b, s in diag:
        slack[b] = np.diag(np.array(sol["sl"]).ravel()[offset:offset + s])
        dual[b] = np.diag(np.array(sol["zl"]).ravel()[offset:offset + s])
        offset += s
    return x, slack, dual, sizes, sol["status"]


def format_solution(x, slack, dual, sizes) -> str:
    lines = [" ".join(f"{v:.17g}" for v in x)]
    for matno, mats in ((1, slack), (2, dual)):
        for b, s in enumerate(sizes, 1):
            a = mats[b]
            for i in range(abs(s)):
                for j in range(i, abs(s)):
                    if (s < 0 and i != j) or a[i, j] == 0:
                        continue
                    lines.append(f"{matno} {b} {i + 1} {j + 1} {a[i, j]:.17g}")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("input")
    ap.add_argument("output")
    ap.add_argument("--tol", type=float, default=1e-9)
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    x, slack, dual, sizes, status = solve(Path(args.input).read_text(), args.tol, args.tol, args.tol, args.verbose)
    Path(args.output).write_text(format_solution(x, slack, dual, sizes))
    return 0 if status == "optimal" else 1


if __name__ == "__main__":
    sys.exit(main())
