"""Assemble the flag-algebra SDP, exchange it with an external solver, read the answer back.

Variables ``x_i`` stand for the induced densities of the ``N``-vertex classes,
in :func:`enumerate_graphs` order.  The program is in the primal form

    minimize c . x   subject to   sum_i F_i x_i - F_0  PSD

with one block per flag basis and a final diagonal block for ``x_{K_1} = 1``
(and, optionally, ``x_i >= 0``).  Solutions come back in the CSDP layout:
the vector ``x`` on the first line, then ``1 b i j v`` entries for the slack
matrix and ``2 b i j v`` for the dual matrix ``Y``.
"""

from __future__ import annotations

import json
import shlex
import subprocess
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .algebra import FlagBasis, QuantumGraph, delta_restrict, format_quantum, lift, pair_form, parse_quantum, symmetry_split
from .certificate import Certificate, CertificateBlock, format_target
from .densities import StepGraphon
from .graphs import LabeledGraph, enumerate_graphs, enumerate_types, format_graph, parse_graph
from .linalg import nullspace, rref


class SdpError(ValueError):
    """Invalid problem shape (parity, sizes, missing blocks)."""


class SolutionFormatError(ValueError):
    """A solver solution file that does not match the problem."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


# -- building -----------------------------------------------------------------


def objective_for(target: QuantumGraph, n: int) -> list[Fraction]:
    """Coefficients of ``-lift(target, n)``; minimizing them maximizes ``t(target)``."""
    lifted = lift(target, n)
    return [-lifted.coefficient(h) for h in enumerate_graphs(n)]


def objective_for_inducibility(h: LabeledGraph, n: int) -> list[Fraction]:
    if h.k != 0:
        raise SdpError("target must be unlabeled")
    return objective_for(QuantumGraph.of(h), n)


def flag_size(n: int, k: int) -> int:
    return (n + k) // 2


def build_bases(
    n: int,
    max_labels: int,
    dedup_types: bool = False,
    split: bool = False,
    w0s: Sequence[StepGraphon] = (),
) -> list[FlagBasis]:
    """Flag bases for every type on 1..max_labels vertices, flags on floor((n+k)/2) vertices."""
    if not 1 <= max_labels <= n <= 7:
        raise SdpError(f"need 1 <= L <= N <= 7, got L={max_labels}, N={n}")
    bases = []
    for k in range(1, max_labels + 1):
        m = flag_size(n, k)
        for sigma in enumerate_types(k, dedup_types):
            full = FlagBasis.full(sigma, m)
            parts = list(symmetry_split(full)) if split else [full]
            for part in parts:
                part = delta_restrict(part, w0s)
                if len(part):
                    bases.append(part)
    return bases


@dataclass
class SdpBlock:
    basis: FlagBasis
    # entries[(u, v)] for u <= v: class index -> coefficient
    entries: dict[tuple[int, int], dict[int, Fraction]] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.basis)


@dataclass
class SdpProblem:
    n: int
    classes: list[LabeledGraph]
    objective: list[Fraction]
    blocks: list[SdpBlock]
    normalization: list[Fraction]
    nonnegative: bool = True
    target: QuantumGraph | None = None
    name: str = "sdp"

    @property
    def diagonal_size(self) -> int:
        return 2 + (len(self.classes) if self.nonnegative else 0)

    @property
    def block_sizes(self) -> list[int]:
        return [b.size for b in self.blocks] + [-self.diagonal_size]

    def constant_matrix_diagonal(self) -> list[Fraction]:
        return [Fraction(1), Fraction(-1)] + [Fraction(0)] * (self.diagonal_size - 2)

    def diagonal_coefficients(self, i: int) -> list[Fraction]:
        extra = [Fraction(int(j == i)) for j in range(len(self.classes))] if self.nonnegative else []
        return [self.normalization[i], -self.normalization[i]] + extra


def normalization_vector(n: int) -> list[Fraction]:
    one = lift(QuantumGraph.of(LabeledGraph(1, 0, 0)), n)
    return [one.coefficient(h) for h in enumerate_graphs(n)]


def assemble(
    objective: Sequence[Fraction],
    bases: Sequence[FlagBasis],
    n: int,
    nonnegative: bool = True,
    target: QuantumGraph | None = None,
    name: str = "sdp",
) -> SdpProblem:
    classes = enumerate_graphs(n)
    if len(objective) != len(classes):
        raise SdpError(f"objective has {len(objective)} entries, expected {len(classes)} for N={n}")
    if not bases:
        raise SdpError("at least one flag block is required")
    index = {h: i for i, h in enumerate(classes)}
    blocks = []
    for basis in bases:
        if 2 * basis.m - basis.k not in (n - 1, n):
            raise SdpError(f"flags on {basis.m} vertices with k={basis.k} do not match N={n}")
        block = SdpBlock(basis)
        z = basis.elements
        for u in range(len(z)):
            for v in range(u, len(z)):
                form = pair_form(z[u], z[v], n)
                block.entries[(u, v)] = {index[h]: c for h, c in form.terms.items()}
        blocks.append(block)
    return SdpProblem(n, classes, [Fraction(x) for x in objective], blocks, normalization_vector(n), nonnegative, target, name)


def inducibility_problem(
    h: LabeledGraph,
    n: int,
    max_labels: int,
    dedup_types: bool = False,
    split: bool = False,
    w0s: Sequence[StepGraphon] = (),
    nonnegative: bool = True,
) -> SdpProblem:
    bases = build_bases(n, max_labels, dedup_types, split, w0s)
    return assemble(objective_for_inducibility(h, n), bases, n, nonnegative, QuantumGraph.of(h), "inducibility")


def block_matrix(block: SdpBlock, x: Sequence[Fraction]) -> list[list[Fraction]]:
    """The block's matrix at the point ``x`` (exact)."""
    d = block.size
    out = [[Fraction(0)] * d for _ in range(d)]
    for (u, v), coeffs in block.entries.items():
        out[u][v] = out[v][u] = sum((c * x[i] for i, c in coeffs.items()), Fraction(0))
    return out


# -- SDPA emission -------------------------------------------------------------


def format_number(x: Fraction) -> str:
    """Exact decimal when the expansion terminates, otherwise 17 significant digits."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    d, twos, fives = x.denominator, 0, 0
    while d % 2 == 0:
        d, twos = d // 2, twos + 1
    while d % 5 == 0:
        d, fives = d // 5, fives + 1
    if d != 1:
        return format(float(x), ".17g")
    e = max(twos, fives)
    digits = str(abs(x.numerator) * 10**e // x.denominator).rjust(e + 1, "0")
    text = (digits[:-e] + "." + digits[-e:]).rstrip("0").rstrip(".")
    return "-" + text if x < 0 else text


def emit_sdpa(p: SdpProblem) -> str:
    lines = [str(len(p.classes)), str(len(p.blocks) + 1), " ".join(str(s) for s in p.block_sizes)]
    lines.append(" ".join(format_number(c) for c in p.objective))
    diag_block = len(p.blocks) + 1
    for j, v in enumerate(p.constant_matrix_diagonal(), 1):
        if v:
            lines.append(f"0 {diag_block} {j} {j} {format_number(v)}")
    per_var: list[list[tuple[int, int, int, Fraction]]] = [[] for _ in p.classes]
    for b, block in enumerate(p.blocks, 1):
        for (u, v), coeffs in sorted(block.entries.items()):
            for i, c in coeffs.items():
                per_var[i].append((b, u + 1, v + 1, c))
    for i in range(len(p.classes)):
        for b, u, v, c in sorted(per_var[i]):
            lines.append(f"{i + 1} {b} {u} {v} {format_number(c)}")
        for j, v in enumerate(p.diagonal_coefficients(i), 1):
            if v:
                lines.append(f"{i + 1} {diag_block} {j} {j} {format_number(v)}")
    return "\n".join(lines) + "\n"


@dataclass
class SdpaData:
    m: int
    block_sizes: list[int]
    objective: list[Fraction]
    # (matno, block, i, j) -> value, 1-based as in the file
    entries: dict[tuple[int, int, int, int], Fraction]


def read_sdpa(text: str) -> SdpaData:
    """Parse sparse SDPA produced by :func:`emit_sdpa` (comments and braces tolerated)."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        ln = raw.strip()
        if not ln or ln[0] in "*\"":
            continue
        for ch in "{},()":
            ln = ln.replace(ch, " ")
        rows.append((lineno, ln.split()))
    if len(rows) < 4:
        raise SolutionFormatError("SDPA text too short")
    try:
        m = int(rows[0][1][0])
        nblocks = int(rows[1][1][0])
        sizes = [int(t) for t in rows[2][1]]
        objective = [Fraction(t) for t in rows[3][1]]
    except (ValueError, IndexError) as exc:
        raise SolutionFormatError(f"bad SDPA header: {exc}") from exc
    if len(sizes) != nblocks or len(objective) != m:
        raise SolutionFormatError("SDPA header sizes disagree")
    entries = {}
    for lineno, tok in rows[4:]:
        if len(tok) != 5:
            raise SolutionFormatError(f"expected 5 fields, got {len(tok)}", lineno)
        try:
            key = tuple(int(t) for t in tok[:4])
            entries[key] = Fraction(tok[4])
        except ValueError as exc:
            raise SolutionFormatError(str(exc), lineno) from exc
    return SdpaData(m, sizes, objective, entries)


def sdpa_data(p: SdpProblem) -> SdpaData:
    """The exact content :func:`emit_sdpa` serializes, for round-trip checks."""
    entries = {}
    diag_block = len(p.blocks) + 1
    for j, v in enumerate(p.constant_matrix_diagonal(), 1):
        if v:
            entries[(0, diag_block, j, j)] = v
    for b, block in enumerate(p.blocks, 1):
        for (u, v), coeffs in block.entries.items():
            for i, c in coeffs.items():
                if c:
                    entries[(i + 1, b, u + 1, v + 1)] = c
    for i in range(len(p.classes)):
        for j, v in enumerate(p.diagonal_coefficients(i), 1):
            if v:
                entries[(i + 1, diag_block, j, j)] = v
    return SdpaData(len(p.classes), p.block_sizes, list(p.objective), entries)


# -- solutions -----------------------------------------------------------------


@dataclass
class SolverSolution:
    x: np.ndarray
    slack_blocks: list[np.ndarray]
    dual_blocks: list[np.ndarray]
    primal_objective: float
    dual_objective: float

    @property
    def bound(self) -> float:
        """Upper bound on the target density proved by the dual."""
        return -self.dual_objective


def parse_solution(text: str, p: SdpProblem, tolerance: float = 1e-6) -> SolverSolution:
    """Read a CSDP-style solution and check its duality gap against ``p``."""
    lines = [(i, ln.split()) for i, ln in enumerate(text.splitlines(), 1) if ln.strip()]
    if not lines:
        raise SolutionFormatError("empty solution file")
    lineno, first = lines[0]
    try:
        x = np.array([float(t) for t in first])
    except ValueError as exc:
        raise SolutionFormatError(f"bad primal vector: {exc}", lineno) from exc
    if len(x) != len(p.classes):
        raise SolutionFormatError(f"primal vector has {len(x)} entries, expected {len(p.classes)}", lineno)
    sizes = [abs(s) for s in p.block_sizes]
    mats = {1: [np.zeros((s, s)) for s in sizes], 2: [np.zeros((s, s)) for s in sizes]}
    for lineno, tok in lines[1:]:
        if len(tok) != 5:
            raise SolutionFormatError(f"expected 5 fields, got {len(tok)}", lineno)
        try:
            matno, blk, i, j = (int(t) for t in tok[:4])
            val = float(tok[4])
        except ValueError as exc:
            raise SolutionFormatError(str(exc), lineno) from exc
        if matno not in mats:
            raise SolutionFormatError(f"matrix number {matno} not in (1, 2)", lineno)
        if not 1 <= blk <= len(sizes):
            raise SolutionFormatError(f"block {blk} out of range 1..{len(sizes)}", lineno)
        s = sizes[blk - 1]
        if not (1 <= i <= s and 1 <= j <= s):
            raise SolutionFormatError(f"entry ({i}, {j}) outside block {blk} of size {s}", lineno)
        if p.block_sizes[blk - 1] < 0 and i != j:
            raise SolutionFormatError(f"off-diagonal entry in diagonal block {blk}", lineno)
        mats[matno][blk - 1][i - 1, j - 1] = val
        mats[matno][blk - 1][j - 1, i - 1] = val
    primal = float(np.dot([float(c) for c in p.objective], x))
    diag = mats[2][-1].diagonal()
    dual = float(np.dot([float(v) for v in p.constant_matrix_diagonal()], diag))
    if abs(primal - dual) > tolerance:
        raise SolutionFormatError(f"duality gap {abs(primal - dual):.3g} exceeds {tolerance:g} (primal {primal:.10g}, dual {dual:.10g})")
    return SolverSolution(x, mats[1][:-1], mats[2][:-1], primal, dual)


def _decimal_fraction(v: float) -> Fraction:
    # shortest repr keeps files readable; rounding happens later by design
    return Fraction(repr(float(v)))


def extract_certificate(s: SolverSolution, p: SdpProblem, name: str | None = None) -> Certificate:
    """Floating certificate: the dual blocks paired with their flag vectors."""
    if p.target is None:
        raise SdpError("problem has no target recorded")
    if len(s.dual_blocks) != len(p.blocks):
        raise SdpError("solution and problem disagree on block count")
    blocks = []
    for block, y in zip(p.blocks, s.dual_blocks):
        if y.shape != (block.size, block.size):
            raise SdpError(f"dual block of shape {y.shape} for basis of size {block.size}")
        sym = (y + y.T) / 2
        rows = [[_decimal_fraction(v) for v in row] for row in sym]
        blocks.append(CertificateBlock.build(block.basis.k, block.basis.elements, rows))
    return Certificate(name or p.name, p.target, p.n, _decimal_fraction(s.bound), tuple(blocks))


def eigen_form(y: np.ndarray, z: Sequence[QuantumGraph]) -> list[tuple[float, list[float]]]:
    """Eigenpairs ``(lambda, g)`` with ``Y = sum lambda g g^T``; ``g`` is in the coordinates of ``z``."""
    if len(z) != y.shape[0]:
        raise ValueError("dimension mismatch")
    vals, vecs = np.linalg.eigh((y + y.T) / 2)
    return [(float(vals[i]), [float(t) for t in vecs[:, i]]) for i in range(len(vals))]


# -- manifest ------------------------------------------------------------------


def manifest(p: SdpProblem) -> dict:
    return {
        "name": p.name,
        "n": p.n,
        "target": format_target(p.target) if p.target is not None else None,
        "nonnegative": p.nonnegative,
        "classes": [format_graph(h) for h in p.classes],
        "objective": [str(c) for c in p.objective],
        "blocks": [
            {
                "k": b.basis.k,
                "type": format_graph(b.basis.sigma),
                "flag_vertices": b.basis.m,
                "parity": b.basis.parity,
                "flags": [format_quantum(e) for e in b.basis.elements],
            }
            for b in p.blocks
        ],
    }


def dump_manifest(p: SdpProblem) -> str:
    return json.dumps(manifest(p), indent=1) + "\n"


def problem_from_manifest(text: str) -> SdpProblem:
    """Rebuild the problem skeleton (no coefficient matrices) needed to ingest a solution."""
    try:
        data = json.loads(text)
        n = int(data["n"])
        classes = [parse_graph(s) for s in data["classes"]]
        blocks = []
        for b in data["blocks"]:
            sigma = parse_graph(b["type"])
            elements = tuple(parse_quantum(s) for s in b["flags"])
            blocks.append(SdpBlock(FlagBasis(sigma, int(b["flag_vertices"]), elements, b["parity"])))
        target = parse_quantum(data["target"]) if data.get("target") else None
        objective = [Fraction(c) for c in data["objective"]]
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise SolutionFormatError(f"bad manifest: {exc}") from exc
    return SdpProblem(n, classes, objective, blocks, normalization_vector(n), bool(data.get("nonnegative", True)), target, data.get("name", "sdp"))


def run_solver(p: SdpProblem, command_template: str, workdir, stem: str = "problem") -> SolverSolution:
    """Write ``p`` to ``workdir``, run ``command_template`` on it, parse the solution."""
    workdir = Path(workdir)
    src, dst = workdir / f"{stem}.dat-s", workdir / f"{stem}.sol"
    src.write_text(emit_sdpa(p))
    # a stale answer from an earlier run must not pass for this one
    dst.unlink(missing_ok=True)
    command = command_template.format(input=shlex.quote(str(src)), output=shlex.quote(str(dst)))
    subprocess.run(command, shell=True, check=False)
    if not dst.exists():
        raise SolutionFormatError(f"solver produced no output file: {command}")
    return parse_solution(dst.read_text(), p)


# -- facial reduction -------------------------------------------------------------


def rational_kernel(y: np.ndarray, tol: float = 1e-4, cap: int = 24) -> list[list[Fraction]]:
    """Guess the kernel of a numerical PSD matrix as rows of small-denominator rationals.

    Eigenvectors with eigenvalue below ``tol`` are brought to reduced echelon
    form (largest available pivot first) and each entry is replaced by its best
    approximation with denominator at most ``cap``.  Nothing checks the guess;
    a wrong one shows up later as a worse bound.
    """
    vals, vecs = np.linalg.eigh(np.asarray(y, dtype=float))
    a = vecs[:, vals < tol].T.copy()
    pivots: list[int] = []
    for r in range(a.shape[0]):
        sub = np.abs(a[r:])
        sub[:, pivots] = 0
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        a[[r, r + i]] = a[[r + i, r]]
        a[r] /= a[r, j]
        for t in range(a.shape[0]):
            if t != r:
                a[t] -= a[t, j] * a[r]
        pivots.append(j)
    return [[Fraction(float(v)).limit_denominator(cap) for v in row] for row in a]


def reduce_bases(p: SdpProblem, s: SolverSolution, tol: float = 1e-4, cap: int = 24) -> list[FlagBasis]:
    """Restrict every block to the (guessed) range of its dual matrix; emptied blocks are dropped."""
    out = []
    for block, y in zip(p.blocks, s.dual_blocks):
        basis = block.basis
        kernel = rational_kernel(y, tol, cap)
        if not kernel:
            out.append(basis)
            continue
        keep = nullspace(kernel, len(basis))
        if not keep:
            continue
        coords = basis.coordinates()
        combos = [
            [sum((r[i] * coords[i][j] for i in range(len(r))), Fraction(0)) for j in range(len(coords[0]))]
            for r in keep
        ]
        out.append(basis.with_elements(rref(combos)[0]))
    return out


def facial_reduction(
    p: SdpProblem,
    command_template: str,
    workdir,
    rounds: int = 3,
    tol: float = 1e-4,
    cap: int = 24,
    drift: float = 1e-7,
    stem: str = "reduced",
) -> tuple[SdpProblem, SolverSolution]:
    """Solve, shrink each block to the range of its dual, re-solve; repeat until every block is well inside the cone.

    Interior-point answers to these programs sit on a face of the cone with
    eigenvalues of order sqrt(mu) in the directions that should be zero, which
    leaves no room for rounding.  After reduction the blocks are definite and
    :func:`flagsdp.certificate.project_round` can restore the tight slacks
    exactly.  A bound that gets worse by more than ``drift`` means a kernel
    was guessed wrong, and raises :class:`SdpError`.
    """
    s = run_solver(p, command_template, workdir, stem)
    first = s.bound
    for _ in range(rounds):
        if all(np.linalg.eigvalsh(y).min() >= tol for y in s.dual_blocks if y.size):
            break
        bases = reduce_bases(p, s, tol, cap)
        if not bases:
            raise SdpError("facial reduction removed every block")
        p = assemble(p.objective, bases, p.n, p.nonnegative, p.target, p.name)
        s = run_solver(p, command_template, workdir, stem)
        if s.bound > first + drift:
            raise SdpError(f"bound moved from {first:.12g} to {s.bound:.12g}; a kernel guess was wrong")
    return p, s
