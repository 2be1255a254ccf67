"""Sum-of-squares certificates for density upper bounds, checked exactly.

A certificate claims ``t(target; w) <= bound`` for every graphon ``w``.  It
lists blocks of flag vectors ``z`` with symmetric matrices ``Y``; it is
accepted when every ``Y`` is PSD and, on the ``n``-vertex ind basis,

    bound * K_1 - target  >=  sum_blocks [[ z^T Y z ]]

holds coefficient by coefficient.  Since every ``Ind(H)`` has nonnegative
density, the residual is a nonnegative combination and the bound follows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .algebra import QuantumGraph, format_quantum, lift, pair_form, parse_quantum, quadratic_form
from .graphs import LabeledGraph, enumerate_graphs, format_graph
from .linalg import PsdResult, is_symmetric, psd_check_exact, rref


class CertificateFormatError(ValueError):
    """Raised when a certificate file cannot be read."""


class CertificateError(ValueError):
    """Raised for structurally invalid certificates during verification."""


@dataclass(frozen=True)
class CertificateBlock:
    k: int
    z: tuple[QuantumGraph, ...]
    Y: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        if len(self.Y) != len(self.z) or any(len(row) != len(self.z) for row in self.Y):
            raise CertificateFormatError(f"Y is {len(self.Y)}x? but the block has {len(self.z)} flag entries")
        if not is_symmetric(self.Y):
            raise CertificateFormatError("Y is not symmetric")
        if any(q.k != self.k for q in self.z):
            raise CertificateFormatError(f"flag entries with label counts other than k={self.k}")

    @classmethod
    def build(cls, k: int, z: Sequence[QuantumGraph], y: Sequence[Sequence]) -> "CertificateBlock":
        return cls(k, tuple(z), tuple(tuple(Fraction(x) for x in row) for row in y))

    @property
    def dim(self) -> int:
        return len(self.z)


@dataclass(frozen=True)
class Certificate:
    name: str
    target: QuantumGraph
    n: int
    bound: Fraction
    blocks: tuple[CertificateBlock, ...] = ()


@dataclass
class VerificationReport:
    classes: list[LabeledGraph]
    psd: list[PsdResult]
    alpha: list[Fraction]
    beta: list[Fraction]
    slack: list[Fraction] = field(init=False)

    def __post_init__(self) -> None:
        self.slack = [a - b for a, b in zip(self.alpha, self.beta)]

    @property
    def psd_ok(self) -> bool:
        return all(r.is_psd for r in self.psd)

    @property
    def dominance_ok(self) -> bool:
        return all(s >= 0 for s in self.slack)

    @property
    def accepted(self) -> bool:
        return bool(self.psd) and self.psd_ok and self.dominance_ok

    def worst(self) -> tuple[LabeledGraph, Fraction]:
        i = min(range(len(self.slack)), key=lambda t: (self.slack[t], t))
        return self.classes[i], self.slack[i]

    def failures(self) -> list[tuple[LabeledGraph, Fraction]]:
        return [(h, s) for h, s in zip(self.classes, self.slack) if s < 0]

    def summary(self) -> str:
        lines = []
        for b, r in enumerate(self.psd, 1):
            status = "PSD" if r.is_psd else "NOT PSD, witness " + " ".join(str(x) for x in r.witness)
            lines.append(f"block {b}: {status}")
        if not self.psd:
            lines.append("no blocks")
        h, s = self.worst()
        lines.append(f"classes: {len(self.classes)}, negative slacks: {len(self.failures())}")
        exact = str(s) if len(str(s)) <= 40 else "(long rational)"
        lines.append(f"worst slack: {exact} ~ {float(s):.6g} at {format_graph(h)}")
        lines.append("verdict: " + ("ACCEPTED" if self.accepted else "REJECTED"))
        return "\n".join(lines)


def target_vector(c: Certificate) -> QuantumGraph:
    """bound * K_1 - target, lifted to ``c.n`` vertices."""
    one = lift(QuantumGraph.of(LabeledGraph(1, 0, 0)), c.n).scale(c.bound)
    return one - lift(c.target, c.n)


def check_block(block: CertificateBlock, n: int) -> None:
    flags = [g for q in block.z for g in q.terms]
    if not flags:
        return
    types = {g.type_part() for g in flags}
    if len(types) > 1:
        raise CertificateError("flag entries of one block have different types: " + ", ".join(map(format_graph, sorted(types))))
    biggest = max(g.n for g in flags)
    if 2 * biggest - block.k > n:
        raise CertificateError(f"flags on {biggest} vertices with k={block.k} do not fit in {n} vertices")


def verify(c: Certificate) -> VerificationReport:
    """Exact check: PSD blocks and coefficientwise dominance on ``c.n`` vertices."""
    if c.target.k != 0:
        raise CertificateError("target must be unlabeled")
    for block in c.blocks:
        check_block(block, c.n)
    classes = enumerate_graphs(c.n)
    psd = [psd_check_exact(b.Y) for b in c.blocks]
    alpha = target_vector(c)
    beta = QuantumGraph.zero(0)
    for b in c.blocks:
        beta = beta + quadratic_form(b.z, b.Y, c.n)
    return VerificationReport(
        classes,
        psd,
        [alpha.coefficient(h) for h in classes],
        [beta.coefficient(h) for h in classes],
    )


def _rational(x, cap: int) -> Fraction:
    return Fraction(x).limit_denominator(cap)


def _apply_pins(b: int, y: list[list[Fraction]], pinned: Mapping[tuple[int, int, int], Fraction]) -> None:
    for (pb, i, j), v in pinned.items():
        if pb == b:
            y[i][j] = y[j][i] = Fraction(v)


def round_to_rational(
    c: Certificate,
    denominator_cap: int,
    pinned: Mapping[tuple[int, int, int], Fraction] | None = None,
    bound: Fraction | None = None,
) -> Certificate:
    """Replace each Y entry by its best rational approximation with bounded denominator.

    ``pinned`` maps ``(block, row, col)`` (0-based) to exact values which are
    forced, symmetrically.  The bound is rounded the same way unless given.
    No repair is attempted; :func:`verify` decides.
    """
    if denominator_cap < 1:
        raise ValueError("denominator cap must be at least 1")
    pinned = dict(pinned or {})
    blocks = []
    for b, block in enumerate(c.blocks):
        d = block.dim
        y = [[Fraction(0)] * d for _ in range(d)]
        for i in range(d):
            for j in range(i, d):
                y[i][j] = y[j][i] = _rational(block.Y[i][j], denominator_cap)
        _apply_pins(b, y, pinned)
        blocks.append(CertificateBlock.build(block.k, block.z, y))
    new_bound = Fraction(bound) if bound is not None else _rational(c.bound, denominator_cap)
    return Certificate(c.name, c.target, c.n, new_bound, tuple(blocks))


def eigen_round(
    c: Certificate,
    denominator_cap: int,
    pinned: Mapping[tuple[int, int, int], Fraction] | None = None,
    bound: Fraction | None = None,
    drop_below: float = 1e-9,
) -> Certificate:
    """Round each block in its eigenbasis: ``Y ~ sum lambda g g^T`` with rational ``lambda >= 0`` and ``g``.

    The result is PSD by construction (before pins), which entrywise rounding
    cannot promise for the singular blocks solvers return at the optimum.
    Eigenvalues at or below ``drop_below`` are discarded.
    """
    if denominator_cap < 1:
        raise ValueError("denominator cap must be at least 1")
    pinned = dict(pinned or {})
    blocks = []
    for b, block in enumerate(c.blocks):
        d = block.dim
        y = [[Fraction(0)] * d for _ in range(d)]
        if d:
            vals, vecs = np.linalg.eigh(np.array([[float(x) for x in row] for row in block.Y]))
            for lam, g in zip(vals, vecs.T):
                if lam <= drop_below:
                    continue
                scale = np.abs(g).max()
                gq = [_rational(float(x / scale), denominator_cap) for x in g]
                lq = _rational(float(lam * scale * scale), denominator_cap)
                for i in range(d):
                    for j in range(i, d):
                        y[i][j] += lq * gq[i] * gq[j]
            for i in range(d):
                for j in range(i):
                    y[i][j] = y[j][i]
        _apply_pins(b, y, pinned)
        blocks.append(CertificateBlock.build(block.k, block.z, y))
    new_bound = Fraction(bound) if bound is not None else _rational(c.bound, denominator_cap)
    return Certificate(c.name, c.target, c.n, new_bound, tuple(blocks))


def project_round(
    c: Certificate,
    denominator_cap: int,
    pinned: Mapping[tuple[int, int, int], Fraction] | None = None,
    bound: Fraction | None = None,
    tight_tol: float = 1e-7,
) -> Certificate:
    """Entrywise rounding, then an exact correction that puts the tight slacks back at zero.

    Classes whose slack in ``c`` (against the final bound) is below
    ``tight_tol`` in absolute value are the ones rounding would push negative.
    The unpinned ``Y`` entries receive the minimum-norm symmetric change that
    makes those slacks exactly zero.  The change is of the size of the rounding
    error, so it keeps blocks PSD only when they are safely definite; run
    :func:`flagsdp.sdp.facial_reduction` first.  Denominators of the result
    are not capped.
    """
    if denominator_cap < 1:
        raise ValueError("denominator cap must be at least 1")
    pinned = dict(pinned or {})
    new_bound = Fraction(bound) if bound is not None else _rational(c.bound, denominator_cap)
    before = verify(Certificate(c.name, c.target, c.n, new_bound, c.blocks))
    tight = [i for i, s in enumerate(before.slack) if abs(s) < tight_tol]
    rounded = round_to_rational(c, denominator_cap, pinned, new_bound)
    if not tight:
        return rounded
    slack = verify(rounded).slack
    index = {h: i for i, h in enumerate(before.classes)}
    fixed = {(b, min(i, j), max(i, j)) for b, i, j in pinned}
    unknowns, columns = [], []
    for b, block in enumerate(rounded.blocks):
        for u in range(block.dim):
            for v in range(u, block.dim):
                if (b, u, v) in fixed:
                    continue
                weight = 1 if u == v else 2
                form = pair_form(block.z[u], block.z[v], c.n)
                unknowns.append((b, u, v))
                columns.append({index[h]: weight * x for h, x in form.terms.items()})
    # beta grows by sum_j delta_j * column_j, so the tight slacks drop by the same
    system = [[col.get(h, Fraction(0)) for col in columns] + [slack[h]] for h in tight]
    reduced, pivots = rref(system)
    if len(unknowns) in pivots:
        raise CertificateError("the tight slacks cannot all be zeroed with the free entries")
    a = [row[:-1] for row in reduced]
    rhs = [row[-1] for row in reduced]
    gram = [[sum((x * y for x, y in zip(r1, r2)), Fraction(0)) for r2 in a] + [t] for r1, t in zip(a, rhs)]
    lam = [row[-1] for row in rref(gram)[0]]
    blocks = [[list(row) for row in block.Y] for block in rounded.blocks]
    for j, (b, u, v) in enumerate(unknowns):
        d = sum((a[i][j] * lam[i] for i in range(len(a))), Fraction(0))
        blocks[b][u][v] += d
        if u != v:
            blocks[b][v][u] += d
    out = tuple(CertificateBlock.build(old.k, old.z, y) for old, y in zip(rounded.blocks, blocks))
    return Certificate(c.name, c.target, c.n, new_bound, out)


def parse_pins(text: str) -> dict[tuple[int, int, int], Fraction]:
    """Pin file: lines ``block i j value`` with 1-based indices; ``#`` comments."""
    pins = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        ln = raw.split("#", 1)[0].split()
        if not ln:
            continue
        if len(ln) != 4:
            raise CertificateFormatError(f"pin line {lineno}: expected 'block i j value'")
        try:
            b, i, j = (int(t) - 1 for t in ln[:3])
            pins[(b, i, j)] = Fraction(ln[3])
        except (ValueError, ZeroDivisionError) as exc:
            raise CertificateFormatError(f"pin line {lineno}: {exc}") from exc
        if min(b, i, j) < 0:
            raise CertificateFormatError(f"pin line {lineno}: indices are 1-based")
    return pins


def check_pins(c: Certificate, pins: Mapping[tuple[int, int, int], Fraction]) -> None:
    for b, i, j in pins:
        if b >= len(c.blocks) or max(i, j) >= c.blocks[b].dim:
            raise CertificateFormatError(f"pin ({b + 1}, {i + 1}, {j + 1}) is outside the certificate")


# -- text format ---------------------------------------------------------------


def format_target(q: QuantumGraph) -> str:
    """A single graph with coefficient 1 is written bare."""
    if len(q.terms) == 1:
        ((g, coeff),) = q.terms.items()
        if coeff == 1:
            return format_graph(g)
    return format_quantum(q)


def save_certificate(c: Certificate) -> str:
    out = [
        f"name: {c.name}",
        f"target: {format_target(c.target)}",
        f"n: {c.n}",
        f"bound: {c.bound}",
    ]
    for block in c.blocks:
        out += ["", "block", f"k: {block.k}", "flags:"]
        out += [format_quantum(q) for q in block.z]
        out.append("Y:")
        out += [" ".join(str(x) for x in row) for row in block.Y]
    return "\n".join(out) + "\n"


def _header(lines: list[tuple[int, str]], pos: int, key: str) -> tuple[str, int]:
    if pos >= len(lines) or not lines[pos][1].startswith(key + ":"):
        where = f"line {lines[pos][0]}" if pos < len(lines) else "end of file"
        raise CertificateFormatError(f"expected '{key}:' at {where}")
    return lines[pos][1][len(key) + 1:].strip(), pos + 1


def load_certificate(text: str) -> Certificate:
    """Parse the textual certificate format; ``#`` starts a comment."""
    lines = [(i + 1, ln.split("#", 1)[0].strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, ln) for i, ln in lines if ln]
    try:
        name, pos = _header(lines, 0, "name")
        target_text, pos = _header(lines, pos, "target")
        n_text, pos = _header(lines, pos, "n")
        bound_text, pos = _header(lines, pos, "bound")
        target = parse_quantum(target_text)
        n, bound = int(n_text), Fraction(bound_text)
    except (ValueError, ZeroDivisionError) as exc:
        raise CertificateFormatError(str(exc)) from exc
    if target.k != 0:
        raise CertificateFormatError("target must be an unlabeled graph")
    blocks = []
    while pos < len(lines):
        lineno, ln = lines[pos]
        if ln != "block":
            raise CertificateFormatError(f"line {lineno}: expected 'block', got {ln!r}")
        pos += 1
        k_text, pos = _header(lines, pos, "k")
        _, pos = _header(lines, pos, "flags")
        z = []
        while pos < len(lines) and lines[pos][1] != "Y:":
            lineno, ln = lines[pos]
            try:
                z.append(parse_quantum(ln))
            except ValueError as exc:
                raise CertificateFormatError(f"line {lineno}: {exc}") from exc
            pos += 1
        _, pos = _header(lines, pos, "Y")
        rows = []
        for _ in range(len(z)):
            if pos >= len(lines):
                raise CertificateFormatError("truncated Y matrix")
            lineno, ln = lines[pos]
            try:
                rows.append([Fraction(t) for t in ln.split()])
            except (ValueError, ZeroDivisionError) as exc:
                raise CertificateFormatError(f"line {lineno}: {exc}") from exc
            pos += 1
        k = int(k_text)
        if any(q.k != k for q in z):
            raise CertificateFormatError(f"block ending at line {lineno} mixes label counts (k={k})")
        blocks.append(CertificateBlock.build(k, z, rows))
    return Certificate(name, target, n, bound, tuple(blocks))


def read_certificate(path) -> Certificate:
    return load_certificate(Path(path).read_text())


def shipped_certificate(name: str) -> Certificate:
    """Certificates bundled with the package: ``paw`` and ``k112``."""
    return read_certificate(Path(__file__).parent / "data" / f"{name}.cert")
