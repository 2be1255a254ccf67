"""Quantum graphs over canonical partially labeled graphs.

Coefficients are exact rationals.  Elements of the quotient algebra are held
in the ``ind`` basis: ``Ind(F)`` for canonical ``F``.  Two such elements are
equal as quantum graphs exactly when their coordinates agree after lifting to
a common vertex count.

Products follow the convention in which ``Ind(F) * Ind(G)`` is the sum over
all edge patterns between the unlabeled parts, and unlabeling carries
coefficients unchanged.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from . import linalg
from .densities import StepGraphon, eval_quantum_rooted, label_assignments
from .graphs import LabeledGraph, automorphisms, canonical, enumerate_flags, format_graph, pair_bit, pair_list, parse_graph

BASES = ("plain", "ind")


@dataclass(frozen=True)
class QuantumGraph:
    """Finite rational combination of canonical ``k``-labeled graphs."""

    k: int
    basis: str = "ind"
    terms: Mapping[LabeledGraph, Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}")
        clean = {}
        for g, c in self.terms.items():
            if g.k != self.k:
                raise ValueError(f"term {format_graph(g)} has {g.k} labels, expected {self.k}")
            c = Fraction(c)
            if c:
                g = canonical(g)
                clean[g] = clean.get(g, 0) + c
        object.__setattr__(self, "terms", {g: c for g, c in sorted(clean.items()) if c})

    @classmethod
    def of(cls, g: LabeledGraph, coeff=1, basis: str = "ind") -> "QuantumGraph":
        return cls(g.k, basis, {g: Fraction(coeff)})

    @classmethod
    def zero(cls, k: int = 0, basis: str = "ind") -> "QuantumGraph":
        return cls(k, basis, {})

    @classmethod
    def from_counts(cls, k: int, basis: str, pairs: Iterable[tuple[LabeledGraph, Fraction]]) -> "QuantumGraph":
        acc: dict[LabeledGraph, Fraction] = defaultdict(Fraction)
        for g, c in pairs:
            acc[g] += c
        return cls(k, basis, acc)

    def _check(self, other: "QuantumGraph") -> None:
        if (self.k, self.basis) != (other.k, other.basis):
            raise ValueError("quantum graphs differ in label count or basis")

    def __add__(self, other: "QuantumGraph") -> "QuantumGraph":
        self._check(other)
        return QuantumGraph.from_counts(self.k, self.basis, [*self.terms.items(), *other.terms.items()])

    def __neg__(self) -> "QuantumGraph":
        return QuantumGraph(self.k, self.basis, {g: -c for g, c in self.terms.items()})

    def __sub__(self, other: "QuantumGraph") -> "QuantumGraph":
        return self + (-other)

    def scale(self, s) -> "QuantumGraph":
        s = Fraction(s)
        return QuantumGraph(self.k, self.basis, {g: s * c for g, c in self.terms.items()})

    __rmul__ = scale

    def __mul__(self, other):
        if isinstance(other, QuantumGraph):
            return product_ind(self, other) if self.basis == "ind" else product_plain(self, other)
        return self.scale(other)

    def __bool__(self) -> bool:
        return bool(self.terms)

    @property
    def max_vertices(self) -> int:
        return max((g.n for g in self.terms), default=0)

    def coefficient(self, g: LabeledGraph) -> Fraction:
        return self.terms.get(canonical(g), Fraction(0))

    def __str__(self) -> str:
        return format_quantum(self)


def format_quantum(q: QuantumGraph) -> str:
    """``coeff*graph`` entries joined by `` + `` / `` - ``; ``0`` when empty."""
    if not q.terms:
        return "0"
    parts = []
    for i, (g, c) in enumerate(q.terms.items()):
        sign = "-" if c < 0 else "+"
        body = f"{abs(c)}*{format_graph(g)}"
        parts.append(("-" + body) if i == 0 and c < 0 else body if i == 0 else f"{sign} {body}")
    return " ".join(parts)


def parse_quantum(text: str, basis: str = "ind") -> QuantumGraph:
    """Inverse of :func:`format_quantum`; a missing coefficient means 1."""
    text = text.strip()
    if text == "0":
        raise ValueError("the zero quantum graph has no label count; give at least one term")
    items: list[tuple[int, str]] = []
    depth, sign = 0, 1
    buf = ""
    for ch in text:
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
        if depth == 0 and ch in "+-" and buf.strip():
            items.append((sign, buf))
            sign, buf = (1 if ch == "+" else -1), ""
            continue
        if depth == 0 and ch in "+-" and not buf.strip():
            sign *= 1 if ch == "+" else -1
            continue
        buf += ch
    if buf.strip():
        items.append((sign, buf))
    if not items:
        raise ValueError(f"empty quantum graph {text!r}")
    terms = []
    for s, body in items:
        body = body.strip()
        if "*" in body:
            coeff, graph = body.split("*", 1)
            c = Fraction(coeff.strip())
        else:
            c, graph = Fraction(1), body
        terms.append((parse_graph(graph), s * c))
    ks = {g.k for g, _ in terms}
    if len(ks) != 1:
        raise ValueError(f"mixed label counts in {text!r}")
    return QuantumGraph.from_counts(ks.pop(), basis, [(canonical(g), c) for g, c in terms])


def _as_quantum(x, basis: str) -> QuantumGraph:
    if isinstance(x, QuantumGraph):
        if x.basis != basis:
            raise ValueError(f"expected a quantum graph in the {basis} basis")
        return x
    return QuantumGraph.of(canonical(x), basis=basis)


# -- zeta / Moebius transforms ----------------------------------------------


def _supergraphs(h: LabeledGraph):
    missing = [pair_bit(h.n, *p) for p in pair_list(h.n) if not h.adj(*p)]
    for r in range(len(missing) + 1):
        for extra in combinations(missing, r):
            yield LabeledGraph(h.n, h.k, h.bits | sum(extra)), r


@lru_cache(maxsize=None)
def ind_expand(h: LabeledGraph) -> QuantumGraph:
    """Ind(h) written in the plain basis (Moebius inversion over supergraphs)."""
    return QuantumGraph.from_counts(h.k, "plain", [(canonical(f), Fraction((-1) ** r)) for f, r in _supergraphs(h)])


@lru_cache(maxsize=None)
def zeta_expand(h: LabeledGraph) -> QuantumGraph:
    """The plain graph ``h`` written in the ind basis."""
    return QuantumGraph.from_counts(h.k, "ind", [(canonical(f), Fraction(1)) for f, _ in _supergraphs(h)])


def to_plain(q: QuantumGraph) -> QuantumGraph:
    if q.basis == "plain":
        return q
    out = QuantumGraph.zero(q.k, "plain")
    for g, c in q.terms.items():
        out = out + ind_expand(g).scale(c)
    return out


def to_ind(q: QuantumGraph) -> QuantumGraph:
    if q.basis == "ind":
        return q
    out = QuantumGraph.zero(q.k, "ind")
    for g, c in q.terms.items():
        out = out + zeta_expand(g).scale(c)
    return out


# -- products ----------------------------------------------------------------


def _glue(f: LabeledGraph, g: LabeledGraph) -> tuple[int, list[tuple[int, int]], list[tuple[int, int]]]:
    """Vertex count, fixed edges and free cross pairs of the glued product."""
    k = f.k
    a, b = f.n - k, g.n - k
    n = k + a + b
    shift = {v: v if v < k else v + a for v in range(g.n)}
    edges = f.edges() + [(shift[u], shift[v]) for u, v in g.edges() if u >= k or v >= k]
    cross = [(u, v) for u in range(k, k + a) for v in range(k + a, n)]
    return n, edges, cross


def product_plain_graphs(f: LabeledGraph, g: LabeledGraph) -> LabeledGraph:
    """Glue along the labels; label-label edges are merged."""
    if f.k != g.k:
        raise ValueError(f"label counts differ: {f.k} vs {g.k}")
    n, edges, _ = _glue(f, g)
    k = f.k
    edges += [(u, v) for u, v in g.edges() if v < k]
    return canonical(LabeledGraph.from_edges(n, set(edges), k))


@lru_cache(maxsize=None)
def _product_ind_flags(f: LabeledGraph, g: LabeledGraph) -> tuple[tuple[LabeledGraph, int], ...]:
    if f.type_part() != g.type_part():
        return ()
    n, edges, cross = _glue(f, g)
    counts: dict[LabeledGraph, int] = defaultdict(int)
    for mask in range(1 << len(cross)):
        extra = [p for t, p in enumerate(cross) if mask >> t & 1]
        counts[canonical(LabeledGraph.from_edges(n, edges + extra, f.k))] += 1
    return tuple(sorted(counts.items()))


def product_ind_graphs(f: LabeledGraph, g: LabeledGraph) -> QuantumGraph:
    """Ind(f) * Ind(g); zero when the labeled parts differ."""
    if f.k != g.k:
        raise ValueError(f"label counts differ: {f.k} vs {g.k}")
    f, g = canonical(f), canonical(g)
    if g < f:
        f, g = g, f
    return QuantumGraph(f.k, "ind", {h: Fraction(c) for h, c in _product_ind_flags(f, g)})


def product_ind(x, y) -> QuantumGraph:
    """Bilinear extension of :func:`product_ind_graphs`."""
    x, y = _as_quantum(x, "ind"), _as_quantum(y, "ind")
    if x.k != y.k:
        raise ValueError(f"label counts differ: {x.k} vs {y.k}")
    pairs = []
    for f, a in x.terms.items():
        for g, b in y.terms.items():
            pairs += [(h, a * b * c) for h, c in product_ind_graphs(f, g).terms.items()]
    return QuantumGraph.from_counts(x.k, "ind", pairs)


def product_plain(x, y) -> QuantumGraph:
    x, y = _as_quantum(x, "plain"), _as_quantum(y, "plain")
    if x.k != y.k:
        raise ValueError(f"label counts differ: {x.k} vs {y.k}")
    pairs = [(product_plain_graphs(f, g), a * b) for f, a in x.terms.items() for g, b in y.terms.items()]
    return QuantumGraph.from_counts(x.k, "plain", pairs)


# -- lifting and unlabeling ----------------------------------------------------


@lru_cache(maxsize=None)
def _lift_once(h: LabeledGraph) -> tuple[tuple[LabeledGraph, int], ...]:
    counts: dict[LabeledGraph, int] = defaultdict(int)
    for mask in range(1 << h.n):
        nbrs = [v for v in range(h.n) if mask >> v & 1]
        counts[canonical(h.add_vertex(nbrs))] += 1
    return tuple(sorted(counts.items()))


def lift(q: QuantumGraph, n_target: int) -> QuantumGraph:
    """Rewrite every term on exactly ``n_target`` vertices (Ind(H) = sum over one-vertex extensions)."""
    q = _as_quantum(q, "ind")
    if q.max_vertices > n_target:
        raise ValueError(f"term with {q.max_vertices} vertices exceeds target {n_target}")
    while any(g.n < n_target for g in q.terms):
        pairs = []
        for g, c in q.terms.items():
            if g.n == n_target:
                pairs.append((g, c))
            else:
                pairs += [(h, c * m) for h, m in _lift_once(g)]
        q = QuantumGraph.from_counts(q.k, "ind", pairs)
    return q


def unlabel(q: QuantumGraph) -> QuantumGraph:
    """Forget labels; in the ind basis coefficients carry over unchanged."""
    q = _as_quantum(q, "ind")
    return QuantumGraph.from_counts(0, "ind", [(canonical(g.unlabeled()), c) for g, c in q.terms.items()])


@lru_cache(maxsize=None)
def _pair_form(f: LabeledGraph, g: LabeledGraph, n_target: int) -> QuantumGraph:
    # unlabel before lifting: the lift commutes with unlabeling and is much
    # cheaper on unlabeled classes
    prod = product_ind_graphs(f, g)
    if prod.max_vertices > n_target:
        raise ValueError(f"product of {format_graph(f)} and {format_graph(g)} exceeds {n_target} vertices")
    return lift(unlabel(prod), n_target) if prod else QuantumGraph.zero(0)


def pair_form(x: QuantumGraph, y: QuantumGraph, n_target: int) -> QuantumGraph:
    """[[x * y]] lifted to ``n_target`` vertices."""
    pairs = []
    for f, a in x.terms.items():
        for g, b in y.terms.items():
            f0, g0 = (f, g) if f <= g else (g, f)
            pairs += [(h, a * b * c) for h, c in _pair_form(f0, g0, n_target).terms.items()]
    return QuantumGraph.from_counts(0, "ind", pairs)


def quadratic_form(z: Sequence[QuantumGraph], y: Sequence[Sequence], n_target: int) -> QuantumGraph:
    """sum_{u,v} Y[u][v] [[z_u * z_v]] on ``n_target`` vertices."""
    if len(y) != len(z) or any(len(row) != len(z) for row in y):
        raise ValueError(f"matrix of size {len(y)} does not match {len(z)} flag entries")
    if not linalg.is_symmetric(y):
        raise ValueError("quadratic form matrix must be symmetric")
    pairs = []
    for u in range(len(z)):
        for v in range(u, len(z)):
            c = Fraction(y[u][v]) * (1 if u == v else 2)
            if c:
                pairs += [(h, c * d) for h, d in pair_form(z[u], z[v], n_target).terms.items()]
    return QuantumGraph.from_counts(0, "ind", pairs)


# -- flag bases and their reductions ----------------------------------------------


@dataclass(frozen=True)
class FlagBasis:
    """Independent combinations of ``sigma``-flags on ``m`` vertices."""

    sigma: LabeledGraph
    m: int
    elements: tuple[QuantumGraph, ...]
    parity: str = "full"

    @classmethod
    def full(cls, sigma: LabeledGraph, m: int) -> "FlagBasis":
        flags = enumerate_flags(sigma, m)
        return cls(sigma, m, tuple(QuantumGraph.of(f) for f in flags), "full")

    @property
    def k(self) -> int:
        return self.sigma.k

    @property
    def flags(self) -> list[LabeledGraph]:
        return enumerate_flags(self.sigma, self.m)

    def __len__(self) -> int:
        return len(self.elements)

    def coordinates(self) -> list[list[Fraction]]:
        index = {f: i for i, f in enumerate(self.flags)}
        rows = []
        for e in self.elements:
            row = [Fraction(0)] * len(index)
            for g, c in e.terms.items():
                if g not in index:
                    raise ValueError(f"{format_graph(g)} is not a flag of this basis")
                row[index[g]] = c
            rows.append(row)
        return rows

    def is_independent(self) -> bool:
        return linalg.rank(self.coordinates()) == len(self.elements)

    def with_elements(self, rows: Sequence[Sequence[Fraction]], parity: str | None = None) -> "FlagBasis":
        flags = self.flags
        elements = tuple(QuantumGraph(self.k, "ind", {f: c for f, c in zip(flags, row) if c}) for row in rows)
        return FlagBasis(self.sigma, self.m, elements, parity or self.parity)


def type_symmetries(sigma: LabeledGraph) -> list[tuple[int, ...]]:
    """Label permutations that are automorphisms of the unlabeled type."""
    return automorphisms(sigma.unlabeled())


def act(pi: Sequence[int], f: LabeledGraph) -> LabeledGraph:
    """Move label ``i+1`` to position ``pi[i]`` (unlabeled vertices fixed)."""
    inverse = list(range(f.n))
    for i, p in enumerate(pi):
        inverse[p] = i
    return canonical(f.permute(inverse))


def act_quantum(pi: Sequence[int], q: QuantumGraph) -> QuantumGraph:
    return QuantumGraph.from_counts(q.k, q.basis, [(act(pi, g), c) for g, c in q.terms.items()])


def symmetry_split(basis: FlagBasis) -> tuple[FlagBasis, FlagBasis]:
    """Invariant and anti-invariant parts under the symmetries of the type.

    The invariant part is the image of the group sum, the anti-invariant part
    its kernel; both are returned in reduced echelon form over the flags.
    """
    if basis.parity != "full":
        raise ValueError("symmetry_split expects an unsplit basis")
    group = type_symmetries(basis.sigma)
    flags = basis.flags
    index = {f: i for i, f in enumerate(flags)}
    coords = basis.coordinates()
    # image of each basis element under the group sum, in flag coordinates
    images = []
    for e in basis.elements:
        row = [Fraction(0)] * len(flags)
        for pi in group:
            for g, c in act_quantum(pi, e).terms.items():
                row[index[g]] += c
        images.append(row)
    plus_rows, _ = linalg.rref(images)
    kernel = linalg.nullspace([list(col) for col in zip(*images)], len(basis.elements))
    minus_coords = [[sum((c * coords[i][j] for i, c in enumerate(v)), Fraction(0)) for j in range(len(flags))] for v in kernel]
    minus_rows, _ = linalg.rref(minus_coords) if minus_coords else ([], [])
    return basis.with_elements(plus_rows, "plus"), basis.with_elements(minus_rows, "minus")


def delta_restrict(basis: FlagBasis, w0s: Sequence[StepGraphon]) -> FlagBasis:
    """Combinations vanishing under every rooted evaluation into each ``w0``."""
    if not w0s:
        return basis
    for w0 in w0s:
        if not w0.is_01:
            raise ValueError("delta_restrict needs 0/1-valued graphons")
    rows = []
    for w0 in w0s:
        for psi, _ in label_assignments(basis.k, w0):
            rows.append([eval_quantum_rooted(e, psi, w0) for e in basis.elements])
    kernel = linalg.nullspace(rows, len(basis.elements))
    coords = basis.coordinates()
    combos = [[sum((c * coords[i][j] for i, c in enumerate(v)), Fraction(0)) for j in range(len(coords[0]))] for v in kernel]
    reduced, _ = linalg.rref(combos) if combos else ([], [])
    return basis.with_elements(reduced)
