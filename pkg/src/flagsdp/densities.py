"""Exact homomorphism and induced densities against step graphons.

Every evaluation enumerates maps from the vertices of the small graph to the
parts of the graphon, so results are exact rationals.  Partial assignments
that already carry a zero factor are pruned, which keeps 0/1 graphons cheap.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Sequence

import numpy as np

from .graphs import LabeledGraph, automorphism_count, canonical, enumerate_graphs, is_isomorphic, pair_bit


@dataclass(frozen=True)
class StepGraphon:
    """Graphon constant on the rectangles of a finite partition of [0,1]."""

    weights: tuple[Fraction, ...]
    values: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        p = len(self.weights)
        if p == 0:
            raise ValueError("a step graphon needs at least one part")
        if any(w <= 0 for w in self.weights):
            raise ValueError("part weights must be positive")
        if sum(self.weights) != 1:
            raise ValueError(f"part weights sum to {sum(self.weights)}, not 1")
        if len(self.values) != p or any(len(row) != p for row in self.values):
            raise ValueError("value matrix must be square with one row per part")
        for i in range(p):
            for j in range(p):
                v = self.values[i][j]
                if not 0 <= v <= 1:
                    raise ValueError(f"value {v} outside [0, 1]")
                if v != self.values[j][i]:
                    raise ValueError("value matrix is not symmetric")

    @classmethod
    def build(cls, weights: Sequence, values: Sequence[Sequence]) -> "StepGraphon":
        return cls(
            tuple(Fraction(w) for w in weights),
            tuple(tuple(Fraction(v) for v in row) for row in values),
        )

    @classmethod
    def constant(cls, p) -> "StepGraphon":
        return cls.build([1], [[p]])

    @property
    def num_parts(self) -> int:
        return len(self.weights)

    @property
    def is_01(self) -> bool:
        return all(v in (0, 1) for row in self.values for v in row)


def step_graphon_of(g: LabeledGraph) -> StepGraphon:
    """w_G: ``n`` parts of weight 1/n, values given by the adjacency matrix."""
    n = g.n
    return StepGraphon.build([Fraction(1, n)] * n, [[int(g.adj(i, j)) for j in range(n)] for i in range(n)])


def complement(w: StepGraphon) -> StepGraphon:
    """1 - w, diagonal included."""
    return StepGraphon(w.weights, tuple(tuple(1 - v for v in row) for row in w.values))


def _pair_factor_tables(w: StepGraphon):
    vals = [[v for v in row] for row in w.values]
    co = [[1 - v for v in row] for row in w.values]
    return vals, co


def _rooted_sum(g: LabeledGraph, w: StepGraphon, psi: Sequence[int], induced: bool) -> Fraction:
    n, k, p = g.n, g.k, w.num_parts
    if len(psi) != k:
        raise ValueError(f"need {k} pinned parts, got {len(psi)}")
    if any(not 0 <= c < p for c in psi):
        raise ValueError(f"part index out of range in {tuple(psi)}")
    vals, co = _pair_factor_tables(w)
    adj = [[g.adj(u, v) for v in range(n)] for u in range(n)]
    tables = [[vals if adj[u][v] else (co if induced else None) for v in range(n)] for u in range(n)]
    parts = list(psi) + [0] * (n - k)

    base = Fraction(1)
    for u, v in combinations(range(k), 2):
        t = tables[u][v]
        if t is not None:
            base *= t[parts[u]][parts[v]]
    if base == 0:
        return Fraction(0)

    def rec(v: int, acc: Fraction) -> Fraction:
        if v == n:
            return acc
        total = Fraction(0)
        for c in range(p):
            f = acc * w.weights[c]
            for u in range(v):
                t = tables[u][v]
                if t is None:
                    continue
                x = t[parts[u]][c]
                if x == 0:
                    f = 0
                    break
                if x != 1:
                    f *= x
            if f:
                parts[v] = c
                total += rec(v + 1, f)
        return total

    return rec(k, base)


def t_hom(h: LabeledGraph, w: StepGraphon) -> Fraction:
    """Homomorphism density t(h; w) of the unlabeled graph ``h``."""
    return _rooted_sum(h.unlabeled(), w, (), induced=False)


def t_ind_graph(h: LabeledGraph, w: StepGraphon) -> Fraction:
    """Induced density: non-edges contribute ``1 - w``."""
    return _rooted_sum(h.unlabeled(), w, (), induced=True)


def t_hom_rooted(f: LabeledGraph, psi: Sequence[int], w: StepGraphon) -> Fraction:
    return _rooted_sum(f, w, tuple(psi), induced=False)


def t_ind_rooted(f: LabeledGraph, psi: Sequence[int], w: StepGraphon) -> Fraction:
    """Induced density with labeled vertex ``i+1`` pinned to part ``psi[i]``."""
    return _rooted_sum(f, w, tuple(psi), induced=True)


def label_assignments(k: int, w: StepGraphon):
    """All maps from the labels to parts, with their probability."""
    for psi in product(range(w.num_parts), repeat=k):
        yield psi, math.prod((w.weights[c] for c in psi), start=Fraction(1))


def eval_quantum_rooted(q, psi: Sequence[int], w: StepGraphon) -> Fraction:
    """Rooted evaluation of a quantum graph (``terms``/``basis`` duck-typed)."""
    rooted = t_ind_rooted if q.basis == "ind" else t_hom_rooted
    return sum((c * rooted(g, psi, w) for g, c in q.terms.items()), Fraction(0))


def eval_quantum(q, w: StepGraphon) -> Fraction:
    """Evaluate a quantum graph; labeled terms are averaged over label positions."""
    if q.k == 0:
        dens = t_ind_graph if q.basis == "ind" else t_hom
        return sum((c * dens(g, w) for g, c in q.terms.items()), Fraction(0))
    return sum((pr * eval_quantum_rooted(q, psi, w) for psi, pr in label_assignments(q.k, w)), Fraction(0))


def ind_profile(n: int, w: StepGraphon) -> dict[LabeledGraph, Fraction]:
    """t_ind(H; w) for every canonical ``n``-vertex class H, for a 0/1 graphon.

    Each map of ``n`` vertices to parts fixes one labeled pattern; summing the
    map probabilities per class and dividing by the number of labeled copies
    ``n!/|Aut(H)|`` gives the induced density of a single copy.
    """
    if not w.is_01:
        raise ValueError("ind_profile needs a 0/1-valued step graphon")
    p = w.num_parts
    maps = np.array(list(product(range(p), repeat=n)), dtype=np.intp).reshape(-1, n)
    vals = np.array([[int(v) for v in row] for row in w.values], dtype=np.int64)
    codes = np.zeros(len(maps), dtype=np.int64)
    for u, v in combinations(range(n), 2):
        codes |= vals[maps[:, u], maps[:, v]] << (pair_bit(n, u, v).bit_length() - 1)
    denom = math.lcm(*(x.denominator for x in w.weights))
    nums = [int(x * denom) for x in w.weights]
    mass: Counter = Counter()
    if len(set(nums)) == 1:
        for code, cnt in zip(*np.unique(codes, return_counts=True)):
            mass[int(code)] += int(cnt) * nums[0] ** n
    else:
        for code, row in zip(codes.tolist(), maps.tolist()):
            mass[code] += math.prod(nums[c] for c in row)
    per_class: Counter = Counter()
    for code, m in mass.items():
        per_class[canonical(LabeledGraph(n, 0, code))] += m
    total = Fraction(1, denom**n)
    out = {}
    for h in enumerate_graphs(n):
        copies = math.factorial(n) // automorphism_count(h)
        out[h] = per_class.get(h, 0) * total / copies
    return out


def count_induced(h: LabeledGraph, g: LabeledGraph) -> tuple[int, Fraction]:
    """Number of induced copies of ``h`` in ``g`` and its normalisation by C(n, k)."""
    k, n = h.n, g.n
    if k > n:
        raise ValueError("pattern larger than host graph")
    if n > 10:
        raise ValueError("count_induced supports host graphs with at most 10 vertices")
    h0 = h.unlabeled()
    count = sum(1 for s in combinations(range(n), k) if is_isomorphic(g.induced(s), h0))
    return count, Fraction(count, math.comb(n, k))


def t_inj(h: LabeledGraph, g: LabeledGraph) -> Fraction:
    """Probability that a uniform injective map V(h) -> V(g) is a homomorphism."""
    if h.n > g.n:
        raise ValueError("pattern larger than host graph")
    edges = h.edges()
    good = total = 0
    for phi in permutations(range(g.n), h.n):
        total += 1
        if all(g.adj(phi[u], phi[v]) for u, v in edges):
            good += 1
    return Fraction(good, total)


def inducibility_from_tind(h: LabeledGraph, tind) -> Fraction:
    """Convert a maximal induced homomorphism density into i(H)."""
    tind = Fraction(tind)
    if not 0 <= tind <= 1:
        raise ValueError("density must lie in [0, 1]")
    return tind * math.factorial(h.n) / automorphism_count(h.unlabeled())


def hom_count_density(h: LabeledGraph, g: LabeledGraph) -> Fraction:
    """Brute force t(h; g): homomorphisms over all |V(g)|^|V(h)| maps."""
    edges = h.edges()
    good = sum(1 for phi in product(range(g.n), repeat=h.n) if all(g.adj(phi[u], phi[v]) for u, v in edges))
    return Fraction(good, g.n**h.n)


# -- named constructions and the graphon file format -------------------------


def is_prime(q: int) -> bool:
    return q >= 2 and all(q % d for d in range(2, math.isqrt(q) + 1))


def paley_graph(q: int) -> LabeledGraph:
    """Quadratic-residue graph QR(q) on Z_q for a prime q = 1 (mod 4)."""
    if not is_prime(q) or q % 4 != 1:
        raise ValueError(f"Paley graph needs a prime q = 1 mod 4, got {q}")
    residues = {x * x % q for x in range(1, q)}
    edges = [(u, v) for u, v in combinations(range(q), 2) if (v - u) % q in residues]
    return LabeledGraph.from_edges(q, edges)


def disjoint_union(*graphs: LabeledGraph) -> LabeledGraph:
    edges, offset = [], 0
    for g in graphs:
        edges += [(u + offset, v + offset) for u, v in g.edges()]
        offset += g.n
    return LabeledGraph.from_edges(offset, edges)


_BUILTIN_RE = re.compile(r"^(?:k(?P<k>\d+)|paley(?P<q>\d+)|k2uk2|const\s+(?P<c>\S+)|complement\((?P<inner>.*)\))$")


def builtin_graphon(spec: str) -> StepGraphon:
    """Named graphons: ``k5``, ``k2uk2``, ``paley13``, ``const 1/2``, ``complement(<name>)``."""
    spec = spec.strip()
    m = _BUILTIN_RE.match(spec)
    if m is None:
        raise ValueError(f"unknown builtin graphon {spec!r}")
    if m["inner"] is not None:
        return complement(builtin_graphon(m["inner"]))
    if m["k"] is not None:
        return step_graphon_of(LabeledGraph.complete(int(m["k"])))
    if m["q"] is not None:
        return step_graphon_of(paley_graph(int(m["q"])))
    if m["c"] is not None:
        return StepGraphon.constant(Fraction(m["c"]))
    k2 = LabeledGraph.complete(2)
    return step_graphon_of(disjoint_union(k2, k2))


def parse_graphon(text: str) -> StepGraphon:
    """Read ``parts: w_1 ... w_p`` followed by ``p`` rows of ``p`` rationals."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("parts:"):
        raise ValueError("graphon file must start with a 'parts:' line")
    weights = [Fraction(t) for t in lines[0][len("parts:"):].split()]
    rows = [[Fraction(t) for t in ln.split()] for ln in lines[1:]]
    if len(rows) != len(weights):
        raise ValueError(f"expected {len(weights)} value rows, found {len(rows)}")
    return StepGraphon.build(weights, rows)


def format_graphon(w: StepGraphon) -> str:
    out = ["parts: " + " ".join(str(x) for x in w.weights)]
    out += [" ".join(str(v) for v in row) for row in w.values]
    return "\n".join(out) + "\n"
