"""Small simple graphs with optional labels, canonical forms and enumeration.

A graph on ``n`` vertices stores its adjacency as the upper triangle read in
row-major pair order ``(0,1), (0,2), ..., (0,n-1), (1,2), ...``, packed into an
integer whose most significant bit is the pair ``(0,1)``.  Integer order is
therefore the lexicographic order of bit sequences.

The first ``k`` vertices carry the labels ``1..k``.  Canonical forms minimise
the bit sequence over every permutation that fixes the labels pointwise.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations
from typing import Iterable, Sequence

import numpy as np

MAX_CANONICAL_N = 8

Permutation = tuple[int, ...]


class GraphNotationError(ValueError):
    """Raised for malformed graph strings."""


@lru_cache(maxsize=None)
def pair_list(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(combinations(range(n), 2))


@lru_cache(maxsize=None)
def _pair_shift(n: int) -> dict[tuple[int, int], int]:
    pairs = pair_list(n)
    top = len(pairs) - 1
    return {p: top - idx for idx, p in enumerate(pairs)}


def pair_bit(n: int, u: int, v: int) -> int:
    if u > v:
        u, v = v, u
    return 1 << _pair_shift(n)[(u, v)]


@dataclass(frozen=True, order=True)
class LabeledGraph:
    """Simple graph on vertices ``0..n-1``; vertices ``0..k-1`` are labeled ``1..k``."""

    n: int
    k: int
    bits: int

    def __post_init__(self) -> None:
        if self.n < 0 or not 0 <= self.k <= self.n:
            raise ValueError(f"bad vertex/label counts n={self.n}, k={self.k}")
        npairs = self.n * (self.n - 1) // 2
        if self.bits < 0 or self.bits >> npairs:
            raise ValueError("adjacency bits out of range")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], k: int = 0) -> "LabeledGraph":
        bits = 0
        for u, v in edges:
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            bits |= pair_bit(n, u, v)
        return cls(n, k, bits)

    @classmethod
    def complete(cls, n: int, k: int = 0) -> "LabeledGraph":
        return cls(n, k, (1 << (n * (n - 1) // 2)) - 1)

    @classmethod
    def empty(cls, n: int, k: int = 0) -> "LabeledGraph":
        return cls(n, k, 0)

    def adj(self, u: int, v: int) -> bool:
        if u == v:
            return False
        return bool(self.bits & pair_bit(self.n, u, v))

    def edges(self) -> list[tuple[int, int]]:
        return [p for p in pair_list(self.n) if self.bits & pair_bit(self.n, *p)]

    @property
    def num_edges(self) -> int:
        return bin(self.bits).count("1")

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.uint8)
        for u, v in self.edges():
            a[u, v] = a[v, u] = 1
        return a

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for u, v in self.edges():
            deg[u] += 1
            deg[v] += 1
        return deg

    def permute(self, perm: Sequence[int]) -> "LabeledGraph":
        """Graph whose vertex ``i`` is vertex ``perm[i]`` of ``self``."""
        bits = 0
        for u, v in pair_list(self.n):
            if self.adj(perm[u], perm[v]):
                bits |= pair_bit(self.n, u, v)
        return LabeledGraph(self.n, self.k, bits)

    def with_labels(self, k: int) -> "LabeledGraph":
        return LabeledGraph(self.n, k, self.bits)

    def unlabeled(self) -> "LabeledGraph":
        return LabeledGraph(self.n, 0, self.bits)

    def induced(self, vertices: Sequence[int], k: int = 0) -> "LabeledGraph":
        m = len(vertices)
        bits = 0
        for i, j in pair_list(m):
            if self.adj(vertices[i], vertices[j]):
                bits |= pair_bit(m, i, j)
        return LabeledGraph(m, k, bits)

    def type_part(self) -> "LabeledGraph":
        """The fully labeled graph induced on the labeled vertices."""
        return self.induced(range(self.k), k=self.k)

    def complement(self) -> "LabeledGraph":
        return LabeledGraph(self.n, self.k, self.bits ^ ((1 << (self.n * (self.n - 1) // 2)) - 1))

    def add_vertex(self, neighbours: Iterable[int]) -> "LabeledGraph":
        """Append one unlabeled vertex adjacent to ``neighbours``."""
        n = self.n + 1
        edges = self.edges() + [(u, self.n) for u in neighbours]
        return LabeledGraph.from_edges(n, edges, self.k)

    def __str__(self) -> str:
        return format_graph(self)


Graph = LabeledGraph


# -- canonical forms -------------------------------------------------------


@lru_cache(maxsize=None)
def _perm_table(n: int, k: int) -> np.ndarray:
    perms = [tuple(range(k)) + p for p in permutations(range(k, n))]
    return np.array(perms, dtype=np.int8).reshape(len(perms), n)


@lru_cache(maxsize=None)
def _pair_arrays(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    pairs = pair_list(n)
    i = np.array([p[0] for p in pairs], dtype=np.intp)
    j = np.array([p[1] for p in pairs], dtype=np.intp)
    shifts = np.arange(len(pairs) - 1, -1, -1, dtype=np.int64)
    return i, j, shifts


@lru_cache(maxsize=None)
def _key_table(n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    # flat adjacency positions read by each permutation, and float place values
    # (exact: at most 28 bits)
    perms = _perm_table(n, k).astype(np.intp)
    i, j, shifts = _pair_arrays(n)
    flat = perms[:, i] * n + perms[:, j]
    return flat, np.ldexp(1.0, shifts.astype(np.int32))


def _flat_adjacency(n: int, bits: int) -> np.ndarray:
    i, j, shifts = _pair_arrays(n)
    b = ((bits >> shifts) & 1).astype(np.float64)
    a = np.zeros(n * n)
    a[i * n + j] = b
    a[j * n + i] = b
    return a


def _perm_keys(n: int, k: int, bits: int) -> np.ndarray:
    flat, place = _key_table(n, k)
    return _flat_adjacency(n, bits)[flat] @ place


@lru_cache(maxsize=None)
def _canonical_bits(n: int, k: int, bits: int) -> tuple[int, Permutation]:
    if n - k <= 1 or bits == 0:
        return bits, tuple(range(n))
    keys = _perm_keys(n, k, bits)
    best = int(np.argmin(keys))
    return int(keys[best]), tuple(int(x) for x in _perm_table(n, k)[best])


def canonical_form(g: LabeledGraph) -> tuple[LabeledGraph, Permutation]:
    """Label-preserving canonical form and a permutation ``p`` with ``g.permute(p)`` canonical."""
    if g.n > MAX_CANONICAL_N:
        raise ValueError(f"canonical_form supports n <= {MAX_CANONICAL_N}, got {g.n}")
    bits, perm = _canonical_bits(g.n, g.k, g.bits)
    return LabeledGraph(g.n, g.k, bits), perm


def canonical(g: LabeledGraph) -> LabeledGraph:
    if g.n > MAX_CANONICAL_N:
        raise ValueError(f"canonical_form supports n <= {MAX_CANONICAL_N}, got {g.n}")
    return LabeledGraph(g.n, g.k, _canonical_bits(g.n, g.k, g.bits)[0])


def is_isomorphic(g: LabeledGraph, h: LabeledGraph) -> bool:
    if (g.n, g.k, g.num_edges) != (h.n, h.k, h.num_edges):
        return False
    return canonical(g) == canonical(h)


def automorphisms(g: LabeledGraph) -> list[Permutation]:
    """Label-preserving automorphisms, found by exhaustive search."""
    if g.n > MAX_CANONICAL_N:
        raise ValueError(f"automorphism search supports n <= {MAX_CANONICAL_N}")
    if g.n < 2:
        return [tuple(range(g.n))]
    keys = _perm_keys(g.n, g.k, g.bits)
    return [tuple(int(x) for x in p) for p in _perm_table(g.n, g.k)[keys == g.bits]]


@lru_cache(maxsize=None)
def _automorphism_count(n: int, k: int, bits: int) -> int:
    return len(automorphisms(LabeledGraph(n, k, bits)))


def automorphism_count(g: LabeledGraph) -> int:
    """|Aut(g)|, label-preserving when ``g.k > 0``."""
    return _automorphism_count(g.n, g.k, g.bits)


# -- enumeration -----------------------------------------------------------


@lru_cache(maxsize=None)
def _enumerate_graphs(n: int) -> tuple[LabeledGraph, ...]:
    if n <= 1:
        return (LabeledGraph(max(n, 0), 0, 0),) if n == 1 else (LabeledGraph(0, 0, 0),)
    found: set[int] = set()
    for g in _enumerate_graphs(n - 1):
        for r in range(n):
            for nbrs in combinations(range(n - 1), r):
                found.add(canonical(g.add_vertex(nbrs)).bits)
    return tuple(LabeledGraph(n, 0, b) for b in sorted(found))


def enumerate_graphs(n: int) -> list[LabeledGraph]:
    """All isomorphism classes on ``n`` vertices, canonical, sorted by key.

    Built by one-vertex extension of the ``n-1`` classes, since every graph
    is a smaller graph plus a vertex.
    """
    if not 0 <= n <= 7:
        raise ValueError(f"enumerate_graphs supports 0 <= n <= 7, got {n}")
    return list(_enumerate_graphs(n))


def enumerate_flags(sigma: LabeledGraph, m: int) -> list[LabeledGraph]:
    """Label-preserving classes of ``m``-vertex graphs whose labeled part is ``sigma``."""
    k = sigma.k
    if sigma.n != k:
        raise ValueError("sigma must be fully labeled")
    if m < k:
        raise ValueError(f"flag size {m} smaller than type size {k}")
    if m > 7:
        raise ValueError("enumerate_flags supports m <= 7")
    base = sigma.edges()
    free = [p for p in pair_list(m) if p[1] >= k]
    found: set[int] = set()
    for mask in range(1 << len(free)):
        edges = base + [p for t, p in enumerate(free) if mask >> t & 1]
        found.add(canonical(LabeledGraph.from_edges(m, edges, k)).bits)
    return [LabeledGraph(m, k, b) for b in sorted(found)]


def enumerate_types(k: int, dedup: bool = False) -> list[LabeledGraph]:
    """Fully labeled graphs on ``k`` vertices.

    With ``dedup`` one representative (the canonical form, labels attached in
    canonical vertex order) is kept per unlabeled isomorphism class.
    """
    if not 0 <= k <= 4:
        raise ValueError(f"enumerate_types supports k <= 4, got {k}")
    if dedup:
        return [g.with_labels(k) for g in enumerate_graphs(k)]
    return [LabeledGraph(k, k, b) for b in range(1 << (k * (k - 1) // 2))]


def random_graph(n: int, rng, p: float = 0.5, k: int = 0) -> LabeledGraph:
    edges = [e for e in pair_list(n) if rng.random() < p]
    return LabeledGraph.from_edges(n, edges, k)


# -- textual notation ------------------------------------------------------

_GRAPH_RE = re.compile(r"^\s*\{(?P<body>[^{}]*)\}\s*_\s*\{\s*(?P<n>\d+)\s*,\s*(?P<k>\d+)\s*\}\s*$")


def vertex_name(v: int, k: int) -> str:
    return str(v + 1) if v < k else chr(ord("a") + v - k)


def _vertex_index(token: str, n: int, k: int, text: str) -> int:
    if token.isdigit():
        v = int(token) - 1
        if not 0 <= v < k:
            raise GraphNotationError(f"label {token} out of range 1..{k} in {text!r}")
        return v
    if "a" <= token <= "z":
        v = k + ord(token) - ord("a")
        if v >= n:
            raise GraphNotationError(f"vertex {token!r} out of range in {text!r}")
        return v
    raise GraphNotationError(f"bad vertex id {token!r} in {text!r}")


def parse_graph(text: str) -> LabeledGraph:
    """Parse ``{1a, 1b, ab}_{4, 2}`` style notation (not canonicalised)."""
    m = _GRAPH_RE.match(text)
    if m is None:
        raise GraphNotationError(f"malformed graph string {text!r}")
    n, k = int(m["n"]), int(m["k"])
    if k > n:
        raise GraphNotationError(f"more labels than vertices in {text!r}")
    if k > 9:
        raise GraphNotationError("at most 9 labels are supported")
    body = m["body"].strip()
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    if body:
        for item in body.split(","):
            item = item.strip()
            if len(item) != 2:
                raise GraphNotationError(f"pair {item!r} is not two vertex ids in {text!r}")
            u = _vertex_index(item[0], n, k, text)
            v = _vertex_index(item[1], n, k, text)
            if u == v:
                raise GraphNotationError(f"loop {item!r} in {text!r}")
            e = (min(u, v), max(u, v))
            if e in seen:
                raise GraphNotationError(f"duplicate edge {item!r} in {text!r}")
            seen.add(e)
            edges.append(e)
    return LabeledGraph.from_edges(n, edges, k)


def format_graph(g: LabeledGraph) -> str:
    pairs = ", ".join(vertex_name(u, g.k) + vertex_name(v, g.k) for u, v in g.edges())
    return f"{{{pairs}}}_{{{g.n},{g.k}}}"
