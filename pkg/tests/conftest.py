import math
import os
from fractions import Fraction
from itertools import permutations, product

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from flagsdp.densities import StepGraphon
from flagsdp.graphs import LabeledGraph, pair_list

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


# -- strategies ---------------------------------------------------------------


@st.composite
def graphs(draw, min_n=1, max_n=6, k=0):
    n = draw(st.integers(max(min_n, k), max_n))
    # one coin per pair keeps edge densities near 1/2
    present = draw(st.lists(st.booleans(), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2))
    return LabeledGraph(n, k, sum(1 << i for i, b in enumerate(present) if b))


@st.composite
def permutations_of(draw, n, fixed=0):
    rest = draw(st.permutations(list(range(fixed, n))))
    return tuple(range(fixed)) + tuple(rest)


@st.composite
def weights(draw, p):
    raw = draw(st.lists(st.integers(1, 6), min_size=p, max_size=p))
    total = sum(raw)
    return [Fraction(r, total) for r in raw]


@st.composite
def step_graphons_01(draw, max_parts=4):
    """0/1-valued step graphons with arbitrary diagonal and unequal parts."""
    p = draw(st.integers(1, max_parts))
    vals = [[0] * p for _ in range(p)]
    for i in range(p):
        for j in range(i, p):
            vals[i][j] = vals[j][i] = draw(st.integers(0, 1))
    return StepGraphon.build(draw(weights(p)), vals)


@st.composite
def step_graphons(draw, max_parts=3, max_den=4):
    """Step graphons with fractional values."""
    p = draw(st.integers(1, max_parts))
    vals = [[Fraction(0)] * p for _ in range(p)]
    for i in range(p):
        for j in range(i, p):
            d = draw(st.integers(1, max_den))
            vals[i][j] = vals[j][i] = Fraction(draw(st.integers(0, d)), d)
    return StepGraphon.build(draw(weights(p)), vals)


# -- independent oracles --------------------------------------------------------


def brute_key(g: LabeledGraph) -> tuple:
    """Smallest adjacency tuple over label-fixing permutations (plain itertools)."""
    adj = {(u, v) for u, v in g.edges()} | {(v, u) for u, v in g.edges()}
    best = None
    for rest in permutations(range(g.k, g.n)):
        perm = tuple(range(g.k)) + rest
        key = tuple((perm[u], perm[v]) in adj for u, v in pair_list(g.n))
        if best is None or key < best:
            best = key
    return (g.n, g.k, best)


def brute_automorphisms(g: LabeledGraph) -> int:
    edges = set(g.edges())
    count = 0
    for rest in permutations(range(g.k, g.n)):
        perm = tuple(range(g.k)) + rest
        if {tuple(sorted((perm[u], perm[v]))) for u, v in edges} == edges:
            count += 1
    return count


def brute_density(h: LabeledGraph, w: StepGraphon, psi=(), induced=True) -> Fraction:
    """Sum over all part maps of the unlabeled vertices; labels pinned by ``psi``."""
    free = h.n - len(psi)
    total = Fraction(0)
    for parts in product(range(w.num_parts), repeat=free):
        x = tuple(psi) + parts
        term = math.prod((w.weights[c] for c in parts), start=Fraction(1))
        for u, v in pair_list(h.n):
            val = w.values[x[u]][x[v]]
            if h.adj(u, v):
                term *= val
            elif induced:
                term *= 1 - val
        total += term
    return total


def brute_quantum(q, w: StepGraphon, psi=()) -> Fraction:
    if not q.terms:
        return Fraction(0)
    if q.basis == "ind" and w.is_01:
        return _brute_quantum_01(q, w, tuple(psi))
    return sum((c * brute_density(g, w, psi, q.basis == "ind") for g, c in q.terms.items()), Fraction(0))


def _brute_quantum_01(q, w: StepGraphon, psi) -> Fraction:
    # with 0/1 values each part map realizes exactly one labeled pattern
    by_size: dict[int, dict[int, Fraction]] = {}
    for g, c in q.terms.items():
        by_size.setdefault(g.n, {})[g.bits] = c
    total = Fraction(0)
    for n, coeffs in by_size.items():
        pairs = pair_list(n)
        for parts in product(range(w.num_parts), repeat=n - len(psi)):
            x = psi + parts
            bits = 0
            for t, (u, v) in enumerate(pairs):
                if w.values[x[u]][x[v]]:
                    bits |= 1 << (len(pairs) - 1 - t)
            c = coeffs.get(bits)
            if c is not None:
                total += c * math.prod((w.weights[p] for p in parts), start=Fraction(1))
    return total


def minors_psd(m) -> bool:
    """PSD iff every principal minor is nonnegative (sympy determinants)."""
    import sympy

    from itertools import combinations

    n = len(m)
    mat = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in m])
    for r in range(1, n + 1):
        for idx in combinations(range(n), r):
            if mat.extract(list(idx), list(idx)).det() < 0:
                return False
    return True


# -- acceptance report ------------------------------------------------------------

ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
