import math
import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_density, graphs, step_graphons, step_graphons_01
from flagsdp.algebra import ind_expand, parse_quantum, zeta_expand
from flagsdp.densities import (
    StepGraphon,
    builtin_graphon,
    complement,
    count_induced,
    eval_quantum,
    format_graphon,
    hom_count_density,
    ind_profile,
    inducibility_from_tind,
    label_assignments,
    paley_graph,
    parse_graphon,
    step_graphon_of,
    t_hom,
    t_ind_graph,
    t_ind_rooted,
    t_inj,
)
from flagsdp.graphs import LabeledGraph, automorphism_count, enumerate_graphs, parse_graph

F = Fraction
K2 = LabeledGraph.complete(2)
K3 = LabeledGraph.complete(3)
P3 = parse_graph("{ab, bc}_{3,0}")
PAW = parse_graph("{ab, ac, bc, cd}_{4,0}")
K112 = parse_graph("{ab, ac, ad, bc, bd}_{4,0}")
C5 = LabeledGraph.from_edges(5, [(i, (i + 1) % 5) for i in range(5)])


# -- constructions --------------------------------------------------------------


def test_step_graphon_of_examples():
    w = step_graphon_of(K2)
    assert w.weights == (F(1, 2), F(1, 2))
    assert w.values == ((0, 1), (1, 0))
    k5 = step_graphon_of(LabeledGraph.complete(5))
    assert all(k5.values[i][j] == (i != j) for i in range(5) for j in range(5))
    w0 = builtin_graphon("k2uk2")
    assert w0.num_parts == 4
    assert sum(sum(row) for row in w0.values) == 4


def test_complement():
    w = builtin_graphon("k2uk2")
    assert all(complement(w).values[i][i] == 1 for i in range(4))
    assert complement(complement(w)) == w
    half = StepGraphon.constant(F(1, 2))
    assert complement(half) == half


def test_step_graphon_validation():
    with pytest.raises(ValueError):
        StepGraphon.build([F(1, 2)], [[0]])
    with pytest.raises(ValueError):
        StepGraphon.build([F(1, 2), F(1, 2)], [[0, 1], [0, 0]])
    with pytest.raises(ValueError):
        StepGraphon.build([F(1)], [[2]])


def test_graphon_file_round_trip():
    w = builtin_graphon("complement(k2uk2)")
    assert parse_graphon(format_graphon(w)) == w
    text = "# two parts\nparts: 1/3 2/3\n0 1\n1 1/2\n"
    w = parse_graphon(text)
    assert w.weights == (F(1, 3), F(2, 3)) and w.values[1][1] == F(1, 2)
    with pytest.raises(ValueError):
        parse_graphon("parts: 1\n0\n0\n")


# -- exact values ----------------------------------------------------------------


def test_construction_densities():
    assert t_ind_graph(PAW, builtin_graphon("complement(k2uk2)")) == F(1, 32)
    assert t_ind_graph(K112, builtin_graphon("k5")) == F(12, 125)
    assert t_ind_graph(K2, builtin_graphon("k5")) == F(4, 5)


def test_hom_examples():
    assert t_hom(K2, StepGraphon.constant(F(2, 7))) == F(2, 7)
    assert t_hom(K3, builtin_graphon("k5")) == F(12, 25)


def test_goodman_at_constant_p():
    for p in [F(0), F(1, 3), F(1, 2), F(5, 7), F(1)]:
        w = StepGraphon.constant(p)
        value = t_hom(K3, w) - 2 * t_hom(K2, w) ** 2 + t_hom(K2, w)
        assert value == p * (1 - p) ** 2


@settings(max_examples=100)
@given(step_graphons())
def test_goodman_nonnegative(w):
    assert t_hom(K3, w) - 2 * t_hom(K2, w) ** 2 + t_hom(K2, w) >= 0


def test_rooted_examples():
    w = step_graphon_of(C5)
    assert t_ind_rooted(P3, (), w) == t_ind_graph(P3, w)
    sigma = parse_graph("{12}_{3,3}")
    assert t_ind_rooted(sigma, (0, 1, 3), w) == 1
    assert t_ind_rooted(sigma, (0, 1, 2), w) == 0
    flag = parse_graph("{1a, 2a}_{3,2}")
    assert t_ind_rooted(flag, (0, 2), w) == F(1, 5)


@settings(max_examples=60)
@given(st.data())
def test_rooted_average_is_unrooted(data):
    w = data.draw(step_graphons(max_parts=3))
    k = data.draw(st.integers(1, 2))
    f = data.draw(graphs(min_n=k, max_n=4, k=k))
    avg = sum((pr * t_ind_rooted(f, psi, w) for psi, pr in label_assignments(k, w)), F(0))
    assert avg == t_ind_graph(f.unlabeled(), w)


# -- oracles and identities -------------------------------------------------------


@settings(max_examples=80)
@given(graphs(max_n=4), step_graphons())
def test_densities_match_brute_force(h, w):
    assert t_ind_graph(h, w) == brute_density(h, w)
    assert t_hom(h, w) == brute_density(h, w, induced=False)
    assert 0 <= t_ind_graph(h, w) <= 1


@settings(max_examples=60)
@given(graphs(max_n=4), graphs(max_n=5))
def test_hom_density_of_graph_counts_homomorphisms(h, g):
    assert t_hom(h, step_graphon_of(g)) == hom_count_density(h, g)


@settings(max_examples=60)
@given(graphs(max_n=4), step_graphons())
def test_zeta_identity(h, w):
    # t(H) = sum over supergraphs F of t_ind(F)
    assert t_hom(h, w) == eval_quantum(zeta_expand(h), w)


@settings(max_examples=60)
@given(graphs(max_n=4), step_graphons())
def test_mobius_identity(h, w):
    assert t_ind_graph(h, w) == eval_quantum(ind_expand(h), w)


@settings(max_examples=25)
@given(st.integers(1, 5), step_graphons(max_parts=3))
def test_partition_of_unity(n, w):
    total = sum(F(math.factorial(n), automorphism_count(h)) * t_ind_graph(h, w) for h in enumerate_graphs(n))
    assert total == 1


@settings(max_examples=20)
@given(step_graphons_01(max_parts=3))
def test_ind_profile_matches_direct(w):
    prof = ind_profile(4, w)
    assert all(prof[h] == t_ind_graph(h, w) for h in enumerate_graphs(4))


def test_ind_profile_rejects_fractional_values():
    with pytest.raises(ValueError):
        ind_profile(3, StepGraphon.constant(F(1, 2)))


def test_eval_quantum_examples():
    assert eval_quantum(parse_quantum("{}_{1,0}"), builtin_graphon("const 1/3")) == 1
    goodman = parse_quantum("{ab, ac, bc}_{3,0} - 2*{ab, cd}_{4,0} + {ab}_{2,0}", "plain")
    p = F(2, 5)
    assert eval_quantum(goodman, StepGraphon.constant(p)) == p * (1 - p) ** 2


# -- finite graphs -----------------------------------------------------------------


def test_count_induced_examples():
    assert count_induced(K2, K3) == (3, F(1))
    assert count_induced(P3, C5)[0] == 5
    assert count_induced(PAW, PAW) == (1, F(1))


def test_count_induced_limits():
    with pytest.raises(ValueError):
        count_induced(K3, K2)
    with pytest.raises(ValueError):
        count_induced(K2, LabeledGraph.empty(11))


def test_t_inj_examples():
    assert t_inj(K2, K3) == 1
    assert t_inj(K3, C5) == 0


def test_hom_vs_injective_gap_bound():
    rng = random.Random(11)
    for _ in range(200):
        g = LabeledGraph.from_edges(
            (n := rng.randint(3, 7)), [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.5]
        )
        hn = rng.randint(1, min(3, n))
        h = LabeledGraph.from_edges(hn, [(u, v) for u in range(hn) for v in range(u + 1, hn) if rng.random() < 0.5])
        gap = abs(t_hom(h, step_graphon_of(g)) - t_inj(h, g))
        assert gap <= F(math.comb(h.n, 2), g.n)


def test_inducibility_conversion():
    assert inducibility_from_tind(P3, F(1, 4)) == F(3, 4)
    assert inducibility_from_tind(K112, F(12, 125)) == F(72, 125)
    for n in range(1, 6):
        assert inducibility_from_tind(LabeledGraph.complete(n), 1) == 1
    with pytest.raises(ValueError):
        inducibility_from_tind(P3, F(3, 2))


def test_p3_extremal_value():
    # K_{n/2,n/2} carries t_ind(P3) = 1/4, hence i(P3) = 3/4
    w = step_graphon_of(LabeledGraph.complete(2))
    assert t_ind_graph(P3, w) == F(1, 4)


def test_paley_graphs():
    g = paley_graph(5)
    assert sorted(g.degrees()) == [2] * 5
    assert count_induced(P3, g)[0] == 5
    assert paley_graph(13).num_edges == 39
    with pytest.raises(ValueError):
        paley_graph(7)


def test_p4_in_five_cycle_by_enumeration():
    # 5^4 maps of the path a-b-c-d into the cycle, counted directly
    p4 = parse_graph("{ab, bc, cd}_{4,0}")
    good = 0
    for x in product(range(5), repeat=4):
        ok = True
        for u in range(4):
            for v in range(u + 1, 4):
                adj = (x[u] - x[v]) % 5 in (1, 4)
                if adj != p4.adj(u, v):
                    ok = False
        good += ok
    assert t_ind_graph(p4, step_graphon_of(paley_graph(5))) == F(good, 5**4)


def test_builtin_names():
    assert builtin_graphon("paley13").num_parts == 13
    assert builtin_graphon("const 1/2").values == ((F(1, 2),),)
    with pytest.raises(ValueError):
        builtin_graphon("nonsense")
