import itertools
import random
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given

from dynmatch.errors import InfeasibleWitness, TooLarge
from dynmatch.graph import DynamicGraph, Matching, matching_is_valid
from dynmatch.oracles import (
    OracleLimits,
    bipartite_max_matching,
    bipartition,
    exact_max_matching,
    exact_mwm,
    exhaustive_max_matching,
    find_augmenting_path,
    fractional_value_bound,
    greedy_maximal_matching,
    is_kernel,
    kernel_witness_value,
    max_matching,
    mu_upper_bound,
    random_kernel,
    verify_kernel_matching_bound,
)

from .strategies import brute_mu, graphs, random_graph


def cycle(n):
    return DynamicGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def petersen():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return DynamicGraph.from_edges(10, outer + spokes + inner)


def test_small_named_graphs():
    assert exact_max_matching(cycle(3)) == 1
    assert exact_max_matching(cycle(6)) == 3
    p = petersen()
    assert p.m == 15
    assert exact_max_matching(p) == 5 == brute_mu(p)


def test_exhaustive_limit():
    g = DynamicGraph.from_edges(12, itertools.combinations(range(8), 2))
    with pytest.raises(TooLarge):
        exact_max_matching(g)
    assert exact_max_matching(g, OracleLimits(max_edges_exhaustive=28)) == 4


def test_bipartite_any_size():
    n = 400
    g = DynamicGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])
    assert exact_max_matching(g) == 200


@given(graphs(max_n=9))
def test_exhaustive_matches_enumeration(g):
    assert exhaustive_max_matching(g) == brute_mu(g)
    m = max_matching(g, OracleLimits(max_edges_exhaustive=40))
    assert matching_is_valid(g, m.edges)


@given(graphs(max_n=12, bipartite=True))
def test_bipartite_agrees_with_exhaustive(g):
    side = bipartition(g)
    assert side is not None
    m = bipartite_max_matching(g, side)
    assert matching_is_valid(g, m.edges)
    assert len(m) == exhaustive_max_matching(g)


def test_bipartite_against_networkx_large():
    rng = random.Random(2)
    for _ in range(20):
        n = 200
        g = DynamicGraph(n)
        for _ in range(400):
            u, v = rng.randrange(0, n, 2), rng.randrange(1, n, 2)
            if not g.has_edge(u, v):
                g.insert_edge(u, v)
        ng = nx.Graph(list(g.edges()))
        top = {u for u in ng if u % 2 == 0}
        want = len(nx.bipartite.hopcroft_karp_matching(ng, top)) // 2
        assert exact_max_matching(g) == want


def test_exact_mwm_examples():
    g = DynamicGraph.from_edges(2, [(0, 1)])
    assert exact_mwm(g, {(0, 1): 7})[1] == 7
    path = DynamicGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    m, val = exact_mwm(path, {(0, 1): 1, (1, 2): 3, (2, 3): 1})
    assert val == 3 and m.edges == {(1, 2)}
    assert exact_mwm(DynamicGraph(3), {})[1] == 0


def enumerate_matchings(edges):
    for k in range(len(edges) + 1):
        for combo in itertools.combinations(edges, k):
            vs = [x for e in combo for x in e]
            if len(set(vs)) == len(vs):
                yield combo


def test_path_has_five_matchings():
    assert len(list(enumerate_matchings([(0, 1), (1, 2), (2, 3)]))) == 5


def test_exact_mwm_against_enumeration():
    rng = random.Random(3)
    for _ in range(60):
        g = random_graph(rng, 7, 0.4)
        w = {e: Fraction(rng.randint(1, 30), rng.randint(1, 4)) for e in g.edges()}
        best = max(sum((w[e] for e in combo), Fraction(0)) for combo in enumerate_matchings(sorted(g.edges())))
        m, val = exact_mwm(g, w)
        assert val == best and matching_is_valid(g, m.edges)
        assert sum((w[e] for e in m.edges), Fraction(0)) == val


def test_witness_single_edge():
    assert kernel_witness_value([(0, 1)], [1, 1], [(0, 1)], 1) == 1


def test_witness_c4():
    # H = G = C4, d = 2, M* = {(0,1), (2,3)}; matched edges get max(1 - 2/2, 0) = 0
    c4 = [(0, 1), (1, 2), (2, 3), (0, 3)]
    val = kernel_witness_value(c4, [2, 2, 2, 2], [(0, 1), (2, 3)], 2)
    assert val == 1
    # mu = 2, so value 1 >= 2 / (2c) for every c >= 1
    kernel_witness_value(c4, [2, 2, 2, 2], [(0, 1), (2, 3)], 2, c=1, mu=2)


def test_witness_infeasible_raises():
    # degree 3 with d = 2 breaks feasibility
    star = [(0, 1), (0, 2), (0, 3)]
    with pytest.raises(InfeasibleWitness):
        kernel_witness_value(star, [3, 1, 1, 1], [], 2)


def degrees(n, edges):
    deg = [0] * n
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    return deg


def test_witness_sweep_small_kernels():
    rng = random.Random(4)
    for _ in range(300):
        n = rng.randint(2, 10)
        g = random_graph(rng, n, rng.uniform(0.2, 0.8))
        c, d = rng.choice([(1, 1), (1, 2), (2, 4), (Fraction(3, 2), 3)])
        h = random_kernel(g, c, d, rng)
        assert is_kernel(g, h, c, d)
        star = max_matching(g, OracleLimits(max_edges_exhaustive=45))
        val = kernel_witness_value(h, degrees(n, h), star.edges, d, c=c, mu=len(star))
        assert val * 2 * c >= len(star)


def test_kernel_bound_identity_and_weak_case():
    g = petersen()
    assert verify_kernel_matching_bound(g, g.edges(), 1, 3)
    rng = random.Random(5)
    for _ in range(200):
        g = random_graph(rng, 10, 0.4)
        h = greedy_maximal_matching(g).edges
        assert is_kernel(g, h, 1, 1)
        assert verify_kernel_matching_bound(g, h, 1, 1, OracleLimits(max_edges_exhaustive=45))


def test_is_kernel_rejects():
    g = DynamicGraph.from_edges(4, [(0, 1), (2, 3)])
    assert not is_kernel(g, [(0, 1)], 1, 1)
    assert not is_kernel(g, [(0, 2)], 1, 1)
    assert is_kernel(g, [(0, 1), (2, 3)], 1, 1)


def test_fractional_value_bound_examples():
    assert fractional_value_bound(DynamicGraph(3), {}, 1, 1)
    g = DynamicGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    m = greedy_maximal_matching(g)
    assert fractional_value_bound(g, {e: 1 for e in m.edges}, 1, 1)
    assert not fractional_value_bound(g, {(1, 2): Fraction(1, 4)}, 1, 1)


def test_find_augmenting_path():
    adj = [{1}, {0, 2}, {1, 3}, {2}]
    assert find_augmenting_path(adj, [(1, 2)], 3) == [0, 1, 2, 3]
    assert find_augmenting_path(adj, [(1, 2)], 1) is None
    assert find_augmenting_path(adj, [(0, 1), (2, 3)], 9) is None
    # path 0-1=2-3=4-5 passes an odd cycle 2-3-4
    adj = [{1}, {0, 2}, {1, 3, 4}, {2, 4}, {2, 3, 5}, {4}]
    m = [(1, 2), (3, 4)]
    assert find_augmenting_path(adj, m, 3) is None
    p = find_augmenting_path(adj, m, 5)
    assert p == [0, 1, 2, 3, 4, 5]


def test_mu_upper_bound():
    rng = random.Random(6)
    for _ in range(50):
        g = random_graph(rng, 9, 0.35)
        assert exhaustive_max_matching(g, OracleLimits(40)) <= mu_upper_bound(g)


def test_oracles_do_not_mutate():
    g = petersen()
    before = sorted(g.edges())
    exact_max_matching(g)
    exact_mwm(g, {e: 1 for e in g.edges()})
    assert sorted(g.edges()) == before
    assert isinstance(max_matching(g), Matching)
