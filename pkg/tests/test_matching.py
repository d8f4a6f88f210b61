import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import euclidean_instances, line_instances
from groupdistortion.adversary import gen_ordinal_maxavg
from groupdistortion.core import Grouping, Instance, OrdinalProfile, ordinal_profile_from_instance
from groupdistortion.matching import (
    DominationGraph,
    PreconditionError,
    domination_graph,
    has_perfect_matching,
    is_valid_matching,
    lemma_distance_bound_holds,
    maximum_matching,
    perfect_matching_alternatives,
)


def brute_force_perfect(g: DominationGraph) -> bool:
    return any(all(g.has_edge(i, p[i]) for i in range(g.n)) for p in itertools.permutations(range(g.n)))


def brute_force_edges(profile: OrdinalProfile, x: int) -> set:
    out = set()
    for i in range(profile.n):
        ranking = list(profile.rankings[i])
        for j in range(profile.n):
            if ranking.index(x) <= ranking.index(profile.top(j)):
                out.add((i, j))
    return out


@st.composite
def bipartite_graphs(draw, max_n=7):
    n = draw(st.integers(1, max_n))
    rows = draw(st.lists(st.sets(st.integers(0, n - 1)), min_size=n, max_size=n))
    return DominationGraph(n, tuple(tuple(sorted(r)) for r in rows))


def test_unanimous_graph_is_complete():
    prof = OrdinalProfile(2, [[0, 1]] * 3)
    g = domination_graph(prof, 0)
    assert g.edge_set() == {(i, j) for i in range(3) for j in range(3)}
    assert has_perfect_matching(g)[0]


def test_two_agent_example():
    prof = OrdinalProfile(2, [[0, 1], [1, 0]])
    g = domination_graph(prof, 0)
    assert g.edge_set() == {(0, 0), (0, 1), (1, 0)}
    ok, mu = has_perfect_matching(g)
    assert ok and mu == {0: 1, 1: 0}


def test_single_agent_top():
    prof = OrdinalProfile(4, [[2, 0, 3, 1]])
    g = domination_graph(prof, 2)
    assert g.edge_set() == {(0, 0)}


def test_isolated_right_vertex_has_no_perfect_matching():
    g = DominationGraph(3, ((0, 1), (0, 1), (0, 1)))
    assert has_perfect_matching(g) == (False, None)
    assert len(maximum_matching(g)) == 2


def test_out_of_range_alternative():
    with pytest.raises(IndexError):
        domination_graph(OrdinalProfile(2, [[0, 1]]), 2)


@settings(max_examples=150, deadline=None)
@given(bipartite_graphs())
def test_matching_against_brute_force(g):
    ok, mu = has_perfect_matching(g)
    assert ok == brute_force_perfect(g)
    if ok:
        assert is_valid_matching(g, mu)


@settings(max_examples=100, deadline=None)
@given(bipartite_graphs(max_n=30))
def test_matching_size_against_scipy(g):
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import maximum_bipartite_matching

    rows = [i for i, adj in enumerate(g.edges) for _ in adj]
    cols = [j for adj in g.edges for j in adj]
    mat = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(g.n, g.n))
    expected = int((maximum_bipartite_matching(mat, perm_type="column") >= 0).sum())
    mu = maximum_matching(g)
    assert len(mu) == expected
    assert len(set(mu.values())) == len(mu)
    assert all(g.has_edge(i, j) for i, j in mu.items())


def test_long_augmenting_paths():
    # path-shaped graph where greedy choices force long augmentations
    n = 400
    edges = tuple((i, i + 1) if i + 1 < n else (i,) for i in range(n))
    g = DominationGraph(n, edges)
    ok, mu = has_perfect_matching(g)
    assert ok and is_valid_matching(g, mu)


@settings(max_examples=80, deadline=None)
@given(line_instances(max_n=6, max_m=4))
def test_edges_follow_rank_positions(pair):
    inst, _ = pair
    prof = ordinal_profile_from_instance(inst)
    for x in range(inst.m):
        assert domination_graph(prof, x).edge_set() == brute_force_edges(prof, x)


@settings(max_examples=60, deadline=None)
@given(euclidean_instances(), st.floats(1e-3, 1e3))
def test_graph_scale_invariant(pair, c):
    inst, _ = pair
    p1 = ordinal_profile_from_instance(inst)
    p2 = ordinal_profile_from_instance(inst.scaled(c))
    for x in range(inst.m):
        assert domination_graph(p1, x).edge_set() == domination_graph(p2, x).edge_set()


@settings(max_examples=100, deadline=None)
@given(euclidean_instances(max_n=10, max_m=5))
def test_some_alternative_has_perfect_matching(pair):
    inst, _ = pair
    assert perfect_matching_alternatives(ordinal_profile_from_instance(inst))


@settings(max_examples=100, deadline=None)
@given(euclidean_instances(max_n=10, max_m=5))
def test_lemma_bound_on_random_instances(pair):
    inst, grp = pair
    prof = ordinal_profile_from_instance(inst)
    for x in perfect_matching_alternatives(prof):
        for y in range(inst.m):
            assert lemma_distance_bound_holds(inst, grp, x, y)


def test_lemma_trivial_for_y_equal_x():
    inst = Instance.from_points([0.0, 1.0], [0.0, 1.0])
    assert lemma_distance_bound_holds(inst, Grouping([[0, 1]]), 0, 0)


def test_lemma_on_ordinal_lower_bound_instance():
    lb = gen_ordinal_maxavg(3)
    prof = ordinal_profile_from_instance(lb.inst)
    x = perfect_matching_alternatives(prof)[0]
    assert x == 0
    d_xy = lb.inst.dist[lb.inst.alt(0), lb.inst.alt(1)]
    rhs = 4 / lb.inst.n * lb.inst.agent_alt[:, 1].sum()
    assert d_xy <= rhs
    assert lemma_distance_bound_holds(lb.inst, lb.grp, 0, 1)


def test_lemma_precondition_reported():
    # every agent at b: a's graph has no edges at all
    inst = Instance.from_points([1.0, 1.0], [0.0, 1.0])
    with pytest.raises(PreconditionError):
        lemma_distance_bound_holds(inst, Grouping([[0, 1]]), 0, 1)
