import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import euclidean_instances, line_instances
from groupdistortion.adversary import gen_full_avgmax_asym, gen_full_maxavg
from groupdistortion.core import Grouping, Instance, Objective
from groupdistortion.objectives import (
    avg_of_max,
    cost,
    cost_profile,
    distortion,
    max_of_avg,
    optimal_alternative,
    ratio,
)


def naive_cost(inst, grp, obj, x):
    """Loop-by-loop evaluation of both objectives."""
    per_group = []
    for g in grp.groups:
        ds = [inst.dist[i][inst.n + x] for i in g]
        per_group.append(sum(ds) / len(ds) if obj == "max-of-avg" else max(ds))
    return max(per_group) if obj == "max-of-avg" else sum(per_group) / len(per_group)


def test_colocated_agents_cost_zero():
    inst = Instance.from_points([2.0, 2.0], [2.0, 5.0])
    grp = Grouping([[0], [1]])
    assert max_of_avg(inst, grp, 0) == 0.0
    assert avg_of_max(inst, grp, 0) == 0.0
    assert optimal_alternative(inst, grp, "avg-of-max") == (0, 0.0)


def test_hand_example(small_line):
    inst, grp = small_line
    assert max_of_avg(inst, grp, 0) == 1.0
    assert max_of_avg(inst, grp, 1) == 0.5
    assert avg_of_max(inst, grp, 0) == 1.0
    assert avg_of_max(inst, grp, 1) == 0.5
    assert optimal_alternative(inst, grp, Objective.MAX_OF_AVG) == (1, 0.5)


def test_full_maxavg_lambda4_costs():
    lb = gen_full_maxavg(4)
    assert max_of_avg(lb.inst, lb.grp, 0) == pytest.approx(3.0, abs=1e-12)
    assert max_of_avg(lb.inst, lb.grp, 1) == pytest.approx(1.5, abs=1e-12)
    assert optimal_alternative(lb.inst, lb.grp, "max-of-avg")[0] == 1


def test_asym_k3_costs_and_ratio():
    lb = gen_full_avgmax_asym(3)
    assert avg_of_max(lb.inst, lb.grp, 0) == pytest.approx(1.0)
    assert avg_of_max(lb.inst, lb.grp, 1) == pytest.approx(1 / 3)
    assert distortion(lb.inst, lb.grp, "avg-of-max", 0).ratio == pytest.approx(3.0, abs=1e-12)


def test_singleton_groups_average():
    inst = Instance.from_points([0.0, 1.0, 4.0], [0.0, 2.0])
    grp = Grouping.singletons(3)
    assert avg_of_max(inst, grp, 1) == pytest.approx((2 + 1 + 2) / 3)
    assert max_of_avg(inst, grp, 1) == pytest.approx(2.0)


def test_ratio_rules():
    assert ratio(0.0, 0.0) == 1.0
    assert ratio(1.0, 0.0) == math.inf
    assert ratio(3.0, 1.5) == 2.0


def test_zero_over_zero_distortion():
    inst = Instance.from_points([1.0, 1.0], [1.0, 1.0])
    rep = distortion(inst, Grouping([[0, 1]]), "max-of-avg", 1)
    assert rep.ratio == 1.0 and not rep.unbounded


def test_unbounded_flag():
    inst = Instance.from_points([0.0], [0.0, 1.0])
    rep = distortion(inst, Grouping([[0]]), "avg-of-max", 1)
    assert rep.ratio == math.inf and rep.unbounded


def test_out_of_range_alternative():
    inst = Instance.from_points([0.0], [0.0, 1.0])
    with pytest.raises(IndexError):
        max_of_avg(inst, Grouping([[0]]), 2)


def test_winner_equal_to_opt_has_ratio_one(small_line):
    inst, grp = small_line
    opt, _ = optimal_alternative(inst, grp, "avg-of-max")
    assert distortion(inst, grp, "avg-of-max", opt).ratio == 1.0


@settings(max_examples=80, deadline=None)
@given(euclidean_instances(), st.sampled_from(["max-of-avg", "avg-of-max"]))
def test_matches_naive_oracle(pair, obj):
    inst, grp = pair
    for x in range(inst.m):
        assert cost(inst, grp, obj, x) == pytest.approx(naive_cost(inst, grp, obj, x), rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(line_instances(), st.sampled_from(list(Objective)))
def test_argmin_set_and_tie_break(pair, obj):
    inst, grp = pair
    prof = cost_profile(inst, grp, obj)
    assert prof.argmin
    assert all(prof.costs[x] == prof.min_cost for x in prof.argmin)
    assert optimal_alternative(inst, grp, obj) == (prof.argmin[0], prof.min_cost)
    assert prof.argmin[0] == min(range(inst.m), key=lambda x: (prof.costs[x], x))


@settings(max_examples=60, deadline=None)
@given(euclidean_instances(), st.sampled_from([0.5, 2.0, 8.0]), st.sampled_from(list(Objective)))
def test_scale_equivariance(pair, c, obj):
    # powers of two keep the scaling exact in floating point
    inst, grp = pair
    big = inst.scaled(c)
    for x in range(inst.m):
        assert cost(big, grp, obj, x) == c * cost(inst, grp, obj, x)
    assert cost_profile(big, grp, obj).argmin == cost_profile(inst, grp, obj).argmin
    for w in range(inst.m):
        assert distortion(big, grp, obj, w).ratio == distortion(inst, grp, obj, w).ratio


@settings(max_examples=60, deadline=None)
@given(euclidean_instances())
def test_singleton_reduction(pair):
    inst, _ = pair
    grp = Grouping.singletons(inst.n)
    d = inst.agent_alt
    for x in range(inst.m):
        assert max_of_avg(inst, grp, x) == pytest.approx(d[:, x].max())
        assert avg_of_max(inst, grp, x) == pytest.approx(d[:, x].mean())


@settings(max_examples=60, deadline=None)
@given(euclidean_instances())
def test_adding_colocated_singleton_adds_zero(pair):
    inst, grp = pair
    x = 0
    # new agent placed exactly on alternative x
    d = np.zeros((inst.size + 1, inst.size + 1))
    n = inst.n
    d[:n, :n] = inst.dist[:n, :n]
    d[:n, n + 1 :] = inst.dist[:n, n:]
    d[n + 1 :, :n] = inst.dist[n:, :n]
    d[n + 1 :, n + 1 :] = inst.alt_alt
    d[n, :n] = d[:n, n] = inst.dist[:n, inst.alt(x)]
    d[n, n + 1 :] = d[n + 1 :, n] = inst.alt_alt[x]
    bigger = Instance(n + 1, inst.m, d)
    grp2 = Grouping(list(grp.groups) + [[n]])
    before = avg_of_max(inst, grp, x) * grp.k
    after = avg_of_max(bigger, grp2, x) * grp2.k
    assert after == pytest.approx(before, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(euclidean_instances(), st.sampled_from(list(Objective)))
def test_costs_sandwiched(pair, obj):
    inst, grp = pair
    d = inst.agent_alt
    for x in range(inst.m):
        lo = min(d[list(g), x].mean() for g in grp.groups)
        assert lo - 1e-12 <= cost(inst, grp, obj, x) <= d[:, x].max() + 1e-12


@settings(max_examples=60, deadline=None)
@given(line_instances(), st.sampled_from(list(Objective)))
def test_ratio_at_least_one(pair, obj):
    inst, grp = pair
    for w in range(inst.m):
        assert distortion(inst, grp, obj, w).ratio >= 1.0
