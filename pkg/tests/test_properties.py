from __future__ import annotations

import math

from hypothesis import HealthCheck, assume, given, settings, strategies as st

from indoorroute.calibrate import WeightSchedule
from indoorroute.criteria import ALL_KINDS, CostModel, CriterionKind as K, StepCoster
from indoorroute.graph import deviation_angle, dump_graph, load_graph, turn_angle
from indoorroute.router import brute_force_route, make_route, plan_route
from indoorroute.similarity import similarity

from strategies import graphs, walks

SETTINGS = settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
weights = st.sampled_from([0, 0.5, 1, 5, 25])


@SETTINGS
@given(graphs())
def test_graph_round_trip(g):
    assert load_graph(dump_graph(g)) == g


@SETTINGS
@given(graphs(), st.data())
def test_angles_bounded_and_symmetric(g, data):
    v = data.draw(st.sampled_from(list(g.nodes)))
    nb = g.neighbors(v)
    assume(nb)
    p = data.draw(st.sampled_from(nb))
    n = data.draw(st.sampled_from(nb))
    a = turn_angle(g, p, v, n)
    assert a is None or 0 <= a <= 180
    assert a == turn_angle(g, n, v, p)
    d = deviation_angle(g, v, n, data.draw(st.sampled_from(list(g.nodes))))
    assert d is None or 0 <= d <= 180


@SETTINGS
@given(graphs(), st.data())
def test_similarity_properties(g, data):
    r1 = data.draw(walks(g, 1))
    r2 = data.draw(walks(g, 1))
    assume(len(r1) > 1 and len(r2) > 1)
    s = similarity(g, r1, r2)
    assert 0 <= s <= 1
    assert s == similarity(g, r2, r1)
    assert similarity(g, r1, r1) == 1.0
    e1 = {frozenset(e) for e in r1.edges()}
    e2 = {frozenset(e) for e in r2.edges()}
    shared = math.fsum(g.edges[k].length for k in e1 & e2)
    shorter = min(math.fsum(g.edges[k].length for k in e) for e in (e1, e2))
    assert s == min(shared / shorter, 1.0)
    assert math.isclose(shorter, min(r1.metric_length, r2.metric_length), rel_tol=1e-12)
    if not e1 & e2:
        assert s == 0


@SETTINGS
@given(graphs(max_nodes=9), st.data(), st.sampled_from(ALL_KINDS), weights)
def test_router_matches_oracle(g, data, kind, w):
    s = data.draw(st.sampled_from(list(g.nodes)))
    d = data.draw(st.sampled_from(list(g.nodes)))
    m = CostModel.single(kind, w)
    r = plan_route(g, s, d, m)
    b = brute_force_route(g, s, d, m)
    assert (r is None) == (b is None)
    if r is not None:
        assert r.nodes == b.nodes
        assert abs(r.weighted_cost - b.weighted_cost) <= 1e-9
        assert make_route(g, r.nodes, m).weighted_cost == r.weighted_cost


@SETTINGS
@given(graphs(max_nodes=9), st.data())
def test_route_beats_any_walk(g, data):
    kinds = data.draw(st.sets(st.sampled_from([k for k in ALL_KINDS if k is not K.STREETS]), max_size=4))
    m = CostModel.from_weights({k: data.draw(weights) for k in kinds})
    walk = data.draw(walks(g, 1))
    r = plan_route(g, walk.start, walk.dest, m)
    assert r.weighted_cost <= make_route(g, walk.nodes, m).weighted_cost + 1e-9
    assert r.metric_length <= r.weighted_cost + 1e-9


@SETTINGS
@given(graphs(), st.data(), st.sampled_from(ALL_KINDS), weights)
def test_step_cost_at_least_length(g, data, kind, w):
    x = data.draw(st.sampled_from(list(g.nodes)))
    assume(g.neighbors(x))
    y = data.draw(st.sampled_from(g.neighbors(x)))
    prev = data.draw(st.sampled_from((None, *g.neighbors(x))))
    c = StepCoster(g, CostModel.single(kind, w), data.draw(st.sampled_from(list(g.nodes))))
    assert c(prev, x, y) >= g.length(x, y)


@settings(max_examples=200, deadline=None)
@given(
    st.integers(1, 30),
    st.sampled_from([0.5, 1, 2, 5]),
    st.integers(1, 10),
    st.sampled_from([1, 5, 10, 20]),
)
def test_schedule_points(fine_max, fine_step, extra, coarse_step):
    assume(fine_step <= fine_max)
    s = WeightSchedule(fine_max, fine_step, fine_max + extra * 7, coarse_step)
    pts = s.base_points()
    assert pts == sorted(set(pts))
    assert pts[0] == 0 and fine_max in pts and s.coarse_max == pts[-1]
    fine = [p for p in pts if p <= fine_max]
    assert all(b - a <= fine_step + 1e-9 for a, b in zip(fine, fine[1:]))
    coarse = [p for p in pts if p > fine_max]
    assert all(b - a <= coarse_step + 1e-9 for a, b in zip([fine_max] + coarse, coarse))
