from __future__ import annotations

import json
import random

import pytest

from indoorroute.criteria import (
    ALL_KINDS,
    CostModel,
    CostModelError,
    CriterionKind as K,
    StepCoster,
    StepContext,
    WeightedCriterion,
    parse_kind,
    step_cost,
    step_penalties,
)
from indoorroute.graph import Edge, EdgeKind, IndoorGraph, Node, NodeKind

from graphs import random_graph


def star(center=(0, 0), arms=None, kinds=None):
    """Node "x" with named arms at plan offsets, each a unit-ish walk edge."""
    arms = arms or {}
    kinds = kinds or {}
    nodes = [Node("x", *center)] + [Node(n, x, y, 0, kinds.get(n, NodeKind.PLAIN)) for n, (x, y) in arms.items()]
    edges = [Edge("x", n, 1.0) for n in arms]
    return IndoorGraph.from_parts(nodes, edges)


def test_empty_model_is_metric_length():
    g = IndoorGraph.from_parts([Node("x", 0, 0), Node("y", 7, 0)], [Edge("x", "y", 7)])
    assert step_cost(g, StepContext(None, "x", "y", "y"), CostModel()) == 7


def test_turn_examples():
    g = IndoorGraph.from_parts(
        [Node("p", -4, 0), Node("x", 0, 0), Node("s", 4, 0), Node("r", 0, 4)],
        [Edge("p", "x", 4), Edge("x", "s", 4), Edge("x", "r", 4)],
    )
    m = CostModel.single("turns", 1)
    assert step_cost(g, StepContext("p", "x", "s", "s"), m) == 4
    assert step_cost(g, StepContext("p", "x", "r", "r"), m) == 5
    # no predecessor, no turn
    assert step_cost(g, StepContext(None, "x", "r", "r"), m) == 4


def test_branching_factor_example():
    g = star(arms={"a": (-1, 0), "b": (0, 1), "c": (0, -1), "y": (3, 0)})
    g = IndoorGraph.from_parts(
        list(g.nodes.values()),
        [e if e.b != "y" else Edge("x", "y", 3) for e in g.edges.values()],
    )
    assert g.degree("x") == 4
    m = CostModel.single("branching_factor", 2)
    assert step_cost(g, StepContext("a", "x", "y", "y"), m) == 11
    assert step_penalties(g, StepContext("a", "x", "y", "y"), m) == {K.BRANCHING_FACTOR: 8}


def test_staircase_example():
    g = IndoorGraph.from_parts(
        [Node("x", 0, 0, 0), Node("y", 0, 0, 1)], [Edge("x", "y", 6, EdgeKind.STAIRCASE)]
    )
    assert step_cost(g, StepContext(None, "x", "y", "y"), CostModel.single("staircases", 17)) == 23
    assert step_cost(g, StepContext(None, "x", "y", "y"), CostModel.single("elevators", 17)) == 6


@pytest.mark.parametrize(
    "kind, node_kind",
    [
        (K.DOORWAYS, NodeKind.DOORWAY),
        (K.ENTRANCES, NodeKind.ENTRANCE),
        (K.REVOLVING_DOORS, NodeKind.REVOLVING_DOOR),
    ],
)
def test_door_criteria_count_the_node_entered(kind, node_kind):
    g = IndoorGraph.from_parts(
        [Node("a", 0, 0, 0, node_kind), Node("b", 1, 0, 0, node_kind), Node("c", 2, 0)],
        [Edge("a", "b", 1), Edge("b", "c", 1)],
    )
    c = StepCoster(g, CostModel.single(kind, 3), "c")
    assert c.count(kind, None, "a", "b") == 1
    assert c.count(kind, "a", "b", "c") == 0
    assert c(None, "a", "b") == 4


def test_elevator_edge():
    g = IndoorGraph.from_parts(
        [Node("x", 0, 0, 0), Node("y", 0, 0, 3)], [Edge("x", "y", 5, EdgeKind.ELEVATOR)]
    )
    assert step_cost(g, StepContext(None, "x", "y", "y"), CostModel.single("elevators", 2.5)) == 7.5


def test_decision_points_need_three_neighbours():
    g = star(arms={"a": (-1, 0), "b": (1, 0)})
    c = StepCoster(g, CostModel.single("decision_points", 1), "b")
    assert c.count(K.DECISION_POINTS, "a", "x", "b") == 0
    assert c.count(K.BRANCHING_FACTOR, "a", "x", "b") == 0
    g = star(arms={"a": (-1, 0), "b": (1, 0), "c": (0, 1)})
    c = StepCoster(g, CostModel.single("decision_points", 1), "b")
    assert c.count(K.DECISION_POINTS, "a", "x", "b") == 1
    assert c.count(K.BRANCHING_FACTOR, "a", "x", "b") == 3


def test_turn_and_street_thresholds():
    # arms at 180, 135, 90 and 45 degrees from the arrival leg
    g = star(arms={"p": (-1, 0), "s": (1, 0), "o": (1, 1), "r": (0, 1), "k": (-1, -1)})
    turns = StepCoster(g, CostModel.single("turns", 1), "s")
    streets = StepCoster(g, CostModel.single("streets", 1), "s")
    assert [turns.count(K.TURNS, "p", "x", y) for y in "sork"] == [0, 0, 1, 1]
    assert [streets.count(K.STREETS, "p", "x", y) for y in "sork"] == [0, 1, 1, 1]
    sharp = StepCoster(g, CostModel.single("turns", 1, turn_threshold=135), "s")
    assert sharp.count(K.TURNS, "p", "x", "o") == 1


def test_linearity_penalises_all_but_straightest():
    g = star(arms={"p": (-2, 0), "s": (2, 0.2), "r": (0, 2), "k": (-2, -2)})
    c = StepCoster(g, CostModel.single("linearity", 1), "s")
    assert [c.count(K.LINEARITY, "p", "x", y) for y in "srk"] == [0, 1, 1]
    assert c.count(K.LINEARITY, None, "x", "s") == 0


def test_linearity_below_threshold_penalises_nothing():
    # best continuation only 135 degrees: no branch is "linear"
    g = star(arms={"p": (-1, 0), "o": (1, 1), "r": (0, 1)})
    c = StepCoster(g, CostModel.single("linearity", 1), "o")
    assert c.count(K.LINEARITY, "p", "x", "o") == 0
    assert c.count(K.LINEARITY, "p", "x", "r") == 0


def test_linearity_ties_are_exempt():
    g = star(arms={"p": (0, -1), "a": (1, 5), "b": (-1, 5), "c": (1, 0)})
    c = StepCoster(g, CostModel.single("linearity", 1), "a")
    assert c.count(K.LINEARITY, "p", "x", "a") == 0
    assert c.count(K.LINEARITY, "p", "x", "b") == 0
    assert c.count(K.LINEARITY, "p", "x", "c") == 1


def test_min_deviation_penalises_off_bearing_branches():
    g = IndoorGraph.from_parts(
        [Node("x", 0, 0), Node("p", 10, 0), Node("a", 0, 1), Node("b", 0, -1), Node("d", -3, 2)],
        [Edge("x", "p", 1), Edge("x", "a", 1), Edge("x", "b", 1), Edge("a", "d", 3)],
    )
    c = StepCoster(g, CostModel.single("min_deviation_angle", 1), "d")
    assert c.count(K.MIN_DEVIATION_ANGLE, "p", "x", "a") == 0
    assert c.count(K.MIN_DEVIATION_ANGLE, "p", "x", "b") == 1


def test_min_deviation_predecessor_option():
    # going back towards p points most directly at the destination
    g = IndoorGraph.from_parts(
        [Node("x", 0, 0), Node("p", 1, 0), Node("a", 0, 1), Node("b", 0, -1), Node("d", 9, 1)],
        [Edge("x", "p", 1), Edge("x", "a", 1), Edge("x", "b", 1), Edge("p", "d", 8)],
    )
    default = StepCoster(g, CostModel.single("min_deviation_angle", 1), "d")
    assert default.count(K.MIN_DEVIATION_ANGLE, "p", "x", "a") == 0
    assert default.count(K.MIN_DEVIATION_ANGLE, "p", "x", "b") == 1
    inclusive = CostModel.single("min_deviation_angle", 1, deviation_excludes_prev=False)
    assert not inclusive.needs_predecessor
    c = StepCoster(g, inclusive, "d")
    assert c.count(K.MIN_DEVIATION_ANGLE, "p", "x", "a") == 1
    assert c.count(K.MIN_DEVIATION_ANGLE, None, "x", "p") == 0


def test_step_context_is_validated():
    g = IndoorGraph.from_parts([Node("x", 0, 0), Node("y", 1, 0), Node("z", 2, 0)],
                               [Edge("x", "y", 1), Edge("y", "z", 1)])
    with pytest.raises(ValueError):
        step_cost(g, StepContext(None, "x", "z", "z"), CostModel())
    with pytest.raises(ValueError):
        step_cost(g, StepContext("z", "x", "y", "z"), CostModel())
    with pytest.raises(ValueError):
        step_cost(g, StepContext(None, "x", "y", "q"), CostModel())


def test_model_validation():
    with pytest.raises(CostModelError):
        WeightedCriterion(K.TURNS, -1)
    with pytest.raises(CostModelError):
        WeightedCriterion(K.TURNS, float("inf"))
    with pytest.raises(CostModelError):
        CostModel((WeightedCriterion(K.TURNS, 1), WeightedCriterion(K.TURNS, 2)))
    with pytest.raises(CostModelError, match="overlap"):
        CostModel.from_weights({"turns": 1, "streets": 1})
    CostModel.from_weights({"turns": 1, "streets": 1}, allow_turns_and_streets=True)
    with pytest.raises(CostModelError):
        CostModel(turn_threshold=0)
    with pytest.raises(CostModelError):
        parse_kind("stairs")
    with pytest.raises(CostModelError):
        parse_kind(3)
    assert parse_kind("Revolving-Doors") is K.REVOLVING_DOORS


def test_model_json_round_trip():
    m = CostModel.from_weights({"entrances": 16, "turns": 1.5}, linearity_threshold=140)
    assert m.kinds == (K.TURNS, K.ENTRANCES)
    assert CostModel.from_dict(json.loads(json.dumps(m.to_dict()))) == m
    for bad in ([], {"criteria": [{"kind": "turns"}]}, {"turn_threshold": "90"},
                {"allow_turns_and_streets": 1}, {"criteria": [{"kind": "turns", "w": -2}]}):
        with pytest.raises(CostModelError):
            CostModel.from_dict(bad)


def test_zeroed_and_scaled():
    m = CostModel.from_weights({"turns": 2, "doorways": 3})
    assert m.zeroed().weights == {K.TURNS: 0.0, K.DOORWAYS: 0.0}
    assert m.scaled(2).weight(K.DOORWAYS) == 6
    assert m.weight(K.ELEVATORS) == 0.0
    assert m.zeroed().active == ()


def test_step_cost_never_below_length():
    rng = random.Random(3)
    for _ in range(60):
        g = random_graph(rng)
        ids = list(g.nodes)
        dest = rng.choice(ids)
        weights = {k: rng.choice([0, 0.5, 3]) for k in ALL_KINDS if k is not K.STREETS}
        coster = StepCoster(g, CostModel.from_weights(weights), dest)
        for x in ids:
            for y in g.neighbors(x):
                for prev in (None, *g.neighbors(x)):
                    assert coster(prev, x, y) >= g.length(x, y)


def test_penalty_is_linear_in_weight():
    rng = random.Random(4)
    for _ in range(40):
        g = random_graph(rng)
        dest = rng.choice(list(g.nodes))
        for kind in ALL_KINDS:
            c1 = StepCoster(g, CostModel.single(kind, 1), dest)
            c5 = StepCoster(g, CostModel.single(kind, 5), dest)
            for x in g.nodes:
                for y in g.neighbors(x):
                    for prev in (None, *g.neighbors(x)):
                        base = g.length(x, y)
                        assert c5(prev, x, y) - base == pytest.approx(5 * (c1(prev, x, y) - base))
