"""Human-preference cost modifiers layered on top of metric edge length.

Every criterion contributes ``w * count`` meters to a traversal step ``x -> y``,
where ``count`` is 0/1 for occurrence criteria and the degree of ``x`` for the
branching factor. Steps carry the node the route arrived from, because turn-type
criteria cannot be evaluated from a single edge.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping

from .graph import (
    EdgeKind,
    IndoorGraph,
    NodeId,
    NodeKind,
    cached_turn_angle,
    deviation_angle,
)

ANGLE_EPS = 1e-9


class CriterionKind(str, Enum):
    TURNS = "turns"
    STREETS = "streets"
    DECISION_POINTS = "decision_points"
    BRANCHING_FACTOR = "branching_factor"
    MIN_DEVIATION_ANGLE = "min_deviation_angle"
    LINEARITY = "linearity"
    STAIRCASES = "staircases"
    ELEVATORS = "elevators"
    DOORWAYS = "doorways"
    ENTRANCES = "entrances"
    REVOLVING_DOORS = "revolving_doors"


ALL_KINDS: tuple[CriterionKind, ...] = tuple(CriterionKind)
_ORDER = {k: i for i, k in enumerate(ALL_KINDS)}

# criteria whose penalty counts occurrences (0/1 per step)
OCCURRENCE_KINDS = frozenset(
    {
        CriterionKind.STAIRCASES,
        CriterionKind.ELEVATORS,
        CriterionKind.DOORWAYS,
        CriterionKind.ENTRANCES,
        CriterionKind.REVOLVING_DOORS,
        CriterionKind.DECISION_POINTS,
        CriterionKind.TURNS,
        CriterionKind.STREETS,
    }
)

_TURN_KINDS = frozenset({CriterionKind.TURNS, CriterionKind.STREETS, CriterionKind.LINEARITY})

_NODE_KIND_FOR = {
    CriterionKind.DOORWAYS: NodeKind.DOORWAY,
    CriterionKind.ENTRANCES: NodeKind.ENTRANCE,
    CriterionKind.REVOLVING_DOORS: NodeKind.REVOLVING_DOOR,
}
_EDGE_KIND_FOR = {
    CriterionKind.STAIRCASES: EdgeKind.STAIRCASE,
    CriterionKind.ELEVATORS: EdgeKind.ELEVATOR,
}


class CostModelError(ValueError):
    pass


def parse_kind(name: str | CriterionKind) -> CriterionKind:
    if isinstance(name, CriterionKind):
        return name
    if not isinstance(name, str):
        raise CostModelError(f"criterion name must be a string, got {name!r}")
    try:
        return CriterionKind(name.strip().lower().replace("-", "_"))
    except ValueError:
        known = ", ".join(k.value for k in ALL_KINDS)
        raise CostModelError(f"unknown criterion {name!r} (known: {known})") from None


@dataclass(frozen=True)
class WeightedCriterion:
    kind: CriterionKind
    w: float

    def __post_init__(self):
        if not isinstance(self.kind, CriterionKind):
            raise CostModelError(f"invalid criterion kind {self.kind!r}")
        if isinstance(self.w, bool) or not isinstance(self.w, (int, float)):
            raise CostModelError(f"weight for {self.kind.value} must be a number")
        if not math.isfinite(self.w) or self.w < 0:
            raise CostModelError(f"weight for {self.kind.value} must be finite and >= 0, got {self.w}")


@dataclass(frozen=True)
class CostModel:
    """A set of weighted criteria plus the angle thresholds they use.

    ``deviation_excludes_prev`` drops the arrival edge from the minimum-deviation
    candidate set; it makes that criterion depend on the predecessor.
    """

    criteria: tuple[WeightedCriterion, ...] = ()
    straight_threshold: float = 180.0
    turn_threshold: float = 90.0
    linearity_threshold: float = 150.0
    allow_turns_and_streets: bool = False
    deviation_excludes_prev: bool = True
    _weights: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        crit = tuple(sorted(self.criteria, key=lambda c: _ORDER[c.kind]))
        kinds = [c.kind for c in crit]
        if len(set(kinds)) != len(kinds):
            raise CostModelError("cost model lists the same criterion twice")
        if (
            CriterionKind.TURNS in kinds
            and CriterionKind.STREETS in kinds
            and not self.allow_turns_and_streets
        ):
            raise CostModelError(
                "turns and streets overlap; set allow_turns_and_streets to combine them"
            )
        for name in ("straight_threshold", "turn_threshold", "linearity_threshold"):
            val = getattr(self, name)
            if not (0.0 < val <= 180.0):
                raise CostModelError(f"{name} must lie in (0, 180], got {val}")
        object.__setattr__(self, "criteria", crit)
        object.__setattr__(self, "_weights", {c.kind: float(c.w) for c in crit})

    @classmethod
    def from_weights(cls, weights: Mapping[CriterionKind | str, float], **options) -> "CostModel":
        crit = tuple(WeightedCriterion(parse_kind(k), w) for k, w in weights.items())
        return cls(criteria=crit, **options)

    @classmethod
    def single(cls, kind: CriterionKind | str, w: float, **options) -> "CostModel":
        return cls.from_weights({parse_kind(kind): w}, **options)

    @property
    def weights(self) -> dict[CriterionKind, float]:
        return dict(self._weights)

    @property
    def kinds(self) -> tuple[CriterionKind, ...]:
        return tuple(c.kind for c in self.criteria)

    def weight(self, kind: CriterionKind) -> float:
        return self._weights.get(kind, 0.0)

    def zeroed(self) -> "CostModel":
        return self.scaled(0.0)

    def scaled(self, factor: float) -> "CostModel":
        crit = tuple(WeightedCriterion(c.kind, c.w * factor) for c in self.criteria)
        return self._replace(criteria=crit)

    def _replace(self, **changes) -> "CostModel":
        opts = dict(
            criteria=self.criteria,
            straight_threshold=self.straight_threshold,
            turn_threshold=self.turn_threshold,
            linearity_threshold=self.linearity_threshold,
            allow_turns_and_streets=self.allow_turns_and_streets,
            deviation_excludes_prev=self.deviation_excludes_prev,
        )
        opts.update(changes)
        return CostModel(**opts)

    @property
    def active(self) -> tuple[WeightedCriterion, ...]:
        return tuple(c for c in self.criteria if c.w > 0)

    @property
    def needs_destination(self) -> bool:
        return any(c.kind is CriterionKind.MIN_DEVIATION_ANGLE for c in self.active)

    @property
    def needs_predecessor(self) -> bool:
        for c in self.active:
            if c.kind in _TURN_KINDS:
                return True
            if c.kind is CriterionKind.MIN_DEVIATION_ANGLE and self.deviation_excludes_prev:
                return True
        return False

    def to_dict(self) -> dict[str, Any]:
        return {
            "criteria": [{"kind": c.kind.value, "w": c.w} for c in self.criteria],
            "straight_threshold": self.straight_threshold,
            "turn_threshold": self.turn_threshold,
            "linearity_threshold": self.linearity_threshold,
            "allow_turns_and_streets": self.allow_turns_and_streets,
            "deviation_excludes_prev": self.deviation_excludes_prev,
        }

    @classmethod
    def from_dict(cls, doc: Any) -> "CostModel":
        if not isinstance(doc, dict):
            raise CostModelError("cost model must be a JSON object")
        raw = doc.get("criteria", [])
        if not isinstance(raw, list):
            raise CostModelError("'criteria' must be an array")
        crit = []
        for i, item in enumerate(raw):
            if not isinstance(item, dict) or "kind" not in item or "w" not in item:
                raise CostModelError(f"criteria[{i}] needs 'kind' and 'w'")
            crit.append(WeightedCriterion(parse_kind(item["kind"]), item["w"]))
        opts = {}
        for key in ("straight_threshold", "turn_threshold", "linearity_threshold"):
            if key in doc:
                val = doc[key]
                if isinstance(val, bool) or not isinstance(val, (int, float)):
                    raise CostModelError(f"{key} must be a number")
                opts[key] = float(val)
        for key in ("allow_turns_and_streets", "deviation_excludes_prev"):
            if key in doc:
                if not isinstance(doc[key], bool):
                    raise CostModelError(f"{key} must be a boolean")
                opts[key] = doc[key]
        return cls(criteria=tuple(crit), **opts)


@dataclass(frozen=True)
class StepContext:
    prev: NodeId | None
    x: NodeId
    y: NodeId
    dest: NodeId


class StepCoster:
    """Evaluates steps for one (graph, model, destination) triple with memoised geometry.

    Cheap to build; the router creates one per query.
    """

    def __init__(self, g: IndoorGraph, model: CostModel, dest: NodeId):
        self.g = g
        self.model = model
        self.dest = dest
        self._active = model.active
        self._linear_memo: dict = {}
        self._deviation_memo: dict = {}

    def _turn(self, prev, x, y):
        return cached_turn_angle(self.g, prev, x, y)

    def _linear_exempt(self, prev, x) -> frozenset | None:
        """Most-linear continuations at x, or None when nothing reaches the threshold."""
        key = (prev, x)
        try:
            return self._linear_memo[key]
        except KeyError:
            pass
        angles = {}
        for z in self.g.adjacency[x]:
            if z == prev:
                continue
            a = self._turn(prev, x, z)
            if a is not None:
                angles[z] = a
        result = None
        if angles:
            best = max(angles.values())
            if best >= self.model.linearity_threshold - ANGLE_EPS:
                result = frozenset(z for z, a in angles.items() if a >= best - ANGLE_EPS)
        self._linear_memo[key] = result
        return result

    def _deviation_exempt(self, prev, x) -> frozenset | None:
        """Neighbours of x heading most directly at the destination."""
        key = (prev, x) if self.model.deviation_excludes_prev else x
        try:
            return self._deviation_memo[key]
        except KeyError:
            pass
        angles = {}
        for z in self.g.adjacency[x]:
            if z == prev and self.model.deviation_excludes_prev:
                continue
            a = deviation_angle(self.g, x, z, self.dest)
            if a is not None:
                angles[z] = a
        result = None
        if angles:
            best = min(angles.values())
            result = frozenset(z for z, a in angles.items() if a <= best + ANGLE_EPS)
        self._deviation_memo[key] = result
        return result

    def count(self, kind: CriterionKind, prev, x, y) -> int:
        g = self.g
        m = self.model
        if kind in _NODE_KIND_FOR:
            return int(g.nodes[y].kind is _NODE_KIND_FOR[kind])
        if kind in _EDGE_KIND_FOR:
            return int(g.edge(x, y).kind is _EDGE_KIND_FOR[kind])
        deg = len(g.adjacency[x])
        if kind is CriterionKind.DECISION_POINTS:
            return int(deg >= 3)
        if kind is CriterionKind.BRANCHING_FACTOR:
            return deg if deg >= 3 else 0
        if kind is CriterionKind.TURNS or kind is CriterionKind.STREETS:
            if prev is None:
                return 0
            a = self._turn(prev, x, y)
            if a is None:
                return 0
            if kind is CriterionKind.TURNS:
                return int(a <= m.turn_threshold + ANGLE_EPS)
            return int(a < m.straight_threshold - ANGLE_EPS)
        if kind is CriterionKind.LINEARITY:
            if prev is None or deg < 3:
                return 0
            exempt = self._linear_exempt(prev, x)
            return 0 if exempt is None or y in exempt else 1
        if kind is CriterionKind.MIN_DEVIATION_ANGLE:
            if deg < 3:
                return 0
            exempt = self._deviation_exempt(prev, x)
            return 0 if exempt is None or y in exempt else 1
        raise AssertionError(kind)

    def counts(self, prev, x, y, kinds: Iterable[CriterionKind] | None = None) -> dict[CriterionKind, int]:
        if kinds is None:
            kinds = self.model.kinds
        return {k: self.count(k, prev, x, y) for k in kinds}

    def __call__(self, prev, x, y) -> float:
        cost = self.g.edge(x, y).length
        for c in self._active:
            n = self.count(c.kind, prev, x, y)
            if n:
                cost += c.w * n
        return cost


def _check_context(g: IndoorGraph, ctx: StepContext) -> None:
    if not g.has_edge(ctx.x, ctx.y):
        raise ValueError(f"step {ctx.x!r}->{ctx.y!r} is not an edge")
    if ctx.prev is not None and not g.has_edge(ctx.prev, ctx.x):
        raise ValueError(f"predecessor {ctx.prev!r} is not adjacent to {ctx.x!r}")
    if ctx.dest not in g.nodes:
        raise ValueError(f"unknown destination {ctx.dest!r}")


def step_cost(g: IndoorGraph, ctx: StepContext, model: CostModel) -> float:
    """Weighted length of traversing ``ctx.x -> ctx.y`` under ``model``, in meters."""
    _check_context(g, ctx)
    return StepCoster(g, model, ctx.dest)(ctx.prev, ctx.x, ctx.y)


def step_penalties(g: IndoorGraph, ctx: StepContext, model: CostModel) -> dict[CriterionKind, float]:
    _check_context(g, ctx)
    coster = StepCoster(g, model, ctx.dest)
    return {
        c.kind: c.w * coster.count(c.kind, ctx.prev, ctx.x, ctx.y) for c in model.criteria
    }
