"""Seeded synthetic campuses and planted route corpora.

A campus is a stack of floors. Each floor is a rectangular corridor grid split
into buildings (vertical bands of columns); corridors crossing a building
boundary get a door node, some cells get a diagonal shortcut, and a few cores
(a staircase plus an elevator with its own lobby node) link floors. Preferred routes are
planned under a hidden ("planted") cost model, optionally perturbed per record.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .criteria import CostModel
from .graph import Edge, EdgeKind, IndoorGraph, Node, NodeKind
from .router import plan_route
from .similarity import CorpusRecord, RouteCorpus


class SyntheticSpecError(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticSpec:
    floors: int = 3
    rows: int = 9
    cols: int = 20
    spacing: float = 10.0
    buildings: int = 4
    diagonal_density: float = 0.25
    doorway_density: float = 0.12
    entrance_density: float = 0.12
    revolving_density: float = 0.5
    gap_density: float = 0.15
    cores: int = 6
    stair_length: float = 8.0
    elevator_lengths: tuple[float, ...] = (7.8, 6.8)
    lobby_length: float = 0.5
    planted: CostModel = field(default_factory=CostModel)
    records: int = 60
    multi_floor_share: float = 0.6
    noise: float = 0.0

    def __post_init__(self):
        if self.floors < 1 or self.rows < 2 or self.cols < 2:
            raise SyntheticSpecError("need at least 1 floor and a 2x2 grid")
        if not (1 <= self.buildings <= self.cols):
            raise SyntheticSpecError("buildings must lie in [1, cols]")
        for name in ("diagonal_density", "doorway_density", "entrance_density",
                     "revolving_density", "gap_density", "multi_floor_share", "noise"):
            val = getattr(self, name)
            if not (0.0 <= val <= 1.0):
                raise SyntheticSpecError(f"{name} must lie in [0, 1], got {val}")
        if self.doorway_density + self.entrance_density > 1.0:
            raise SyntheticSpecError("doorway_density + entrance_density must not exceed 1")
        if self.records < 1:
            raise SyntheticSpecError("corpus needs at least one record")
        if self.floors > 1 and not (1 <= self.cores <= self.rows * self.cols):
            raise SyntheticSpecError("multi-floor campus needs between 1 and rows*cols cores")
        lengths = (self.spacing, self.stair_length, self.lobby_length, *self.elevator_lengths)
        if not self.elevator_lengths or min(lengths) <= 0:
            raise SyntheticSpecError("lengths must be positive")

    def to_dict(self) -> dict:
        doc = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "planted"}
        doc["elevator_lengths"] = list(self.elevator_lengths)
        doc["planted"] = self.planted.to_dict()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "SyntheticSpec":
        doc = dict(doc)
        if "planted" in doc:
            doc["planted"] = CostModel.from_dict(doc["planted"])
        if "elevator_lengths" in doc:
            doc["elevator_lengths"] = tuple(doc["elevator_lengths"])
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise SyntheticSpecError(f"unknown spec fields: {sorted(unknown)}")
        return cls(**doc)


def _grid_id(f: int, r: int, c: int) -> str:
    return f"F{f}R{r:02d}C{c:02d}"


def _is_grid_id(node_id) -> bool:
    return isinstance(node_id, str) and "R" in node_id and "C" in node_id


def generate_campus(spec: SyntheticSpec, rng: random.Random) -> IndoorGraph:
    s = spec.spacing
    nodes: list[Node] = []
    edges: list[Edge] = []
    door_count = 0
    band = spec.cols / spec.buildings

    def building(c: int) -> int:
        return min(int(c / band), spec.buildings - 1)

    def corridor(f, a, b, length, door_kind):
        nonlocal door_count
        if door_kind is NodeKind.PLAIN:
            edges.append(Edge(a.id, b.id, length))
            return
        door_count += 1
        d = Node(f"F{f}D{door_count:04d}", (a.x + b.x) / 2, (a.y + b.y) / 2, f, door_kind)
        nodes.append(d)
        edges.append(Edge(a.id, d.id, length / 2))
        edges.append(Edge(d.id, b.id, length / 2))

    def interior_door() -> NodeKind:
        u = rng.random()
        if u < spec.doorway_density:
            return NodeKind.DOORWAY
        if u < spec.doorway_density + spec.entrance_density:
            return NodeKind.ENTRANCE
        return NodeKind.PLAIN

    for f in range(spec.floors):
        grid = {}
        for r in range(spec.rows):
            for c in range(spec.cols):
                n = Node(_grid_id(f, r, c), c * s, r * s, f)
                grid[r, c] = n
                nodes.append(n)
        for r in range(spec.rows):
            for c in range(spec.cols):
                if c + 1 < spec.cols:
                    if building(c) != building(c + 1):
                        kind = (NodeKind.REVOLVING_DOOR if rng.random() < spec.revolving_density
                                else NodeKind.DOORWAY)
                    else:
                        kind = interior_door()
                    corridor(f, grid[r, c], grid[r, c + 1], s, kind)
                # column 0 keeps every segment, so rows stay linked and the floor connected
                if r + 1 < spec.rows and (c == 0 or rng.random() >= spec.gap_density):
                    corridor(f, grid[r, c], grid[r + 1, c], s, interior_door())
        for r in range(spec.rows - 1):
            for c in range(spec.cols - 1):
                if building(c) != building(c + 1) or rng.random() >= spec.diagonal_density:
                    continue
                if rng.random() < 0.5:
                    a, b = grid[r, c], grid[r + 1, c + 1]
                else:
                    a, b = grid[r, c + 1], grid[r + 1, c]
                # diagonal shortcuts cut through rooms, so they are entered through a door
                kind = NodeKind.ENTRANCE if rng.random() < 0.5 else NodeKind.PLAIN
                corridor(f, a, b, s * math.sqrt(2.0), kind)

    if spec.floors > 1:
        # a core is a staircase between grid nodes plus an elevator reached through
        # a short lobby leg; the elevator lengths make stairs vs elevator near-ties
        cells = [(r, c) for r in range(spec.rows) for c in range(spec.cols)]
        for k, (r, c) in enumerate(rng.sample(cells, spec.cores)):
            lift = spec.elevator_lengths[k % len(spec.elevator_lengths)]
            for f in range(spec.floors):
                g_id = _grid_id(f, r, c)
                lobby = Node(f"F{f}E{k:02d}", c * s, r * s, f)
                nodes.append(lobby)
                edges.append(Edge(g_id, lobby.id, spec.lobby_length))
                if f + 1 < spec.floors:
                    edges.append(Edge(g_id, _grid_id(f + 1, r, c), spec.stair_length,
                                      EdgeKind.STAIRCASE))
                    edges.append(Edge(lobby.id, f"F{f + 1}E{k:02d}", lift, EdgeKind.ELEVATOR))

    return IndoorGraph.from_parts(nodes, edges)


def perturbed(model: CostModel, rng: random.Random) -> CostModel:
    """Each weight scaled by an independent factor drawn from [0.5, 2]."""
    return CostModel.from_weights(
        {c.kind: c.w * rng.uniform(0.5, 2.0) for c in model.criteria},
        straight_threshold=model.straight_threshold,
        turn_threshold=model.turn_threshold,
        linearity_threshold=model.linearity_threshold,
        allow_turns_and_streets=model.allow_turns_and_streets,
        deviation_excludes_prev=model.deviation_excludes_prev,
    )


def generate_corpus(g: IndoorGraph, spec: SyntheticSpec, rng: random.Random) -> RouteCorpus:
    grid_nodes = [n for n in g.nodes.values() if _is_grid_id(n.id)]
    by_floor: dict[int, list] = {}
    for n in grid_nodes:
        by_floor.setdefault(n.floor, []).append(n.id)
    floors = sorted(by_floor)
    records = []
    while len(records) < spec.records:
        f1 = rng.choice(floors)
        f2 = f1
        if len(floors) > 1 and rng.random() < spec.multi_floor_share:
            f2 = rng.choice([f for f in floors if f != f1])
        start = rng.choice(by_floor[f1])
        dest = rng.choice(by_floor[f2])
        if start == dest:
            continue
        model = spec.planted
        if spec.noise and rng.random() < spec.noise:
            model = perturbed(model, rng)
        route = plan_route(g, start, dest, model)
        if route is None:
            continue
        records.append(CorpusRecord(start, dest, route))
    return RouteCorpus(tuple(records))


def generate(spec: SyntheticSpec, seed: int) -> tuple[IndoorGraph, RouteCorpus]:
    rng = random.Random(seed)
    g = generate_campus(spec, rng)
    # separate stream so changing the planted model never changes the campus
    corpus = generate_corpus(g, spec, random.Random(rng.random()))
    return g, corpus
