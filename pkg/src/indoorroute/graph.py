"""Indoor path network: typed multi-floor undirected graph, JSON I/O and plan geometry."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Any, Iterable, Union

NodeId = Union[str, int]


class NodeKind(str, Enum):
    PLAIN = "plain"
    DOORWAY = "doorway"
    ENTRANCE = "entrance"
    REVOLVING_DOOR = "revolving_door"


class EdgeKind(str, Enum):
    WALK = "walk"
    STAIRCASE = "staircase"
    ELEVATOR = "elevator"


VERTICAL_KINDS = frozenset({EdgeKind.STAIRCASE, EdgeKind.ELEVATOR})


class GraphError(ValueError):
    """Raised when a graph document is malformed or violates an invariant."""


class GraphParseError(GraphError):
    pass


class GraphValidationError(GraphError):
    pass


@dataclass(frozen=True)
class Node:
    id: NodeId
    x: float
    y: float
    floor: int = 0
    kind: NodeKind = NodeKind.PLAIN

    def __post_init__(self):
        # ints would serialise differently from the floats a reload produces
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))


@dataclass(frozen=True)
class Edge:
    a: NodeId
    b: NodeId
    length: float
    kind: EdgeKind = EdgeKind.WALK

    def __post_init__(self):
        object.__setattr__(self, "length", float(self.length))

    @property
    def key(self) -> frozenset:
        return frozenset((self.a, self.b))


def _id_sort_key(node_id: NodeId) -> tuple:
    # ints before strings so mixed-id graphs still order deterministically
    return (isinstance(node_id, str), node_id)


@dataclass(frozen=True, eq=False)
class IndoorGraph:
    """Immutable undirected graph. Build with :meth:`from_parts` or :func:`load_graph`."""

    nodes: dict[NodeId, Node]
    edges: dict[frozenset, Edge]
    adjacency: dict[NodeId, tuple[NodeId, ...]]
    rank: dict[NodeId, int] = field(repr=False)
    # memo for derived geometry; the graph itself never changes
    _memo: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @classmethod
    def from_parts(cls, nodes: Iterable[Node], edges: Iterable[Edge]) -> "IndoorGraph":
        node_map: dict[NodeId, Node] = {}
        for n in nodes:
            if n.id in node_map:
                raise GraphValidationError(f"duplicate node id {n.id!r}")
            if not (math.isfinite(n.x) and math.isfinite(n.y)):
                raise GraphValidationError(f"node {n.id!r} has non-finite coordinates")
            if not isinstance(n.kind, NodeKind):
                raise GraphValidationError(f"node {n.id!r} has invalid kind {n.kind!r}")
            node_map[n.id] = n

        edge_map: dict[frozenset, Edge] = {}
        nbrs: dict[NodeId, list[NodeId]] = {nid: [] for nid in node_map}
        for e in edges:
            for end in (e.a, e.b):
                if end not in node_map:
                    raise GraphValidationError(
                        f"edge {e.a!r}-{e.b!r} references unknown node {end!r}"
                    )
            if e.a == e.b:
                raise GraphValidationError(f"self-loop at node {e.a!r}")
            if not (math.isfinite(e.length) and e.length > 0):
                raise GraphValidationError(
                    f"edge {e.a!r}-{e.b!r} has non-positive or non-finite length {e.length!r}"
                )
            if not isinstance(e.kind, EdgeKind):
                raise GraphValidationError(f"edge {e.a!r}-{e.b!r} has invalid kind {e.kind!r}")
            if e.key in edge_map:
                raise GraphValidationError(f"duplicate edge {e.a!r}-{e.b!r}")
            fa, fb = node_map[e.a].floor, node_map[e.b].floor
            if fa != fb and e.kind not in VERTICAL_KINDS:
                raise GraphValidationError(
                    f"edge {e.a!r}-{e.b!r} spans floors {fa}->{fb} but has kind {e.kind.value!r}"
                )
            edge_map[e.key] = e
            nbrs[e.a].append(e.b)
            nbrs[e.b].append(e.a)

        ordered = sorted(node_map, key=_id_sort_key)
        rank = {nid: i for i, nid in enumerate(ordered)}
        adjacency = {nid: tuple(sorted(nbrs[nid], key=rank.__getitem__)) for nid in ordered}
        return cls(
            nodes={nid: node_map[nid] for nid in ordered},
            edges=edge_map,
            adjacency=adjacency,
            rank=rank,
        )

    def __contains__(self, node_id: object) -> bool:
        return node_id in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def degree(self, node_id: NodeId) -> int:
        return len(self.adjacency[node_id])

    def neighbors(self, node_id: NodeId) -> tuple[NodeId, ...]:
        return self.adjacency[node_id]

    def edge(self, a: NodeId, b: NodeId) -> Edge:
        try:
            return self.edges[frozenset((a, b))]
        except KeyError:
            raise KeyError(f"no edge between {a!r} and {b!r}") from None

    def has_edge(self, a: NodeId, b: NodeId) -> bool:
        return frozenset((a, b)) in self.edges

    def length(self, a: NodeId, b: NodeId) -> float:
        return self.edge(a, b).length

    def resolve(self, token: str | NodeId) -> NodeId:
        """Map a CLI-style token onto an existing id (``"3"`` finds integer id ``3``)."""
        if token in self.nodes:
            return token
        if isinstance(token, str):
            try:
                as_int = int(token)
            except ValueError:
                pass
            else:
                if as_int in self.nodes:
                    return as_int
        raise KeyError(f"unknown node id {token!r}")

    def to_dict(self) -> dict[str, Any]:
        edges = sorted(
            self.edges.values(),
            key=lambda e: tuple(sorted((self.rank[e.a], self.rank[e.b]))),
        )
        return {
            "nodes": [
                {"id": n.id, "x": n.x, "y": n.y, "floor": n.floor, "kind": n.kind.value}
                for n in self.nodes.values()
            ],
            "edges": [
                {"a": e.a, "b": e.b, "length": e.length, "kind": e.kind.value} for e in edges
            ],
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IndoorGraph):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges

    __hash__ = object.__hash__


def _require(obj: dict, key: str, where: str) -> Any:
    if key not in obj:
        raise GraphParseError(f"{where} is missing field {key!r}")
    return obj[key]


def _as_id(value: Any, where: str) -> NodeId:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise GraphParseError(f"{where}: node id must be a string or integer, got {value!r}")
    return value


def _as_number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise GraphParseError(f"{where}: expected a number, got {value!r}")
    return float(value)


def graph_from_dict(doc: Any) -> IndoorGraph:
    if not isinstance(doc, dict):
        raise GraphParseError("graph document must be a JSON object")
    raw_nodes = _require(doc, "nodes", "graph")
    raw_edges = _require(doc, "edges", "graph")
    if not isinstance(raw_nodes, list) or not isinstance(raw_edges, list):
        raise GraphParseError("'nodes' and 'edges' must be arrays")

    nodes = []
    for i, rn in enumerate(raw_nodes):
        where = f"nodes[{i}]"
        if not isinstance(rn, dict):
            raise GraphParseError(f"{where} must be an object")
        floor = rn.get("floor", 0)
        if isinstance(floor, bool) or not isinstance(floor, int):
            raise GraphParseError(f"{where}: floor must be an integer")
        try:
            kind = NodeKind(rn.get("kind", "plain"))
        except ValueError:
            raise GraphValidationError(f"{where}: unknown node kind {rn.get('kind')!r}") from None
        nodes.append(
            Node(
                id=_as_id(_require(rn, "id", where), where),
                x=_as_number(_require(rn, "x", where), where),
                y=_as_number(_require(rn, "y", where), where),
                floor=floor,
                kind=kind,
            )
        )

    edges = []
    for i, re_ in enumerate(raw_edges):
        where = f"edges[{i}]"
        if not isinstance(re_, dict):
            raise GraphParseError(f"{where} must be an object")
        try:
            kind = EdgeKind(re_.get("kind", "walk"))
        except ValueError:
            raise GraphValidationError(f"{where}: unknown edge kind {re_.get('kind')!r}") from None
        edges.append(
            Edge(
                a=_as_id(_require(re_, "a", where), where),
                b=_as_id(_require(re_, "b", where), where),
                length=_as_number(_require(re_, "length", where), where),
                kind=kind,
            )
        )
    return IndoorGraph.from_parts(nodes, edges)


def load_graph(source: IO[bytes] | IO[str] | bytes | str) -> IndoorGraph:
    """Parse a UTF-8 JSON graph document from a stream (or raw bytes/str)."""
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise GraphParseError(f"graph is not valid UTF-8: {exc}") from None
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise GraphParseError(f"invalid JSON: {exc}") from None
    return graph_from_dict(doc)


def dump_graph(g: IndoorGraph, stream: IO[str] | None = None) -> str:
    text = json.dumps(g.to_dict(), indent=1) + "\n"
    if stream is not None:
        stream.write(text)
    return text


def read_graph_file(path) -> IndoorGraph:
    with open(path, "rb") as fh:
        return load_graph(fh)


# --- plan geometry -----------------------------------------------------------


def _planar_leg(g: IndoorGraph, a: NodeId, b: NodeId) -> tuple[float, float] | None:
    """Plan vector a->b along an existing edge, or None when it has no usable direction."""
    e = g.edge(a, b)
    na, nb = g.nodes[a], g.nodes[b]
    if e.kind in VERTICAL_KINDS or na.floor != nb.floor:
        return None
    dx, dy = nb.x - na.x, nb.y - na.y
    if dx == 0.0 and dy == 0.0:
        return None
    return dx, dy


def _angle_deg(u: tuple[float, float], v: tuple[float, float]) -> float:
    # atan2 form stays exact for collinear vectors where acos(dot/|u||v|) drifts
    cross = u[0] * v[1] - u[1] * v[0]
    dot = u[0] * v[0] + u[1] * v[1]
    return math.degrees(math.atan2(abs(cross), dot))


def cached_turn_angle(g: IndoorGraph, prev: NodeId, via: NodeId, next: NodeId) -> float | None:
    key = ("turn", prev, via, next)
    try:
        return g._memo[key]
    except KeyError:
        val = g._memo[key] = turn_angle(g, prev, via, next)
        return val


def turn_angle(g: IndoorGraph, prev: NodeId, via: NodeId, next: NodeId) -> float | None:
    """Interior angle at ``via`` between the legs towards ``prev`` and ``next``.

    180 is a straight continuation, 0 a full reversal. ``None`` when either edge is
    vertical (staircase/elevator or spanning floors) or has zero plan length.
    """
    if not g.has_edge(prev, via) or not g.has_edge(via, next):
        raise ValueError(f"{prev!r}-{via!r}-{next!r} is not a pair of adjacent edges")
    back = _planar_leg(g, via, prev)
    ahead = _planar_leg(g, via, next)
    if back is None or ahead is None:
        return None
    return _angle_deg(back, ahead)


def deviation_angle(g: IndoorGraph, via: NodeId, next: NodeId, dest: NodeId) -> float | None:
    """Angle between heading via->next and the straight bearing via->dest (0 = dead on)."""
    if not g.has_edge(via, next):
        raise ValueError(f"{via!r}-{next!r} is not an edge")
    if dest not in g.nodes:
        raise ValueError(f"unknown destination {dest!r}")
    ahead = _planar_leg(g, via, next)
    if ahead is None:
        return None
    nv, nd = g.nodes[via], g.nodes[dest]
    bearing = (nd.x - nv.x, nd.y - nv.y)
    if bearing == (0.0, 0.0):
        return None
    return _angle_deg(ahead, bearing)
