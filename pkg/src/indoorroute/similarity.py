"""Shared-edge route similarity and corpus-level aggregates."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO, Any, Sequence

from .criteria import CostModel
from .graph import IndoorGraph, NodeId
from .router import Route, RoutingError, make_route, plan_route


class SimilarityError(ValueError):
    pass


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusRecord:
    start: NodeId
    dest: NodeId
    preferred: Route


@dataclass(frozen=True)
class RouteCorpus:
    records: tuple[CorpusRecord, ...]

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @classmethod
    def from_routes(cls, g: IndoorGraph, routes: Sequence[Sequence[NodeId]]) -> "RouteCorpus":
        return cls(
            tuple(CorpusRecord(r[0], r[-1], make_route(g, r)) for r in routes)
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "routes": [
                {"start": r.start, "dest": r.dest, "nodes": list(r.preferred.nodes)}
                for r in self.records
            ]
        }


def corpus_from_dict(doc: Any, g: IndoorGraph) -> RouteCorpus:
    """Validate a corpus document against ``g``; route lengths always come from the graph."""
    if not isinstance(doc, dict) or not isinstance(doc.get("routes"), list):
        raise CorpusError("corpus must be an object with a 'routes' array")
    records = []
    for i, raw in enumerate(doc["routes"]):
        if not isinstance(raw, dict) or not {"start", "dest", "nodes"} <= raw.keys():
            raise CorpusError(f"routes[{i}] needs 'start', 'dest' and 'nodes'")
        nodes = raw["nodes"]
        if not isinstance(nodes, list) or not nodes:
            raise CorpusError(f"routes[{i}].nodes must be a non-empty array")
        try:
            route = make_route(g, nodes)
        except RoutingError as exc:
            raise CorpusError(f"routes[{i}]: {exc}") from None
        if route.start != raw["start"] or route.dest != raw["dest"]:
            raise CorpusError(f"routes[{i}] does not run from its start to its dest")
        records.append(CorpusRecord(raw["start"], raw["dest"], route))
    return RouteCorpus(tuple(records))


def load_corpus(source: IO[bytes] | IO[str] | bytes | str, g: IndoorGraph) -> RouteCorpus:
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorpusError(f"corpus is not valid UTF-8: {exc}") from None
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"invalid JSON: {exc}") from None
    return corpus_from_dict(doc, g)


def dump_corpus(corpus: RouteCorpus) -> str:
    return json.dumps(corpus.to_dict(), indent=1) + "\n"


def _edge_lengths(g: IndoorGraph, route: Route) -> dict[frozenset, float]:
    return {frozenset(e): g.edges[frozenset(e)].length for e in route.edges()}


def similarity(g: IndoorGraph, r1: Route, r2: Route) -> float:
    """Length of the edges both routes use over the length of the shorter route.

    Edges match as unordered node pairs. Sums use ``math.fsum`` so the score does
    not depend on traversal order (exact symmetry, exact 1.0 for identical routes).
    """
    e1 = _edge_lengths(g, r1)
    e2 = _edge_lengths(g, r2)
    len1 = math.fsum(e1.values())
    len2 = math.fsum(e2.values())
    if len1 == 0.0 and len2 == 0.0:
        if tuple(r1.nodes) == tuple(r2.nodes):
            return 1.0
        raise SimilarityError("both routes have zero length but differ")
    shorter = min(len1, len2)
    if shorter == 0.0:
        return 0.0
    shared = math.fsum(length for key, length in e1.items() if key in e2)
    return min(shared / shorter, 1.0)


@dataclass(frozen=True)
class CorpusEvaluation:
    mean: float
    scores: tuple[float, ...]
    routes: tuple[Route | None, ...]
    unreachable: tuple[int, ...]


def evaluate_corpus(
    g: IndoorGraph, corpus: RouteCorpus, model: CostModel | None = None, *, faithful: bool = False
) -> CorpusEvaluation:
    """Plan every record under ``model`` and score it against the preferred route.

    Unreachable pairs score 0 and are listed in ``unreachable``.
    """
    if not len(corpus):
        raise CorpusError("corpus is empty")
    scores = []
    routes = []
    unreachable = []
    for i, rec in enumerate(corpus.records):
        route = plan_route(g, rec.start, rec.dest, model, faithful=faithful)
        routes.append(route)
        if route is None:
            unreachable.append(i)
            scores.append(0.0)
        else:
            scores.append(similarity(g, route, rec.preferred))
    return CorpusEvaluation(
        mean=math.fsum(scores) / len(scores),
        scores=tuple(scores),
        routes=tuple(routes),
        unreachable=tuple(unreachable),
    )


def mean_similarity(g: IndoorGraph, corpus: RouteCorpus, model: CostModel | None = None) -> float:
    return evaluate_corpus(g, corpus, model).mean


def changed_fraction(
    planned: Sequence[Route | None], baseline: Sequence[Route | None]
) -> float:
    if len(planned) != len(baseline) or not planned:
        raise CorpusError("route lists must be non-empty and aligned")
    changed = sum(
        1
        for a, b in zip(planned, baseline)
        if (a.nodes if a else None) != (b.nodes if b else None)
    )
    return changed / len(planned)


def impacted_fraction(g: IndoorGraph, corpus: RouteCorpus, model: CostModel | None = None) -> float:
    """Share of records whose planned route differs from the plain shortest path."""
    if not len(corpus):
        raise CorpusError("corpus is empty")
    model = model or CostModel()
    base = [plan_route(g, r.start, r.dest, model.zeroed()) for r in corpus.records]
    planned = [plan_route(g, r.start, r.dest, model) for r in corpus.records]
    return changed_fraction(planned, base)
