"""Minimum weighted-cost routing under a :class:`CostModel`.

Costs may depend on the node a step arrived from (turns, streets, linearity), so
the search labels ``(node, arrived_from)`` states instead of bare nodes whenever
the model needs it. Ties are broken by metric length, then by the node-id
sequence, so every entry point returns the same route for the same inputs.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Sequence

from .criteria import CostModel, CriterionKind, StepCoster
from .graph import IndoorGraph, NodeId

# quantum for comparing accumulated costs; sums of the same steps in different
# order must not flip a tie
COST_DECIMALS = 9


def _q(value: float) -> float:
    return round(value, COST_DECIMALS)


class RoutingError(ValueError):
    pass


@dataclass(frozen=True)
class Route:
    nodes: tuple[NodeId, ...]
    metric_length: float
    weighted_cost: float

    @property
    def start(self) -> NodeId:
        return self.nodes[0]

    @property
    def dest(self) -> NodeId:
        return self.nodes[-1]

    def edges(self) -> list[tuple[NodeId, NodeId]]:
        return list(zip(self.nodes, self.nodes[1:]))

    def __len__(self) -> int:
        return len(self.nodes)


def make_route(g: IndoorGraph, nodes: Sequence[NodeId], model: CostModel | None = None) -> Route:
    """Build a route from a node sequence, recomputing both lengths from the graph."""
    nodes = tuple(nodes)
    if not nodes:
        raise RoutingError("route has no nodes")
    for n in nodes:
        if n not in g.nodes:
            raise RoutingError(f"route references unknown node {n!r}")
    if len(set(nodes)) != len(nodes):
        raise RoutingError("route repeats a node")
    coster = StepCoster(g, model or CostModel(), nodes[-1])
    length = cost = 0.0
    prev = None
    for x, y in zip(nodes, nodes[1:]):
        if not g.has_edge(x, y):
            raise RoutingError(f"route step {x!r}->{y!r} is not an edge")
        length += g.edges[frozenset((x, y))].length
        cost += coster(prev, x, y)
        prev = x
    return Route(nodes, length, cost)


def route_breakdown(
    g: IndoorGraph,
    route: Route,
    model: CostModel,
    kinds: Iterable[CriterionKind] | None = None,
) -> dict[CriterionKind, tuple[int, float]]:
    """Per-criterion (occurrence count, penalty meters) along ``route``.

    Counts are reported even for zero-weight criteria; branching factor counts
    the summed degrees it multiplies the weight by.
    """
    kinds = tuple(model.kinds if kinds is None else kinds)
    coster = StepCoster(g, model, route.dest)
    totals = {k: 0 for k in kinds}
    prev = None
    for x, y in route.edges():
        for k, n in coster.counts(prev, x, y, kinds).items():
            totals[k] += n
        prev = x
    return {k: (n, model.weight(k) * n) for k, n in totals.items()}


def _check_endpoints(g: IndoorGraph, start: NodeId, dest: NodeId) -> None:
    for label, node in (("start", start), ("destination", dest)):
        if node not in g.nodes:
            raise RoutingError(f"unknown {label} node {node!r}")


def _rank_view(g: IndoorGraph):
    """Rank-indexed ids and ``(neighbour rank, edge length)`` lists, built once per graph."""
    try:
        return g._memo["rank_view"]
    except KeyError:
        pass
    ids = list(g.nodes)
    nbrs = [
        tuple((g.rank[y], g.edges[frozenset((x, y))].length) for y in g.adjacency[x])
        for x in ids
    ]
    view = g._memo["rank_view"] = (ids, nbrs)
    return view


_COST_CACHE_SIZE = 64


class _StepTable:
    """Memoised step costs keyed by ``(prev rank or -1, x rank, y rank)``.

    Shared between queries on the same graph and model; destination-dependent
    models get one table per destination.
    """

    def __init__(self, g: IndoorGraph, model: CostModel, dest: NodeId):
        self.ids, self.nbrs = _rank_view(g)
        self.coster = StepCoster(g, model, dest)
        self.memo: dict = {}

    def cost(self, p: int, x: int, y: int) -> float:
        key = (p, x, y)
        try:
            return self.memo[key]
        except KeyError:
            ids = self.ids
            val = self.memo[key] = self.coster(ids[p] if p >= 0 else None, ids[x], ids[y])
            return val


def _step_table(g: IndoorGraph, model: CostModel, dest: NodeId) -> _StepTable:
    cache = g._memo.setdefault("step_tables", {})
    key = (model, dest if model.needs_destination else None)
    table = cache.pop(key, None)
    if table is None:
        table = _StepTable(g, model, dest)
    cache[key] = table  # re-insert as most recent
    while len(cache) > _COST_CACHE_SIZE:
        del cache[next(iter(cache))]
    return table


def plan_route(
    g: IndoorGraph,
    start: NodeId,
    dest: NodeId,
    model: CostModel | None = None,
    *,
    faithful: bool = False,
) -> Route | None:
    """Cheapest simple route from ``start`` to ``dest``, or None if unreachable.

    ``faithful=True`` runs textbook node-label Dijkstra and reads the turn from
    the label's parent. That mirrors a straightforward implementation but can
    miss the optimum when turn-dependent criteria are active.
    """
    model = model or CostModel()
    _check_endpoints(g, start, dest)
    if start == dest:
        return Route((start,), 0.0, 0.0)
    table = _step_table(g, model, dest)
    s, t = g.rank[start], g.rank[dest]
    by_state = model.needs_predecessor and not faithful
    found = _label_search(table, s, t, by_state)
    if found is None:
        return None
    rpath, length, cost = found
    if len(set(rpath)) != len(rpath):
        # cheapest walk loops back on itself; search simple paths explicitly
        found = _best_simple_path(table, s, t)
        if found is None:
            return None
        rpath, length, cost = found
    return Route(tuple(table.ids[r] for r in rpath), length, cost)


def _label_search(table: _StepTable, s: int, t: int, by_state: bool):
    nbrs = table.nbrs
    memo = table.memo
    step = table.cost
    heap = [(0.0, 0.0, (s,), 0.0, 0.0)]
    settled = set()
    while heap:
        _, _, rpath, cost, length = heapq.heappop(heap)
        x = rpath[-1]
        p = rpath[-2] if len(rpath) > 1 else -1
        state = (x, p) if by_state else x
        if state in settled:
            continue
        settled.add(state)
        if x == t:
            return rpath, length, cost
        for y, ln in nbrs[x]:
            if y == p or y == s:
                continue
            if (y, x) in settled if by_state else y in settled:
                continue
            c = memo.get((p, x, y))
            if c is None:
                c = step(p, x, y)
            c += cost
            ln += length
            heapq.heappush(heap, (_q(c), _q(ln), rpath + (y,), c, ln))
    return None


def _cost_to_go(table: _StepTable, t: int) -> dict:
    """Exact (cost, length) from each arrival state ``(u, v)`` to rank ``t``, ignoring simplicity."""
    nbrs = table.nbrs
    step = table.cost
    best: dict = {}
    heap = [(0.0, 0.0, u, t) for u, _ in nbrs[t]]
    heapq.heapify(heap)
    while heap:
        c, ln, v, y = heapq.heappop(heap)
        if (v, y) in best:
            continue
        best[(v, y)] = (c, ln)
        if v == t:
            continue
        step_len = next(length for z, length in nbrs[v] if z == y)
        for u, _ in nbrs[v]:
            if u == y or (u, v) in best:
                continue
            heapq.heappush(heap, (c + step(u, v, y), ln + step_len, u, v))
    return best


def _best_simple_path(table: _StepTable, s: int, t: int):
    """Best-first search over simple paths guided by the exact unconstrained cost-to-go."""
    h = _cost_to_go(table, t)
    nbrs = table.nbrs
    step = table.cost
    heap = [(0.0, 0.0, (s,), 0.0, 0.0)]
    while heap:
        _, _, rpath, cost, length = heapq.heappop(heap)
        x = rpath[-1]
        if x == t:
            return rpath, length, cost
        p = rpath[-2] if len(rpath) > 1 else -1
        on_path = set(rpath)
        for y, ln in nbrs[x]:
            if y in on_path:
                continue
            rest = h.get((x, y))
            if rest is None:
                continue
            c = cost + step(p, x, y)
            ln += length
            heapq.heappush(heap, (_q(c + rest[0]), _q(ln + rest[1]), rpath + (y,), c, ln))
    return None


def brute_force_route(
    g: IndoorGraph,
    start: NodeId,
    dest: NodeId,
    model: CostModel | None = None,
    *,
    max_nodes: int = 15,
) -> Route | None:
    """Reference answer by exhaustive depth-first enumeration of simple paths.

    Branches are cut only once their partial cost already exceeds the best
    complete route, which cannot change the result because steps never cost less
    than zero.
    """
    if len(g) > max_nodes:
        raise RoutingError(f"brute force limited to {max_nodes} nodes, graph has {len(g)}")
    model = model or CostModel()
    _check_endpoints(g, start, dest)
    if start == dest:
        return Route((start,), 0.0, 0.0)
    coster = StepCoster(g, model, dest)
    rank = g.rank
    best = [None]  # (key, path, length, cost)

    def visit(path, on_path, cost, length):
        x = path[-1]
        if x == dest:
            key = (_q(cost), _q(length), tuple(rank[n] for n in path))
            if best[0] is None or key < best[0][0]:
                best[0] = (key, tuple(path), length, cost)
            return
        prev = path[-2] if len(path) > 1 else None
        for y in g.adjacency[x]:
            if y in on_path:
                continue
            c = cost + coster(prev, x, y)
            if best[0] is not None and _q(c) > best[0][0][0]:
                continue
            path.append(y)
            on_path.add(y)
            visit(path, on_path, c, length + g.edges[frozenset((x, y))].length)
            on_path.discard(y)
            path.pop()

    visit([start], {start}, 0.0, 0.0)
    if best[0] is None:
        return None
    _, nodes, length, cost = best[0]
    return Route(nodes, length, cost)

