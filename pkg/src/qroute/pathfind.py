"""Path computation on the physical or per-slot logical topology.

All searches are deterministic: cost ties are broken by the
lexicographically smallest node-id sequence so repeated runs pick the
same routes.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum

from .analytics import PathSpec, expected_throughput, heralded_path_distribution, sequential_tree
from .netmodel import GraphValidationError, NetworkGraph, edge_key


class Metric(Enum):
    HOP_COUNT = "hop_count"
    SUM_NODE_DISTANCES = "sum_node_distances"
    INVERSE_CREATION_RATE = "inverse_creation_rate"
    BOTTLENECK_WIDTH = "bottleneck_width"
    EXPECTED_THROUGHPUT_SEQUENTIAL = "expected_throughput_sequential"

    @property
    def additive(self) -> bool:
        """True when per-hop costs compose monotonically (Dijkstra-safe)."""
        return self in _ADDITIVE


_ADDITIVE = {
    Metric.HOP_COUNT,
    Metric.SUM_NODE_DISTANCES,
    Metric.INVERSE_CREATION_RATE,
}


def _initial_cost(metric: Metric) -> float:
    return 1.0 if metric is Metric.INVERSE_CREATION_RATE else 0.0


def _extend_cost(metric: Metric, cost: float, graph: NetworkGraph, u: str, v: str) -> float:
    e = graph.edge(u, v)
    if metric is Metric.HOP_COUNT:
        return cost + 1.0
    if metric is Metric.SUM_NODE_DISTANCES:
        return cost + e.length_km
    if metric is Metric.INVERSE_CREATION_RATE:
        return cost * (1.0 / e.link_prob) if e.link_prob > 0 else math.inf
    raise ValueError(f"metric {metric} is not additive")


def path_spec_from_nodes(
    graph: NetworkGraph, nodes: tuple[str, ...], width: int | None = None
) -> PathSpec:
    """Build a PathSpec along `nodes`, using edge capacities unless a
    uniform allocated width is given."""
    caps = []
    probs = []
    for u, v in zip(nodes, nodes[1:]):
        e = graph.edge(u, v)
        caps.append(e.capacity if width is None else width)
        probs.append(e.link_prob)
    swaps = tuple(graph.node(n).swap_prob for n in nodes[1:-1])
    return PathSpec(
        nodes=tuple(nodes),
        per_hop_capacity=tuple(caps),
        per_hop_prob=tuple(probs),
        interior_swap_probs=swaps,
    )


def path_cost(graph: NetworkGraph, path: PathSpec, metric: Metric) -> float:
    """Whole-path score under a metric (lower is better for every metric)."""
    if metric is Metric.HOP_COUNT:
        return float(path.hop_count)
    if metric is Metric.SUM_NODE_DISTANCES:
        return math.fsum(
            graph.edge(u, v).length_km for u, v in zip(path.nodes, path.nodes[1:])
        )
    if metric is Metric.INVERSE_CREATION_RATE:
        cost = 1.0
        for p in path.per_hop_prob:
            if p <= 0:
                return math.inf
            cost *= 1.0 / p
        return cost
    if metric is Metric.BOTTLENECK_WIDTH:
        return -float(min(path.per_hop_capacity))
    if metric is Metric.EXPECTED_THROUGHPUT_SEQUENTIAL:
        dist = heralded_path_distribution(path, sequential_tree(path.hop_count))
        return -expected_throughput(dist)
    raise ValueError(f"unknown metric {metric}")


def _check_endpoints(graph: NetworkGraph, s: str, d: str) -> None:
    graph.node(s)
    graph.node(d)
    if s == d:
        raise GraphValidationError("source and destination must differ")


def _dijkstra(
    graph: NetworkGraph,
    s: str,
    d: str,
    metric: Metric,
    edge_usable=None,
    banned_nodes: frozenset[str] = frozenset(),
) -> tuple[float, tuple[str, ...]] | None:
    """Label-setting search; heap entries carry the node sequence so equal
    costs resolve to the lexicographically smallest path."""
    if s in banned_nodes or d in banned_nodes:
        return None
    heap = [(_initial_cost(metric), (s,))]
    done: set[str] = set()
    while heap:
        cost, nodes = heapq.heappop(heap)
        cur = nodes[-1]
        if cur in done:
            continue
        done.add(cur)
        if cur == d:
            return cost, nodes
        for nbr in graph.neighbors(cur):
            if nbr in done or nbr in banned_nodes:
                continue
            e = graph.edge(cur, nbr)
            if e.capacity < 1:
                continue
            if edge_usable is not None and not edge_usable(cur, nbr):
                continue
            nxt = _extend_cost(metric, cost, graph, cur, nbr)
            if math.isinf(nxt):
                continue
            heapq.heappush(heap, (nxt, nodes + (nbr,)))
    return None


def shortest_path(
    graph: NetworkGraph, s: str, d: str, metric: Metric
) -> PathSpec | None:
    """Minimum-cost loop-free path under an additive metric, or None."""
    if not metric.additive:
        raise ValueError(f"metric {metric} is not additive; Dijkstra needs subpath optimality")
    _check_endpoints(graph, s, d)
    found = _dijkstra(graph, s, d, metric)
    if found is None:
        return None
    return path_spec_from_nodes(graph, found[1])


def _path_nodes_cost(graph: NetworkGraph, nodes: tuple[str, ...], metric: Metric) -> float:
    cost = _initial_cost(metric)
    for u, v in zip(nodes, nodes[1:]):
        cost = _extend_cost(metric, cost, graph, u, v)
    return cost


def k_shortest_paths(
    graph: NetworkGraph, s: str, d: str, k: int, metric: Metric
) -> list[PathSpec]:
    """Yen's algorithm: up to k loop-free paths in non-decreasing cost."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not metric.additive:
        raise ValueError(f"metric {metric} is not additive")
    _check_endpoints(graph, s, d)

    first = _dijkstra(graph, s, d, metric)
    if first is None:
        return []
    accepted: list[tuple[float, tuple[str, ...]]] = [first]
    candidates: list[tuple[float, tuple[str, ...]]] = []
    seen = {first[1]}

    while len(accepted) < k:
        _, prev = accepted[-1]
        for j in range(len(prev) - 1):
            spur = prev[j]
            root = prev[: j + 1]
            banned_pairs = {
                edge_key(p[j], p[j + 1])
                for _, p in accepted
                if len(p) > j + 1 and p[: j + 1] == root
            }
            banned_nodes = frozenset(root[:-1])
            usable = lambda u, v, _b=banned_pairs: edge_key(u, v) not in _b
            spur_found = _dijkstra(
                graph, spur, d, metric, edge_usable=usable, banned_nodes=banned_nodes
            )
            if spur_found is None:
                continue
            total = root[:-1] + spur_found[1]
            if total in seen:
                continue
            seen.add(total)
            heapq.heappush(
                candidates, (_path_nodes_cost(graph, total, metric), total)
            )
        if not candidates:
            break
        accepted.append(heapq.heappop(candidates))
    return [path_spec_from_nodes(graph, nodes) for _, nodes in accepted[:k]]


def widest_path(graph: NetworkGraph, s: str, d: str) -> PathSpec | None:
    """Path maximizing the bottleneck capacity.

    Ties on width are resolved by creation rate (smallest product of
    inverse link probabilities), then lexicographically.
    """
    _check_endpoints(graph, s, d)

    def reachable(min_cap: int) -> bool:
        stack, seen = [s], {s}
        while stack:
            cur = stack.pop()
            if cur == d:
                return True
            for nbr in graph.neighbors(cur):
                if nbr in seen:
                    continue
                if graph.edge(cur, nbr).capacity >= min_cap:
                    seen.add(nbr)
                    stack.append(nbr)
        return False

    caps = sorted({e.capacity for e in graph.edges if e.capacity >= 1}, reverse=True)
    best_width = next((c for c in caps if reachable(c)), None)
    if best_width is None:
        return None
    # Any path inside the >= best_width subgraph has exactly the best width.
    usable = lambda u, v: graph.edge(u, v).capacity >= best_width
    found = _dijkstra(graph, s, d, Metric.INVERSE_CREATION_RATE, edge_usable=usable)
    if found is None:  # creation-rate costs can all be infinite (p = 0 links)
        found = _dijkstra(graph, s, d, Metric.HOP_COUNT, edge_usable=usable)
    return path_spec_from_nodes(graph, found[1])


@dataclass
class LogicalTopology:
    """Realized entangled links per edge for the current slot."""

    counts: dict[tuple[str, str], int] = field(default_factory=dict)

    @classmethod
    def from_counts(cls, graph: NetworkGraph, counts: dict) -> "LogicalTopology":
        norm: dict[tuple[str, str], int] = {}
        for (u, v), c in counts.items():
            e = graph.edge(u, v)
            if not 0 <= c <= e.capacity:
                raise GraphValidationError(
                    f"logical count {c} outside 0..{e.capacity} on edge ({u!r}, {v!r})"
                )
            norm[edge_key(u, v)] = c
        return cls(counts=norm)

    def count(self, u: str, v: str) -> int:
        return self.counts.get(edge_key(u, v), 0)


def disjoint_paths_on_logical(
    logical: LogicalTopology,
    graph: NetworkGraph,
    s: str,
    d: str,
    max_paths: int,
    node_disjoint: bool = False,
) -> list[PathSpec]:
    """Greedy hop-count routing on the realized links.

    Repeatedly takes the shortest path through edges that still have an
    unconsumed link, then removes one link unit per used edge (and the
    interior nodes too, when node-disjoint paths are requested).
    """
    _check_endpoints(graph, s, d)
    remaining = dict(logical.counts)
    blocked: set[str] = set()
    paths: list[PathSpec] = []
    while len(paths) < max_paths:
        usable = lambda u, v: remaining.get(edge_key(u, v), 0) >= 1
        found = _dijkstra(
            graph, s, d, Metric.HOP_COUNT,
            edge_usable=usable, banned_nodes=frozenset(blocked),
        )
        if found is None:
            break
        nodes = found[1]
        for u, v in zip(nodes, nodes[1:]):
            remaining[edge_key(u, v)] -= 1
        if node_disjoint:
            blocked.update(nodes[1:-1])
        paths.append(path_spec_from_nodes(graph, nodes, width=1))
    return paths
