"""Multi-request path selection and capacity allocation.

The allocator is a greedy marginal-utility heuristic: each step commits a
single +1 width increment on the (request, path) pair with the largest
utility gain, drawn from k-shortest candidates on the residual-capacity
graph and capped by the fidelity hop bound. An exact MILP would be
NP-hard territory; the greedy trades optimality for anytime behavior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .analytics import (
    FidelityInfeasibleError,
    PathSpec,
    SwapPolicy,
    UNBOUNDED_HOPS,
    expected_throughput,
    max_hops,
    policy_distribution,
)
from .netmodel import NetworkGraph, edge_key
from .pathfind import Metric, k_shortest_paths


@dataclass(frozen=True)
class Request:
    """Demand for `rate_target` E2E pairs per slot at fidelity >= min_fidelity."""

    id: str
    source: str
    dest: str
    rate_target: float = 1.0
    min_fidelity: float = 0.5

    def __post_init__(self):
        if self.source == self.dest:
            raise ValueError(f"request {self.id!r}: source equals dest")
        if self.rate_target <= 0:
            raise ValueError(f"request {self.id!r}: rate_target must be > 0")
        if not 0.25 < self.min_fidelity <= 1:
            raise ValueError(
                f"request {self.id!r}: min_fidelity {self.min_fidelity} "
                "outside (0.25, 1]"
            )


UTILITY_KINDS = ("total_throughput", "saturating", "weighted_sum")


@dataclass(frozen=True)
class UtilitySpec:
    """Per-request utility; all kinds are non-decreasing in the rate."""

    kind: str = "total_throughput"
    weights: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if self.kind not in UTILITY_KINDS:
            raise ValueError(f"unknown utility kind {self.kind!r}")

    def weight(self, request_id: str) -> float:
        return dict(self.weights).get(request_id, 1.0)

    def value(self, req: Request, rate: float) -> float:
        if self.kind == "total_throughput":
            return rate
        if self.kind == "saturating":
            return min(rate, req.rate_target)
        return self.weight(req.id) * rate


@dataclass(frozen=True)
class PathAllocation:
    request_id: str
    path: PathSpec  # per_hop_capacity holds the allocated widths
    policy: SwapPolicy

    def throughput(self) -> float:
        return expected_throughput(policy_distribution(self.path, self.policy))


@dataclass(frozen=True)
class AllocationPlan:
    requests: tuple[Request, ...]
    allocations: tuple[PathAllocation, ...]
    residual: tuple[tuple[tuple[str, str], int], ...]
    infeasible: tuple[tuple[str, str], ...] = ()  # (request id, reason)
    utility_trace: tuple[float, ...] = ()

    def request(self, request_id: str) -> Request:
        for r in self.requests:
            if r.id == request_id:
                return r
        raise KeyError(f"unknown request {request_id!r}")

    def allocations_for(self, request_id: str) -> tuple[PathAllocation, ...]:
        self.request(request_id)
        return tuple(a for a in self.allocations if a.request_id == request_id)

    def residual_map(self) -> dict[tuple[str, str], int]:
        return dict(self.residual)


def request_throughput(plan: AllocationPlan, req: Request) -> float:
    """Expected E2E pairs per slot served to one request (sum over its paths)."""
    return math.fsum(a.throughput() for a in plan.allocations_for(req.id))


def total_utility(plan: AllocationPlan, spec: UtilitySpec) -> float:
    return math.fsum(
        spec.value(r, request_throughput(plan, r)) for r in plan.requests
    )


@dataclass(frozen=True)
class AllocatorConfig:
    k: int = 5
    utility: UtilitySpec = field(default_factory=UtilitySpec)
    policy: SwapPolicy = field(default_factory=SwapPolicy.doubling)
    elementary_fidelity: float = 1.0
    min_gain: float = 1e-12  # increments below this are noise, stop there

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.policy.kind == "adhoc":
            raise ValueError(
                "adhoc swapping has no closed-form throughput; plans need a "
                "static policy"
            )
        if not 0.25 < self.elementary_fidelity <= 1:
            raise ValueError("elementary_fidelity outside (0.25, 1]")


def _hop_bound(req: Request, f0: float) -> int:
    if f0 >= 1.0:
        return UNBOUNDED_HOPS
    return max_hops(f0, req.min_fidelity)


def _residual_subgraph(graph: NetworkGraph, residual: dict) -> NetworkGraph:
    from .netmodel import EdgeParams, build_graph

    edges = [
        EdgeParams(u=e.u, v=e.v, capacity=residual[edge_key(e.u, e.v)],
                   length_km=e.length_km, link_prob=e.link_prob)
        for e in graph.edges
        if residual[edge_key(e.u, e.v)] >= 1
    ]
    return build_graph(list(graph.nodes), edges, graph.phys)


def allocate(
    graph: NetworkGraph, requests: list[Request], config: AllocatorConfig
) -> AllocationPlan:
    """Greedy marginal-utility allocation over k-shortest candidate paths.

    Every committed increment keeps the per-edge width sums within the
    edge capacities and every chosen route within the request's fidelity
    hop bound; infeasible requests are reported, not fatal.
    """
    residual = {edge_key(e.u, e.v): e.capacity for e in graph.edges}
    infeasible: list[tuple[str, str]] = []
    live: list[tuple[Request, int]] = []
    for req in requests:
        if not (graph.has_node(req.source) and graph.has_node(req.dest)):
            infeasible.append((req.id, "unknown endpoint"))
            continue
        try:
            bound = _hop_bound(req, config.elementary_fidelity)
        except FidelityInfeasibleError as exc:
            infeasible.append((req.id, str(exc)))
            continue
        live.append((req, bound))

    # widths[(request id, nodes)] -> allocated width
    widths: dict[tuple[str, tuple[str, ...]], int] = {}
    rates: dict[str, float] = {req.id: 0.0 for req, _ in live}
    ext_cache: dict[tuple[tuple[str, ...], int], float] = {}

    def ext_at(nodes: tuple[str, ...], width: int) -> float:
        key = (nodes, width)
        if key not in ext_cache:
            from .pathfind import path_spec_from_nodes

            spec = path_spec_from_nodes(graph, nodes, width=width)
            ext_cache[key] = expected_throughput(
                policy_distribution(spec, config.policy)
            )
        return ext_cache[key]

    def candidate_routes(req: Request, bound: int) -> list[tuple[str, ...]]:
        sub = _residual_subgraph(graph, residual)
        if not (sub.has_node(req.source) and sub.has_node(req.dest)):
            return []
        routes: list[tuple[str, ...]] = []
        for metric in (Metric.INVERSE_CREATION_RATE, Metric.HOP_COUNT):
            for cand in k_shortest_paths(sub, req.source, req.dest, config.k, metric):
                if cand.hop_count <= bound and cand.nodes not in routes:
                    routes.append(cand.nodes)
        return routes

    # gains computed at different accumulated rates pick up last-ulp noise,
    # so "equal" needs a window for the deterministic tie-break to apply
    def beats(cand, best):
        if best is None:
            return True
        tie = 1e-12 * max(1.0, abs(best[0]))
        if cand[0] > best[0] + tie:
            return True
        return cand[0] >= best[0] - tie and cand[1:] < best[1:]

    trace = [0.0]
    while True:
        best = None  # (gain, request id, nodes, new width)
        for req, bound in live:
            seen: set[tuple[str, ...]] = set()
            existing = [
                nodes for (rid, nodes) in widths if rid == req.id
            ]
            for nodes in existing + candidate_routes(req, bound):
                if nodes in seen:
                    continue
                seen.add(nodes)
                if any(
                    residual[edge_key(u, v)] < 1 for u, v in zip(nodes, nodes[1:])
                ):
                    continue
                w = widths.get((req.id, nodes), 0)
                delta = ext_at(nodes, w + 1) - (ext_at(nodes, w) if w else 0.0)
                new_rate = rates[req.id] + delta
                gain = config.utility.value(req, new_rate) - config.utility.value(
                    req, rates[req.id]
                )
                cand = (gain, req.id, nodes, w + 1)
                if beats(cand, best):
                    best = cand
        if best is None or best[0] <= config.min_gain:
            break
        gain, rid, nodes, w = best
        widths[(rid, nodes)] = w
        for u, v in zip(nodes, nodes[1:]):
            residual[edge_key(u, v)] -= 1
        req = next(r for r, _ in live if r.id == rid)
        delta = ext_at(nodes, w) - (ext_at(nodes, w - 1) if w > 1 else 0.0)
        rates[rid] += delta
        trace.append(trace[-1] + gain)

    from .pathfind import path_spec_from_nodes

    allocations = tuple(
        PathAllocation(
            request_id=rid,
            path=path_spec_from_nodes(graph, nodes, width=w),
            policy=config.policy,
        )
        for (rid, nodes), w in sorted(widths.items())
    )
    return AllocationPlan(
        requests=tuple(requests),
        allocations=allocations,
        residual=tuple(sorted(residual.items())),
        infeasible=tuple(infeasible),
        utility_trace=tuple(trace),
    )
