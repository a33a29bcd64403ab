"""Physical topology model: nodes, edges, and per-slot link success probabilities.

The graph is immutable after construction and safe to share between threads;
all downstream computations treat it as read-only.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from types import MappingProxyType

# Swap success bound for linear-optics Bell measurements; ancilla-assisted
# schemes reach ~0.579.
LINEAR_OPTICS_SWAP_BOUND = 0.5
ADVANCED_SWAP_BOUND = 0.579

SWAP_BOUND_MODES = ("off", "linear-optics", "advanced")

# One-way classical signalling speed in fiber, km/s.
CLASSICAL_SIGNAL_KM_PER_S = 2e5


class GraphValidationError(ValueError):
    """Raised when node/edge specs violate the model's invariants."""


@dataclass(frozen=True)
class NodeParams:
    id: str
    swap_prob: float = 0.5
    memory_cutoff_slots: int = 1


@dataclass(frozen=True)
class EdgeParams:
    u: str
    v: str
    capacity: int = 1
    length_km: float = 0.0
    link_prob: float | None = None


@dataclass(frozen=True)
class PhysicalConstants:
    """Network-wide physical parameters.

    attenuation_alpha is the fiber loss exponent per km (0.046/km is the
    usual 0.2 dB/km telecom figure); base_efficiency collects source and
    detector efficiencies into one factor; attempts_per_slot is the number
    of generation attempts one channel gets within a slot's external phase.
    """

    attenuation_alpha: float = 0.046
    attempts_per_slot: int = 1
    base_efficiency: float = 1.0

    def __post_init__(self):
        if self.attenuation_alpha < 0:
            raise GraphValidationError("attenuation_alpha must be >= 0")
        if self.attempts_per_slot < 1:
            raise GraphValidationError("attempts_per_slot must be >= 1")
        if not 0 < self.base_efficiency <= 1:
            raise GraphValidationError("base_efficiency must be in (0, 1]")


def link_success_probability(
    length_km: float, alpha: float, eta: float, attempts: int
) -> float:
    """Per-slot probability that a channel yields at least one entangled pair.

    A single attempt succeeds with eta * exp(-alpha * L); the `attempts`
    tries within one slot are treated as independent Bernoulli trials on
    the same channel.
    """
    if length_km < 0:
        raise GraphValidationError("length_km must be >= 0")
    if alpha < 0:
        raise GraphValidationError("alpha must be >= 0")
    if not 0 < eta <= 1:
        raise GraphValidationError("eta must be in (0, 1]")
    if attempts < 1:
        raise GraphValidationError("attempts must be >= 1")
    single = eta * math.exp(-alpha * length_km)
    return 1.0 - (1.0 - single) ** attempts


def edge_key(u: str, v: str) -> tuple[str, str]:
    """Canonical (sorted) key for an undirected edge."""
    return (u, v) if u <= v else (v, u)


def classical_delay_ms(length_km: float) -> float:
    """One-way classical signalling delay over a fiber span, in ms."""
    return length_km / CLASSICAL_SIGNAL_KM_PER_S * 1e3


@dataclass(frozen=True)
class NetworkGraph:
    """Validated, immutable undirected topology with physical parameters.

    Nodes are sorted by id and edges by canonical endpoint pair, so two
    graphs built from the same specs compare and hash identically.
    """

    nodes: tuple[NodeParams, ...]
    edges: tuple[EdgeParams, ...]
    phys: PhysicalConstants
    _node_by_id: dict = field(
        default_factory=dict, compare=False, repr=False, hash=False
    )
    _edge_by_key: dict = field(
        default_factory=dict, compare=False, repr=False, hash=False
    )
    _adjacency: dict = field(
        default_factory=dict, compare=False, repr=False, hash=False
    )

    def __post_init__(self):
        node_by_id = {n.id: n for n in self.nodes}
        edge_by_key = {}
        adjacency: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for e in self.edges:
            edge_by_key[edge_key(e.u, e.v)] = e
            adjacency[e.u].append(e.v)
            adjacency[e.v].append(e.u)
        for nbrs in adjacency.values():
            nbrs.sort()
        object.__setattr__(self, "_node_by_id", MappingProxyType(node_by_id))
        object.__setattr__(self, "_edge_by_key", MappingProxyType(edge_by_key))
        object.__setattr__(
            self,
            "_adjacency",
            MappingProxyType({k: tuple(v) for k, v in adjacency.items()}),
        )

    def node(self, node_id: str) -> NodeParams:
        try:
            return self._node_by_id[node_id]
        except KeyError:
            raise GraphValidationError(f"unknown node {node_id!r}") from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self._node_by_id

    def edge(self, u: str, v: str) -> EdgeParams:
        try:
            return self._edge_by_key[edge_key(u, v)]
        except KeyError:
            raise GraphValidationError(f"no edge between {u!r} and {v!r}") from None

    def has_edge(self, u: str, v: str) -> bool:
        return edge_key(u, v) in self._edge_by_key

    def neighbors(self, node_id: str) -> tuple[str, ...]:
        return self._adjacency[node_id]

    def node_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes)

    def edge_keys(self) -> tuple[tuple[str, str], ...]:
        return tuple(edge_key(e.u, e.v) for e in self.edges)

    def node_index(self, node_id: str) -> int:
        """Stable index of a node in sorted order (used for RNG keying)."""
        return self._node_rank()[node_id]

    def edge_index(self, u: str, v: str) -> int:
        return self._edge_rank()[edge_key(u, v)]

    def _node_rank(self):
        rank = getattr(self, "_node_rank_cache", None)
        if rank is None:
            rank = {n.id: i for i, n in enumerate(self.nodes)}
            object.__setattr__(self, "_node_rank_cache", rank)
        return rank

    def _edge_rank(self):
        rank = getattr(self, "_edge_rank_cache", None)
        if rank is None:
            rank = {edge_key(e.u, e.v): i for i, e in enumerate(self.edges)}
            object.__setattr__(self, "_edge_rank_cache", rank)
        return rank

    def connected_components(self) -> list[tuple[str, ...]]:
        """Components as sorted node-id tuples, largest-first by first id."""
        seen: set[str] = set()
        comps = []
        for start in self.node_ids():
            if start in seen:
                continue
            stack, comp = [start], []
            seen.add(start)
            while stack:
                cur = stack.pop()
                comp.append(cur)
                for nbr in self.neighbors(cur):
                    if nbr not in seen:
                        seen.add(nbr)
                        stack.append(nbr)
            comps.append(tuple(sorted(comp)))
        return comps

    def is_connected(self) -> bool:
        return len(self.connected_components()) <= 1


def _validate_node(node: NodeParams, swap_bound_mode: str) -> None:
    if not 0 <= node.swap_prob <= 1:
        raise GraphValidationError(
            f"node {node.id!r}: swap_prob {node.swap_prob} outside [0, 1]"
        )
    if node.memory_cutoff_slots < 1:
        raise GraphValidationError(
            f"node {node.id!r}: memory_cutoff_slots must be >= 1"
        )
    if swap_bound_mode == "linear-optics" and node.swap_prob > LINEAR_OPTICS_SWAP_BOUND:
        raise GraphValidationError(
            f"node {node.id!r}: swap_prob {node.swap_prob} exceeds the "
            f"linear-optics bound {LINEAR_OPTICS_SWAP_BOUND}"
        )
    if swap_bound_mode == "advanced" and node.swap_prob > ADVANCED_SWAP_BOUND:
        raise GraphValidationError(
            f"node {node.id!r}: swap_prob {node.swap_prob} exceeds the "
            f"ancilla-assisted bound {ADVANCED_SWAP_BOUND}"
        )
    if swap_bound_mode == "off" and node.swap_prob > ADVANCED_SWAP_BOUND:
        warnings.warn(
            f"node {node.id!r}: swap_prob {node.swap_prob} exceeds the best "
            f"demonstrated Bell-measurement success rate {ADVANCED_SWAP_BOUND}",
            stacklevel=3,
        )


def build_graph(
    node_specs: list[NodeParams],
    edge_specs: list[EdgeParams],
    phys: PhysicalConstants | None = None,
    swap_bound_mode: str = "off",
) -> NetworkGraph:
    """Validate specs and assemble an immutable topology.

    Edges without an explicit link_prob get one derived from their length
    via link_success_probability. Edge endpoint order is normalized, so
    specs listing (B, A) and (A, B) produce identical graphs.
    """
    phys = phys or PhysicalConstants()
    if swap_bound_mode not in SWAP_BOUND_MODES:
        raise GraphValidationError(
            f"swap_bound_mode must be one of {SWAP_BOUND_MODES}, got {swap_bound_mode!r}"
        )
    ids = [n.id for n in node_specs]
    dupes = {i for i in ids if ids.count(i) > 1}
    if dupes:
        raise GraphValidationError(f"duplicate node ids: {sorted(dupes)}")
    for node in node_specs:
        _validate_node(node, swap_bound_mode)

    known = set(ids)
    seen_edges: set[tuple[str, str]] = set()
    normalized = []
    for e in edge_specs:
        if e.u == e.v:
            raise GraphValidationError(f"self-loop on node {e.u!r}")
        for endpoint in (e.u, e.v):
            if endpoint not in known:
                raise GraphValidationError(
                    f"edge ({e.u!r}, {e.v!r}) references unknown node {endpoint!r}"
                )
        if e.capacity < 0:
            raise GraphValidationError(
                f"edge ({e.u!r}, {e.v!r}): capacity must be >= 0"
            )
        if e.length_km < 0:
            raise GraphValidationError(
                f"edge ({e.u!r}, {e.v!r}): length_km must be >= 0"
            )
        key = edge_key(e.u, e.v)
        if key in seen_edges:
            raise GraphValidationError(
                f"duplicate edge between {key[0]!r} and {key[1]!r}; model parallel "
                "channels via capacity, not repeated edges"
            )
        seen_edges.add(key)
        if e.link_prob is None:
            p = link_success_probability(
                e.length_km,
                phys.attenuation_alpha,
                phys.base_efficiency,
                phys.attempts_per_slot,
            )
        else:
            p = e.link_prob
            if not 0 <= p <= 1:
                raise GraphValidationError(
                    f"edge ({e.u!r}, {e.v!r}): link_prob {p} outside [0, 1]"
                )
        normalized.append(
            EdgeParams(u=key[0], v=key[1], capacity=e.capacity,
                       length_km=e.length_km, link_prob=p)
        )

    nodes = tuple(sorted(node_specs, key=lambda n: n.id))
    edges = tuple(sorted(normalized, key=lambda e: (e.u, e.v)))
    return NetworkGraph(nodes=nodes, edges=edges, phys=phys)


def grid_node_id(row: int, col: int) -> str:
    return f"{row},{col}"


def grid_topology(
    rows: int,
    cols: int,
    default_edge: EdgeParams | None = None,
    default_node: NodeParams | None = None,
    phys: PhysicalConstants | None = None,
    swap_bound_mode: str = "off",
) -> NetworkGraph:
    """rows x cols lattice with horizontal and vertical neighbor edges.

    Node ids are "row,col"; node and edge parameters are cloned from the
    templates (their id/endpoints fields are ignored).
    """
    if rows < 1 or cols < 1:
        raise GraphValidationError("rows and cols must be >= 1")
    node_tpl = default_node or NodeParams(id="")
    edge_tpl = default_edge or EdgeParams(u="", v="")
    nodes = [
        NodeParams(
            id=grid_node_id(r, c),
            swap_prob=node_tpl.swap_prob,
            memory_cutoff_slots=node_tpl.memory_cutoff_slots,
        )
        for r in range(rows)
        for c in range(cols)
    ]
    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((grid_node_id(r, c), grid_node_id(r, c + 1)))
            if r + 1 < rows:
                edges.append((grid_node_id(r, c), grid_node_id(r + 1, c)))
    edge_specs = [
        EdgeParams(
            u=u,
            v=v,
            capacity=edge_tpl.capacity,
            length_km=edge_tpl.length_km,
            link_prob=edge_tpl.link_prob,
        )
        for u, v in edges
    ]
    return build_graph(nodes, edge_specs, phys, swap_bound_mode)
