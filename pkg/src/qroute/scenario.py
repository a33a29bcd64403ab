"""Scenario files: one JSON document drives every CLI subcommand.

Schema (version 1), all sections except `graph` optional:

    {
      "version": 1,
      "physical": {"attenuation_alpha_per_km": 0.046, "attempts_per_slot": 1,
                   "base_efficiency": 1.0, "swap_bound_mode": "off"},
      "graph": {"nodes": [{"id", "swap_prob", "memory_cutoff_slots"}],
                "edges": [{"u", "v", "capacity", "length_km", "link_prob"}]}
               | {"grid": {"rows", "cols", "node": {...}, "edge": {...}}},
      "elementary_fidelity": 1.0,
      "requests": [{"id", "source", "dest", "rate_target", "min_fidelity"}],
      "analytics": {"paths": [["A","B"]], "policy": "doubling",
                    "order_search": false},
      "routing": {"k": 5, "utility": "total_throughput", "weights": {},
                  "policy": "doubling"},
      "sim": {"scheme": "proactive", "forwarding": "sync",
              "policy": "doubling", "slots": 1000, "seed": 0,
              "node_disjoint": false, "max_paths_per_request": 4,
              "paths": [{"request", "nodes", "width", "policy"}]},
      "output": {"format": "json"}
    }

`sim.paths`, when present, pins the proactive plan instead of running the
allocator. Grid nodes are named "row,col".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .analytics import POLICY_KINDS, SwapPolicy
from .montecarlo import SimConfig
from .netmodel import (
    EdgeParams,
    NetworkGraph,
    NodeParams,
    PhysicalConstants,
    build_graph,
    grid_topology,
)
from .routing import AllocatorConfig, Request, UtilitySpec

SCHEMA_VERSION = 1


class ScenarioError(ValueError):
    """Scenario file failed to parse or validate."""


def policy_from_name(name: str) -> SwapPolicy:
    if name not in POLICY_KINDS or name == "explicit":
        raise ScenarioError(f"unknown swapping policy {name!r}")
    return SwapPolicy(name)


@dataclass(frozen=True)
class AnalyticsTargets:
    paths: tuple[tuple[str, ...], ...] = ()
    policy: SwapPolicy = field(default_factory=SwapPolicy.doubling)
    order_search: bool = False


@dataclass(frozen=True)
class ExplicitPath:
    request_id: str
    nodes: tuple[str, ...]
    width: int = 1
    policy: SwapPolicy | None = None


@dataclass(frozen=True)
class Scenario:
    graph: NetworkGraph
    swap_bound_mode: str = "off"
    elementary_fidelity: float = 1.0
    requests: tuple[Request, ...] = ()
    analytics: AnalyticsTargets = field(default_factory=AnalyticsTargets)
    routing: AllocatorConfig = field(default_factory=AllocatorConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    explicit_paths: tuple[ExplicitPath, ...] = ()
    output_format: str = "json"
    version: int = SCHEMA_VERSION


def _expect(mapping: dict, context: str) -> dict:
    if not isinstance(mapping, dict):
        raise ScenarioError(f"{context} must be an object")
    return mapping


def _parse_graph(data: dict, phys: PhysicalConstants, swap_bound_mode: str) -> NetworkGraph:
    gd = _expect(data.get("graph", {}), "graph")
    if "grid" in gd:
        grid = _expect(gd["grid"], "graph.grid")
        node_tpl = grid.get("node", {})
        edge_tpl = grid.get("edge", {})
        return grid_topology(
            rows=int(grid.get("rows", 1)),
            cols=int(grid.get("cols", 1)),
            default_node=NodeParams(
                id="",
                swap_prob=float(node_tpl.get("swap_prob", 0.5)),
                memory_cutoff_slots=int(node_tpl.get("memory_cutoff_slots", 1)),
            ),
            default_edge=EdgeParams(
                u="", v="",
                capacity=int(edge_tpl.get("capacity", 1)),
                length_km=float(edge_tpl.get("length_km", 0.0)),
                link_prob=edge_tpl.get("link_prob"),
            ),
            phys=phys,
            swap_bound_mode=swap_bound_mode,
        )
    nodes = []
    for i, nd in enumerate(gd.get("nodes", [])):
        nd = _expect(nd, f"graph.nodes[{i}]")
        if "id" not in nd:
            raise ScenarioError(f"graph.nodes[{i}]: missing id")
        nodes.append(
            NodeParams(
                id=str(nd["id"]),
                swap_prob=float(nd.get("swap_prob", 0.5)),
                memory_cutoff_slots=int(nd.get("memory_cutoff_slots", 1)),
            )
        )
    edges = []
    for i, ed in enumerate(gd.get("edges", [])):
        ed = _expect(ed, f"graph.edges[{i}]")
        for k in ("u", "v"):
            if k not in ed:
                raise ScenarioError(f"graph.edges[{i}]: missing {k!r}")
        lp = ed.get("link_prob")
        edges.append(
            EdgeParams(
                u=str(ed["u"]), v=str(ed["v"]),
                capacity=int(ed.get("capacity", 1)),
                length_km=float(ed.get("length_km", 0.0)),
                link_prob=None if lp is None else float(lp),
            )
        )
    return build_graph(nodes, edges, phys, swap_bound_mode)


def scenario_from_dict(data: dict) -> Scenario:
    data = _expect(data, "scenario")
    version = data.get("version")
    if version is None:
        raise ScenarioError("scenario is missing the version field")
    if version != SCHEMA_VERSION:
        raise ScenarioError(
            f"unsupported scenario version {version}; this build reads "
            f"version {SCHEMA_VERSION}"
        )

    pd = _expect(data.get("physical", {}), "physical")
    phys = PhysicalConstants(
        attenuation_alpha=float(pd.get("attenuation_alpha_per_km", 0.046)),
        attempts_per_slot=int(pd.get("attempts_per_slot", 1)),
        base_efficiency=float(pd.get("base_efficiency", 1.0)),
    )
    swap_bound_mode = str(pd.get("swap_bound_mode", "off"))
    graph = _parse_graph(data, phys, swap_bound_mode)

    f0 = float(data.get("elementary_fidelity", 1.0))
    if not 0.25 < f0 <= 1:
        raise ScenarioError(f"elementary_fidelity {f0} outside (0.25, 1]")

    requests = []
    for i, rd in enumerate(data.get("requests", [])):
        rd = _expect(rd, f"requests[{i}]")
        rid = str(rd.get("id", f"r{i}"))
        try:
            req = Request(
                id=rid,
                source=str(rd["source"]),
                dest=str(rd["dest"]),
                rate_target=float(rd.get("rate_target", 1.0)),
                min_fidelity=float(rd.get("min_fidelity", 0.5)),
            )
        except KeyError as exc:
            raise ScenarioError(f"request {rid!r}: missing field {exc}") from None
        except ValueError as exc:
            raise ScenarioError(str(exc)) from None
        for endpoint in (req.source, req.dest):
            if not graph.has_node(endpoint):
                raise ScenarioError(
                    f"request {rid!r}: unknown node {endpoint!r}"
                )
        requests.append(req)
    if len({r.id for r in requests}) != len(requests):
        raise ScenarioError("request ids must be unique")

    ad = _expect(data.get("analytics", {}), "analytics")
    target_paths = []
    for i, nodes in enumerate(ad.get("paths", [])):
        nodes = tuple(str(n) for n in nodes)
        if len(nodes) < 2:
            raise ScenarioError(f"analytics.paths[{i}]: needs at least 2 nodes")
        for n in nodes:
            if not graph.has_node(n):
                raise ScenarioError(f"analytics.paths[{i}]: unknown node {n!r}")
        for u, v in zip(nodes, nodes[1:]):
            if not graph.has_edge(u, v):
                raise ScenarioError(
                    f"analytics.paths[{i}]: no edge between {u!r} and {v!r}"
                )
        target_paths.append(nodes)
    analytics_policy = policy_from_name(str(ad.get("policy", "doubling")))
    if analytics_policy.kind == "adhoc":
        raise ScenarioError(
            "analytics.policy cannot be adhoc (no closed-form distribution)"
        )
    analytics = AnalyticsTargets(
        paths=tuple(target_paths),
        policy=analytics_policy,
        order_search=bool(ad.get("order_search", False)),
    )

    rt = _expect(data.get("routing", {}), "routing")
    try:
        routing = AllocatorConfig(
            k=int(rt.get("k", 5)),
            utility=UtilitySpec(
                kind=str(rt.get("utility", "total_throughput")),
                weights=tuple(
                    sorted((str(k), float(v)) for k, v in rt.get("weights", {}).items())
                ),
            ),
            policy=policy_from_name(str(rt.get("policy", "doubling"))),
            elementary_fidelity=f0,
        )
    except ValueError as exc:
        raise ScenarioError(f"routing: {exc}") from None

    sd = _expect(data.get("sim", {}), "sim")
    try:
        sim = SimConfig(
            scheme=str(sd.get("scheme", "proactive")),
            forwarding=str(sd.get("forwarding", "sync")),
            policy=policy_from_name(str(sd.get("policy", "doubling"))),
            slots=int(sd.get("slots", 1000)),
            seed=int(sd.get("seed", 0)),
            node_disjoint=bool(sd.get("node_disjoint", False)),
            max_paths_per_request=int(sd.get("max_paths_per_request", 4)),
        )
    except ValueError as exc:
        raise ScenarioError(f"sim: {exc}") from None

    explicit = []
    for i, pdata in enumerate(sd.get("paths", [])):
        pdata = _expect(pdata, f"sim.paths[{i}]")
        nodes = tuple(str(n) for n in pdata.get("nodes", ()))
        if len(nodes) < 2:
            raise ScenarioError(f"sim.paths[{i}]: needs at least 2 nodes")
        for u, v in zip(nodes, nodes[1:]):
            if not graph.has_edge(u, v):
                raise ScenarioError(
                    f"sim.paths[{i}]: no edge between {u!r} and {v!r}"
                )
        rid = str(pdata.get("request", f"r{i}"))
        pol = pdata.get("policy")
        explicit.append(
            ExplicitPath(
                request_id=rid,
                nodes=nodes,
                width=int(pdata.get("width", 1)),
                policy=None if pol is None else policy_from_name(str(pol)),
            )
        )

    od = _expect(data.get("output", {}), "output")
    fmt = str(od.get("format", "json"))
    if fmt not in ("json", "csv"):
        raise ScenarioError(f"output.format must be json or csv, got {fmt!r}")

    return Scenario(
        graph=graph,
        swap_bound_mode=swap_bound_mode,
        elementary_fidelity=f0,
        requests=tuple(requests),
        analytics=analytics,
        routing=routing,
        sim=sim,
        explicit_paths=tuple(explicit),
        output_format=fmt,
        version=int(version),
    )


def parse_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"scenario file {path} does not exist")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}"
        ) from None
    try:
        return scenario_from_dict(data)
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from None


def scenario_to_dict(s: Scenario) -> dict:
    """Emit a dict that parses back into a semantically equal Scenario."""
    d: dict = {
        "version": s.version,
        "physical": {
            "attenuation_alpha_per_km": s.graph.phys.attenuation_alpha,
            "attempts_per_slot": s.graph.phys.attempts_per_slot,
            "base_efficiency": s.graph.phys.base_efficiency,
            "swap_bound_mode": s.swap_bound_mode,
        },
        "graph": {
            "nodes": [
                {
                    "id": n.id,
                    "swap_prob": n.swap_prob,
                    "memory_cutoff_slots": n.memory_cutoff_slots,
                }
                for n in s.graph.nodes
            ],
            "edges": [
                {
                    "u": e.u,
                    "v": e.v,
                    "capacity": e.capacity,
                    "length_km": e.length_km,
                    "link_prob": e.link_prob,
                }
                for e in s.graph.edges
            ],
        },
        "elementary_fidelity": s.elementary_fidelity,
        "requests": [
            {
                "id": r.id,
                "source": r.source,
                "dest": r.dest,
                "rate_target": r.rate_target,
                "min_fidelity": r.min_fidelity,
            }
            for r in s.requests
        ],
        "analytics": {
            "paths": [list(p) for p in s.analytics.paths],
            "policy": s.analytics.policy.kind,
            "order_search": s.analytics.order_search,
        },
        "routing": {
            "k": s.routing.k,
            "utility": s.routing.utility.kind,
            "weights": dict(s.routing.utility.weights),
            "policy": s.routing.policy.kind,
        },
        "sim": {
            "scheme": s.sim.scheme,
            "forwarding": s.sim.forwarding,
            "policy": s.sim.policy.kind,
            "slots": s.sim.slots,
            "seed": s.sim.seed,
            "node_disjoint": s.sim.node_disjoint,
            "max_paths_per_request": s.sim.max_paths_per_request,
        },
        "output": {"format": s.output_format},
    }
    if s.explicit_paths:
        d["sim"]["paths"] = [
            {
                "request": p.request_id,
                "nodes": list(p.nodes),
                "width": p.width,
                **({"policy": p.policy.kind} if p.policy else {}),
            }
            for p in s.explicit_paths
        ]
    return d


def apply_overrides(s: Scenario, overrides: dict) -> Scenario:
    """Apply CLI flag overrides; keys follow the flag names."""
    sim = s.sim
    sim_kwargs = {}
    if "seed" in overrides:
        sim_kwargs["seed"] = int(overrides["seed"])
    if "slots" in overrides:
        sim_kwargs["slots"] = int(overrides["slots"])
    if "mode" in overrides:
        sim_kwargs["forwarding"] = str(overrides["mode"])
    if "scheme" in overrides:
        sim_kwargs["scheme"] = str(overrides["scheme"])
    if "policy" in overrides:
        sim_kwargs["policy"] = policy_from_name(str(overrides["policy"]))
    if sim_kwargs:
        try:
            sim = replace(sim, **sim_kwargs)
        except ValueError as exc:
            raise ScenarioError(f"sim overrides: {exc}") from None
    out = s
    if sim is not s.sim:
        out = replace(out, sim=sim)
    if "policy" in overrides:
        pol = policy_from_name(str(overrides["policy"]))
        if pol.kind != "adhoc":  # adhoc is simulation-only
            out = replace(
                out,
                analytics=replace(out.analytics, policy=pol),
                routing=replace(out.routing, policy=pol),
            )
    if "format" in overrides:
        fmt = str(overrides["format"])
        if fmt not in ("json", "csv"):
            raise ScenarioError(f"format must be json or csv, got {fmt!r}")
        out = replace(out, output_format=fmt)
    return out
