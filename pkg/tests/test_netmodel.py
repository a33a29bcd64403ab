import math

import pytest
from hypothesis import given, strategies as st

from qroute import (
    EdgeParams,
    NodeParams,
    PhysicalConstants,
    build_graph,
    grid_topology,
    link_success_probability,
)
from qroute.netmodel import GraphValidationError, classical_delay_ms


def test_minimal_graph():
    g = build_graph(
        [NodeParams(id="A"), NodeParams(id="B")],
        [EdgeParams(u="A", v="B", capacity=1, link_prob=0.5)],
    )
    assert len(g.nodes) == 2
    assert len(g.edges) == 1
    assert g.edge("A", "B").link_prob == 0.5
    assert g.edge("B", "A") is g.edge("A", "B")


def test_dangling_endpoint_rejected():
    with pytest.raises(GraphValidationError, match="unknown node 'X'"):
        build_graph([NodeParams(id="A")], [EdgeParams(u="A", v="X")])


def test_duplicate_node_id_rejected():
    with pytest.raises(GraphValidationError, match="duplicate node ids"):
        build_graph([NodeParams(id="A"), NodeParams(id="A")], [])


def test_self_loop_rejected():
    with pytest.raises(GraphValidationError, match="self-loop"):
        build_graph([NodeParams(id="A")], [EdgeParams(u="A", v="A")])


def test_parallel_edges_rejected():
    with pytest.raises(GraphValidationError, match="duplicate edge"):
        build_graph(
            [NodeParams(id="A"), NodeParams(id="B")],
            [EdgeParams(u="A", v="B"), EdgeParams(u="B", v="A")],
        )


@pytest.mark.parametrize(
    "edge,message",
    [
        (EdgeParams(u="A", v="B", capacity=-1), "capacity"),
        (EdgeParams(u="A", v="B", length_km=-2.0), "length_km"),
        (EdgeParams(u="A", v="B", link_prob=1.5), "link_prob"),
    ],
)
def test_edge_validation(edge, message):
    with pytest.raises(GraphValidationError, match=message):
        build_graph([NodeParams(id="A"), NodeParams(id="B")], [edge])


def test_node_validation():
    with pytest.raises(GraphValidationError, match="swap_prob"):
        build_graph([NodeParams(id="A", swap_prob=1.2)], [])
    with pytest.raises(GraphValidationError, match="memory_cutoff"):
        build_graph([NodeParams(id="A", memory_cutoff_slots=0)], [])


def test_swap_bound_modes():
    high = [NodeParams(id="A", swap_prob=0.55)]
    build_graph(high, [], swap_bound_mode="advanced")
    with pytest.raises(GraphValidationError, match="linear-optics"):
        build_graph(high, [], swap_bound_mode="linear-optics")
    with pytest.raises(GraphValidationError, match="ancilla"):
        build_graph([NodeParams(id="A", swap_prob=0.6)], [],
                    swap_bound_mode="advanced")
    with pytest.warns(UserWarning, match="0.579"):
        build_graph([NodeParams(id="A", swap_prob=0.6)], [])


def test_link_prob_derived_from_length():
    phys = PhysicalConstants(attenuation_alpha=0.046, attempts_per_slot=1,
                             base_efficiency=0.9)
    g = build_graph(
        [NodeParams(id="A"), NodeParams(id="B")],
        [EdgeParams(u="A", v="B", length_km=10.0)],
        phys,
    )
    expected = 0.9 * math.exp(-0.046 * 10.0)
    assert g.edge("A", "B").link_prob == pytest.approx(expected)


def test_link_success_probability_lossless():
    assert link_success_probability(0.0, 0.046, 1.0, 1) == 1.0


def test_link_success_probability_two_attempts():
    assert link_success_probability(0.0, 0.046, 0.5, 2) == pytest.approx(0.75)


def test_link_success_probability_lab_regime():
    # 20 km span at 0.2 dB/km with the efficiency dialed so one attempt
    # lands at the 1e-4 figure typical of heralded generation experiments
    eta = 1e-4 / math.exp(-0.046 * 20.0)
    p = link_success_probability(20.0, 0.046, eta, 1)
    assert p == pytest.approx(1e-4, rel=1e-9)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"length_km": -1.0, "alpha": 0.1, "eta": 1.0, "attempts": 1},
        {"length_km": 1.0, "alpha": -0.1, "eta": 1.0, "attempts": 1},
        {"length_km": 1.0, "alpha": 0.1, "eta": 0.0, "attempts": 1},
        {"length_km": 1.0, "alpha": 0.1, "eta": 1.1, "attempts": 1},
        {"length_km": 1.0, "alpha": 0.1, "eta": 1.0, "attempts": 0},
    ],
)
def test_link_success_probability_domain(kwargs):
    with pytest.raises(GraphValidationError):
        link_success_probability(**kwargs)


@given(
    length=st.floats(0.0, 200.0),
    delta=st.floats(0.0, 50.0),
    alpha=st.floats(0.0, 0.5),
    eta=st.floats(0.01, 1.0),
    attempts=st.integers(1, 20),
)
def test_link_probability_monotone(length, delta, alpha, eta, attempts):
    base = link_success_probability(length, alpha, eta, attempts)
    assert 0.0 <= base <= 1.0
    longer = link_success_probability(length + delta, alpha, eta, attempts)
    assert longer <= base + 1e-12
    more = link_success_probability(length, alpha, eta, attempts + 1)
    assert more >= base - 1e-12


def test_grid_1x2():
    g = grid_topology(1, 2)
    assert len(g.nodes) == 2
    assert len(g.edges) == 1


def test_grid_3x3():
    g = grid_topology(3, 3)
    assert len(g.nodes) == 9
    assert len(g.edges) == 12


def test_grid_template_propagation():
    g = grid_topology(2, 2, default_edge=EdgeParams(u="", v="", capacity=3))
    assert len(g.edges) == 4
    assert all(e.capacity == 3 for e in g.edges)


@given(rows=st.integers(1, 6), cols=st.integers(1, 6))
def test_grid_counts(rows, cols):
    g = grid_topology(rows, cols)
    assert len(g.nodes) == rows * cols
    assert len(g.edges) == rows * (cols - 1) + cols * (rows - 1)


def test_grid_round_trips_through_build_graph():
    g = grid_topology(3, 3, default_edge=EdgeParams(u="", v="", capacity=2,
                                                    link_prob=0.7))
    rebuilt = build_graph(list(g.nodes), list(g.edges), g.phys)
    assert rebuilt == g
    assert hash(rebuilt) == hash(g)


def test_build_graph_deterministic_hash():
    specs_nodes = [NodeParams(id="B"), NodeParams(id="A")]
    specs_edges = [EdgeParams(u="B", v="A", capacity=2, link_prob=0.3)]
    g1 = build_graph(specs_nodes, specs_edges)
    g2 = build_graph(list(reversed(specs_nodes)),
                     [EdgeParams(u="A", v="B", capacity=2, link_prob=0.3)])
    assert g1 == g2
    assert hash(g1) == hash(g2)


def test_connected_components_reported():
    g = build_graph(
        [NodeParams(id=i) for i in "ABCD"],
        [EdgeParams(u="A", v="B"), EdgeParams(u="C", v="D")],
    )
    assert not g.is_connected()
    assert g.connected_components() == [("A", "B"), ("C", "D")]


def test_classical_delay():
    assert classical_delay_ms(20.0) == pytest.approx(0.1)
