import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowgain.graph import (
    DisconnectedPort,
    GraphError,
    PortSet,
    SignedGraph,
    WeightedGraph,
    algebraic_connectivity,
    components,
    effective_resistance,
    incidence,
    laplacian,
    pseudo_inverse,
    signed_laplacian,
    spectrum,
)

from conftest import RING_PAIRS, RING_PORTS, random_connected_graph


def grounded_resistance(g, i, j):
    """Resistance by grounding node j and solving the reduced Laplacian (no pseudo-inverse)."""
    L = laplacian(g)
    keep = [x for x in range(g.n_nodes) if x != j]
    Lr = L[np.ix_(keep, keep)]
    rhs = np.zeros(len(keep))
    rhs[keep.index(i)] = 1.0
    return float(np.linalg.solve(Lr, rhs)[keep.index(i)])


@st.composite
def connected_graphs(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_connected_graph(np.random.default_rng(seed))


# --- types -----------------------------------------------------------------


@pytest.mark.parametrize(
    "edges",
    [
        [(0, 0, 1.0)],
        [(0, 3, 1.0)],
        [(0, 1, 1.0), (1, 0, 2.0)],
        [(0, 1, -0.1)],
        [(0, 1, float("nan"))],
    ],
)
def test_weighted_graph_rejects_invalid(edges):
    with pytest.raises(GraphError):
        WeightedGraph(3, edges)


def test_port_matrix_columns():
    E = PortSet(4, RING_PORTS).matrix()
    assert E.T.tolist() == [[1, 0, 0, -1], [1, -1, 0, 0]]
    assert np.allclose(E.sum(axis=0), 0)


def test_port_rejects_loop():
    with pytest.raises(GraphError):
        PortSet(3, [(1, 1)])


def test_signed_graph_requires_negative_weights():
    with pytest.raises(GraphError):
        SignedGraph(WeightedGraph(2, [(0, 1, 1.0)]), [(0, 1, 0.5)])


# --- incidence / laplacian ------------------------------------------------


def test_incidence_single_edge():
    assert incidence(WeightedGraph(2, [(0, 1, 1.0)])).tolist() == [[1], [-1]]


def test_incidence_path_orientation_is_canonical():
    B = incidence(WeightedGraph(3, [(1, 0, 1.0), (2, 1, 1.0)]))
    assert B.T.tolist() == [[1, -1, 0], [0, 1, -1]]


def test_incidence_empty():
    assert incidence(WeightedGraph(5, [])).shape == (5, 0)


def test_laplacian_two_nodes():
    assert laplacian(WeightedGraph(2, [(0, 1, 0.7)])).tolist() == [[0.7, -0.7], [-0.7, 0.7]]


def test_laplacian_matches_four_node_example():
    w12, w13, w24, w34 = 0.3, 1.1, 0.45, 2.5
    g = WeightedGraph.from_topology(4, RING_PAIRS, [w12, w13, w24, w34])
    expected = np.array(
        [
            [w12 + w13, -w12, -w13, 0],
            [-w12, w12 + w24, 0, -w24],
            [-w13, 0, w13 + w34, -w34],
            [0, -w24, -w34, w24 + w34],
        ]
    )
    assert np.allclose(laplacian(g), expected, atol=1e-15)
    B = incidence(g)
    assert np.allclose(B @ np.diag(g.weights) @ B.T, expected, atol=1e-15)


def test_laplacian_zero_weights():
    assert not laplacian(WeightedGraph(3, [(0, 1, 0.0), (1, 2, 0.0)])).any()


def test_signed_laplacian_additivity():
    sg = SignedGraph(WeightedGraph(2, [(0, 1, 2.0)]), [(0, 1, -0.5)])
    assert np.allclose(signed_laplacian(sg), [[1.5, -1.5], [-1.5, 1.5]])


def test_signed_laplacian_of_port_graph():
    gamma = 3.7
    g = WeightedGraph.from_topology(4, RING_PAIRS, [0.3, 0.2, 0.4, 0.1])
    E = PortSet(4, RING_PORTS).matrix()
    sg = SignedGraph(g, [(0, 3, -1 / gamma), (0, 1, -1 / gamma)])
    assert np.allclose(signed_laplacian(sg), laplacian(g) - E @ E.T / gamma, atol=1e-15)


def test_signed_laplacian_without_negative_edges(triangle):
    assert np.array_equal(signed_laplacian(SignedGraph(triangle)), laplacian(triangle))


# --- spectrum ---------------------------------------------------------------


def test_spectrum_examples(triangle):
    assert np.allclose(spectrum(np.eye(2)).eigenvalues, [1, 1])
    assert np.allclose(spectrum([[1, -1], [-1, 1]]).eigenvalues, [0, 2])
    # det(L - x I) = -x (x - 3)^2 for the unit triangle
    assert np.allclose(spectrum(laplacian(triangle)).eigenvalues, [0, 3, 3], atol=1e-12)


def test_spectrum_rejects_nonsymmetric():
    with pytest.raises(GraphError):
        spectrum([[1.0, 2.0], [0.0, 1.0]])


def test_spectrum_deterministic(rng):
    A = laplacian(random_connected_graph(rng))
    s1, s2 = spectrum(A), spectrum(A)
    assert np.array_equal(s1.eigenvalues, s2.eigenvalues)
    assert np.array_equal(s1.eigenvectors, s2.eigenvectors)


@settings(max_examples=50, deadline=None)
@given(connected_graphs())
def test_spectrum_reconstruction(g):
    A = laplacian(g)
    vals, V = spectrum(A)
    assert np.all(np.diff(vals) >= 0)
    assert np.linalg.norm(V @ np.diag(vals) @ V.T - A) <= 1e-9 * max(1.0, np.linalg.norm(A))
    assert np.allclose(V.T @ V, np.eye(g.n_nodes), atol=1e-10)


# --- pseudo-inverse ---------------------------------------------------------


def test_pseudo_inverse_two_nodes():
    w = 0.8
    A = np.array([[w, -w], [-w, w]])
    Ap = pseudo_inverse(A)
    assert np.allclose(Ap, np.array([[1, -1], [-1, 1]]) / (4 * w))
    assert np.allclose(A @ Ap @ A, A)
    f = np.array([1.0, -1.0]) / np.sqrt(2)
    assert f @ Ap @ f == pytest.approx(1 / (2 * w))


def test_pseudo_inverse_identity_and_zero():
    assert np.allclose(pseudo_inverse(np.eye(3)), np.eye(3))
    assert not pseudo_inverse(np.zeros((3, 3))).any()


@settings(max_examples=50, deadline=None)
@given(connected_graphs())
def test_pseudo_inverse_properties(g):
    A = laplacian(g)
    Ap = pseudo_inverse(A)
    nA = np.linalg.norm(A)
    assert np.allclose(Ap, Ap.T, atol=0)
    assert np.linalg.norm(A @ Ap @ A - A) <= 1e-8 * nA
    assert np.linalg.norm(pseudo_inverse(Ap) - A) <= 1e-7 * nA
    # independent route: SVD-based pseudo-inverse
    assert np.allclose(Ap, np.linalg.pinv(A, rcond=1e-10, hermitian=False), atol=1e-9)


# --- effective resistance ---------------------------------------------------


def test_resistance_single_edge():
    assert effective_resistance(WeightedGraph(2, [(0, 1, 0.25)]), 0, 1) == pytest.approx(4.0)


def test_resistance_series_path():
    g = WeightedGraph(4, [(0, 1, 0.6), (1, 3, 0.4)])
    assert effective_resistance(g, 0, 3) == pytest.approx(1 / 0.6 + 1 / 0.4, rel=1e-12)
    assert effective_resistance(g, 0, 3) == pytest.approx(25 / 6, rel=1e-12)


def test_resistance_triangle(triangle):
    assert effective_resistance(triangle, 0, 1) == pytest.approx(2 / 3, rel=1e-12)
    assert grounded_resistance(triangle, 0, 1) == pytest.approx(2 / 3, rel=1e-12)


def test_resistance_disconnected():
    g = WeightedGraph(4, [(0, 1, 1.0), (2, 3, 1.0)])
    with pytest.raises(DisconnectedPort):
        effective_resistance(g, 0, 2)


def test_resistance_zero_weight_edge_is_absent():
    g = WeightedGraph(3, [(0, 1, 1.0), (1, 2, 0.0)])
    with pytest.raises(DisconnectedPort):
        effective_resistance(g, 0, 2)


@settings(max_examples=60, deadline=None)
@given(connected_graphs(), st.data())
def test_resistance_metric_properties(g, data):
    n = g.n_nodes
    i = data.draw(st.integers(0, n - 1))
    j = data.draw(st.integers(0, n - 1).filter(lambda x: x != i))
    Rij = effective_resistance(g, i, j)
    assert Rij > 0
    assert Rij == effective_resistance(g, j, i)
    assert Rij == pytest.approx(grounded_resistance(g, i, j), rel=1e-9)
    for k in range(n):
        if k in (i, j):
            continue
        assert effective_resistance(g, i, k) <= effective_resistance(g, i, j) + effective_resistance(g, j, k) + 1e-8


@settings(max_examples=40, deadline=None)
@given(connected_graphs(), st.data())
def test_rayleigh_monotonicity(g, data):
    e = data.draw(st.integers(0, g.n_edges - 1))
    bump = data.draw(st.floats(0.01, 5.0))
    w = g.weights.copy()
    w[e] += bump
    h = g.with_weights(w)
    n = g.n_nodes
    for i in range(n):
        for j in range(i + 1, n):
            assert effective_resistance(h, i, j) <= effective_resistance(g, i, j) + 1e-9


# --- algebraic connectivity -------------------------------------------------


def test_algebraic_connectivity_examples(triangle):
    assert algebraic_connectivity(triangle) == pytest.approx(3.0)
    assert algebraic_connectivity(WeightedGraph(2, [(0, 1, 0.35)])) == pytest.approx(0.7)
    assert algebraic_connectivity(WeightedGraph(4, [(0, 1, 1.0), (2, 3, 1.0)])) == 0.0


def test_components_ignore_zero_weights():
    labels = components(WeightedGraph(4, [(0, 1, 1.0), (1, 2, 0.0), (2, 3, 2.0)]))
    assert labels[0] == labels[1] != labels[2] == labels[3]


# --- invariants -------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(connected_graphs())
def test_laplacian_invariants(g):
    L = laplacian(g)
    max_deg = np.max(np.diag(L))
    assert np.all(np.abs(L @ np.ones(g.n_nodes)) <= 1e-10 * max_deg)
    vals = spectrum(L).eigenvalues
    assert vals[0] >= -1e-8 * max(1.0, vals[-1])
    assert algebraic_connectivity(g) > 0


@settings(max_examples=40, deadline=None)
@given(connected_graphs(), st.data())
def test_signed_laplacian_kernel(g, data):
    n = g.n_nodes
    negs = []
    for i in range(n):
        for j in range(i + 1, n):
            if data.draw(st.booleans()):
                negs.append((i, j, -data.draw(st.floats(0.01, 3.0))))
    L = signed_laplacian(SignedGraph(g, negs))
    assert np.allclose(L @ np.ones(n), 0, atol=1e-12)
