import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import euler_by_subsets, hardcore_dense
from susyqc.errors import ArgumentError, GraphParseError
from susyqc.fockalg import SparseOperator, commutator, identity, number_operator, residual
from susyqc.models import (
    Graph,
    SykCoupling,
    ansatz_supercharge,
    complete_graph,
    hardcore_model,
    independence_euler_characteristic,
    independent_sets,
    load_graph,
    path_graph,
    random_graph,
    syk_model,
    syk_refined_index_closed_form,
    zq_symmetry_operator,
)
from susyqc.spectral import witten_index


@st.composite
def graphs(draw, max_n=7):
    n = draw(st.integers(1, max_n))
    pairs = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(n, frozenset(p for p, k in zip(pairs, keep) if k))


def test_load_graph_with_comments():
    G = load_graph("# triangle\n3\n1 2\n2 3 # closing\n3 1\n")
    assert G == complete_graph(3)
    assert load_graph(G.to_text()) == G


@pytest.mark.parametrize("text, line", [
    ("", 1),
    ("x\n", 1),
    ("2\n1 1\n", 2),
    ("2\n1 3\n", 2),
    ("3\n1 2\n2 1\n", 3),
    ("2\n1 2 3\n", 2),
])
def test_load_graph_errors(text, line):
    with pytest.raises(GraphParseError) as err:
        load_graph(text)
    assert err.value.line == line


def test_graph_rejects_bad_edges():
    with pytest.raises(ArgumentError):
        Graph(2, frozenset({(1, 3)}))
    with pytest.raises(ArgumentError):
        Graph(0)


@pytest.mark.parametrize("G, expected", [
    (complete_graph(2), -1),
    (complete_graph(3), -2),
    (path_graph(3), -1),
    (Graph(1), 0),
    (Graph(2), 0),
])
def test_euler_known_values(G, expected):
    assert independence_euler_characteristic(G) == expected


@settings(max_examples=60, deadline=None)
@given(graphs())
def test_euler_matches_exhaustive_oracle(G):
    assert independence_euler_characteristic(G) == euler_by_subsets(G.n_vertices, G.edges)


@settings(max_examples=25, deadline=None)
@given(graphs(max_n=6))
def test_witten_index_equals_euler(G):
    assert witten_index(hardcore_model(G)) == independence_euler_characteristic(G)


def test_independent_sets_of_k2():
    assert [s.bits for s in independent_sets(complete_graph(2))] == [(0, 0), (1, 0), (0, 1)]


@pytest.mark.parametrize("G", [complete_graph(3), path_graph(4), random_graph(5, 0.5, 3)])
def test_hardcore_matches_dense_oracle(G):
    model = hardcore_model(G)
    Q, P = hardcore_dense(G.n_vertices, G.edges)
    np.testing.assert_array_equal(model.Q.to_dense(), Q)
    np.testing.assert_array_equal(model.P.to_dense(), P)
    assert model.report.passed
    assert model.projected_dim == len(independent_sets(G))


def test_hardcore_vertex_limit():
    with pytest.raises(ArgumentError):
        hardcore_model(Graph(21))


def test_random_graph_is_seeded():
    assert random_graph(8, 0.4, 11) == random_graph(8, 0.4, 11)


def test_syk_passes_validation():
    model = syk_model(SykCoupling.random(5, 3, seed=2))
    assert model.report.passed
    assert model.P.trace() == 32


def test_syk_even_q_rejected():
    with pytest.raises(ArgumentError):
        syk_model(SykCoupling.random(4, 4, seed=0))


def test_syk_q_above_n_warns():
    with pytest.warns(UserWarning):
        model = syk_model(SykCoupling.random(2, 3, seed=0))
    assert model.Q.nnz == 0


def test_syk_coupling_round_trip():
    c = SykCoupling.random(4, 3, seed=5)
    assert SykCoupling.from_dict(c.to_dict()) == c
    with pytest.raises(ArgumentError):
        SykCoupling(4, 3, {(2, 1, 3): 1.0})


def test_zq_commutes_with_syk_supercharge():
    model = syk_model(SykCoupling.random(6, 3, seed=1))
    g = zq_symmetry_operator(6, 3, 1)
    assert residual(commutator(model.Q, g)) < 1e-12
    assert residual(commutator(model.Q.H, g)) < 1e-12


def test_refined_index_spot_value():
    # Tr[(-1)^F g] for N = q = 3, r = 1: the closed form gives -3 sqrt(3) i.
    assert syk_refined_index_closed_form(3, 3, 1) == pytest.approx(-3 * math.sqrt(3) * 1j, abs=1e-12)


@pytest.mark.parametrize("n, q, r", [(3, 3, 1), (5, 3, 2), (6, 5, 3), (7, 7, 4), (4, 3, 0.37)])
def test_refined_index_matches_product_formula(n, q, r):
    # Independent form: prod over modes of (1 - e^{2 pi i r / q}).
    product = (1 - cmath.exp(2j * math.pi * r / q)) ** n
    assert syk_refined_index_closed_form(n, q, r) == pytest.approx(product, rel=1e-12, abs=1e-12)
    parity = np.array([(-1) ** bin(k).count("1") for k in range(2**n)])
    trace = (parity * zq_symmetry_operator(n, q, r).diag()).sum()
    assert abs(trace - product) <= 1e-9 * max(1.0, abs(product))


def test_ansatz_hardcore_reconstruction():
    G = path_graph(3)
    model = hardcore_model(G)
    n = G.n_vertices
    B = []
    for i in range(1, n + 1):
        op = identity(2**n)
        for j in G.neighbors(i):
            op = op @ (identity(2**n) - number_operator(j, n))
        B.append(op)
    ansatz, rep = ansatz_supercharge(n, B)
    assert rep.passed
    assert residual(ansatz.Q - model.Q) == 0


def test_ansatz_reports_nilpotency_failure():
    n = 2
    B = [identity(4), number_operator(1, 2)]
    _, rep = ansatz_supercharge(n, B)
    assert not rep.passed
    assert rep.nilpotency_residual > 0


def test_ansatz_rejects_fermionic_b():
    from susyqc.fockalg import jw_creation

    with pytest.raises(ArgumentError):
        ansatz_supercharge(2, [jw_creation(1, 2), identity(4)])
    with pytest.raises(ArgumentError):
        ansatz_supercharge(2, [identity(4)])
    with pytest.raises(ArgumentError):
        ansatz_supercharge(1, [SparseOperator.from_dense(np.eye(4))])
