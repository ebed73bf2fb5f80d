import numpy as np
import pytest

from susyqc.errors import ArgumentError
from susyqc.fockalg import SparseOperator, hermitian_function, identity, jw_creation
from susyqc.models import SykCoupling, complete_graph, hardcore_model, path_graph, random_graph, syk_model
from susyqc.spectral import (
    NoGroundStateError,
    deformation_invariance_check,
    diagonalize,
    generalized_witten,
    ground_correlator,
    witten_index,
)
from susyqc.susycore import SusyModel, jordan_model, random_fermionic


def test_k2_spectrum():
    rep = diagonalize(hardcore_model(complete_graph(2)))
    np.testing.assert_allclose(rep.eigenvalues, [0, 2, 2], atol=1e-12)
    assert (rep.n_B, rep.n_F, rep.witten_index) == (0, 1, -1)
    assert rep.pairing_violations == []
    # Ground state is (|10> - |01>)/sqrt(2): indices 1 and 2.
    (vec,) = rep.ground_states
    np.testing.assert_allclose(abs(vec[1]), 2**-0.5)
    assert vec[1] == pytest.approx(-vec[2])


def test_p3_spectrum():
    rep = diagonalize(hardcore_model(path_graph(3)))
    np.testing.assert_allclose(rep.eigenvalues, [0, 2, 2, 3, 3], atol=1e-12)
    assert rep.witten_index == -1


@pytest.mark.parametrize("seed", range(6))
def test_pairing_and_positivity_random(seed):
    model = hardcore_model(random_graph(7, 0.4, seed))
    rep = diagonalize(model)
    assert rep.min_eigenvalue >= -1e-10
    assert rep.pairing_violations == []
    assert rep.witten_index == witten_index(model)
    assert rep.n_B + rep.n_F >= abs(rep.witten_index)


def test_syk_pairing():
    rep = diagonalize(syk_model(SykCoupling.random(6, 3, seed=4)))
    assert rep.pairing_violations == []
    assert rep.witten_index == 0


def test_dense_cap():
    with pytest.raises(ArgumentError):
        diagonalize(hardcore_model(complete_graph(3)), max_dim=2)


def test_nondiagonal_projector_rejected():
    Q = SparseOperator.from_dense(np.zeros((2, 2)), "fermionic")
    P = SparseOperator.from_dense(np.full((2, 2), 0.5))
    with pytest.raises(ArgumentError):
        diagonalize(SusyModel(1, Q, P))


def test_gwitten_without_insertions_is_index():
    model = hardcore_model(path_graph(4))
    assert generalized_witten(model, []) == pytest.approx(witten_index(model))


def test_gwitten_h_insertion_vanishes():
    # H = {Q, Q^dag} is Q-exact, so inserting it gives zero.
    model = hardcore_model(complete_graph(3))
    assert abs(generalized_witten(model, [(model.hamiltonian, 0.4)])) < 1e-12


def test_gwitten_evolution_insertion_is_index():
    model = hardcore_model(path_graph(3))
    U = hermitian_function(model.hamiltonian, -1.3j)
    assert generalized_witten(model, [(U, 0.0)]) == pytest.approx(-1, abs=1e-12)


def test_gwitten_time_ordering():
    model = hardcore_model(complete_graph(2))
    with pytest.raises(ArgumentError):
        generalized_witten(model, [(identity(4), 1.0), (identity(4), 0.5)])
    with pytest.raises(ArgumentError):
        generalized_witten(model, [(identity(4), -0.1)])
    with pytest.raises(ArgumentError):
        generalized_witten(model, [(identity(4), 1e6)])


def test_gwitten_warns_on_non_closed_insertion():
    model = hardcore_model(complete_graph(2))
    with pytest.warns(UserWarning):
        generalized_witten(model, [(jw_creation(1, 2) @ jw_creation(1, 2).H, 0.0)])


def test_deformation_invariance():
    model = hardcore_model(path_graph(3))
    U = hermitian_function(model.hamiltonian, -0.5j)
    ins = [(U, 0.0), (identity(8), 0.3)]
    psis = [random_fermionic(3, 10), random_fermionic(3, 11)]
    out = deformation_invariance_check(model, ins, psis)
    assert out["passed"], out


def test_ground_correlator_identity():
    model = hardcore_model(complete_graph(2))
    res = ground_correlator(model, [(identity(4), 0.7)])
    assert res.values == [pytest.approx(1.0)]
    assert res.parities == [-1]


def test_ground_correlator_exact_insertion_vanishes():
    from susyqc.susycore import exact_deformation

    model = hardcore_model(path_graph(3))
    E = exact_deformation(model, random_fermionic(3, 2))
    res = ground_correlator(model, [(E, 0.4)])
    assert abs(res.average) < 1e-12


def test_no_ground_states():
    model = jordan_model((2, 2))
    assert diagonalize(model).ground_states == []
    with pytest.raises(NoGroundStateError):
        ground_correlator(model, [])
