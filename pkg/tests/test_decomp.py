import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import apply_kraus, ptm_from_action
from posmaps.decomp import (
    bistochastic_decompose,
    caratheodory_cube,
    decompose,
    decompose_general,
    decompose_report,
    rotation_of_unitary,
    spinor_lift,
    verify_decomposition,
)
from posmaps.errors import BoundaryMap, NormExceeded, NotBistochastic, NotPositive, NotRotation
from posmaps.qmap import (
    QubitMap,
    conjugation_map,
    depolarizing_map,
    identity_map,
    random_map,
    random_su2,
    transpose_map,
)


def _oracle_residual(m, d):
    L = ptm_from_action(lambda r: apply_kraus(d.kraus, d.co_kraus, r))
    return float(np.linalg.norm(L - m.ptm))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1.0, 1.0), min_size=3, max_size=3))
def test_caratheodory_cube(s):
    terms = caratheodory_cube(s)
    assert 1 <= len(terms) <= 4
    w = np.array([t[0] for t in terms])
    pts = np.array([t[1] for t in terms])
    assert np.all(w > 0) and w.sum() == pytest.approx(1.0)
    assert np.allclose(w @ pts, s, atol=1e-12)
    assert np.all(np.abs(pts) == 1)


def test_caratheodory_vertex_and_center():
    assert caratheodory_cube([1, -1, 1])[0][0] == pytest.approx(1.0)
    center = caratheodory_cube([0, 0, 0])
    assert len(center) <= 4
    assert np.allclose(sum(w * p for w, p in center), 0, atol=1e-15)


def test_spinor_lift_round_trip(rng):
    for _ in range(100):
        U = random_su2(rng)
        W = spinor_lift(rotation_of_unitary(U))
        assert min(np.abs(W - U).max(), np.abs(W + U).max()) < 1e-12
        assert np.linalg.det(W) == pytest.approx(1.0)


def test_spinor_lift_half_turn():
    # rotation by pi about z lifts to -i sigma_z
    W = spinor_lift(np.diag([-1.0, -1.0, 1.0]))
    assert np.allclose(W, np.diag([-1j, 1j])) or np.allclose(W, np.diag([1j, -1j]))


def test_spinor_lift_rejects_reflections():
    with pytest.raises(NotRotation):
        spinor_lift(np.diag([1.0, -1.0, 1.0]))


def test_bistochastic_errors():
    with pytest.raises(NotBistochastic):
        bistochastic_decompose(QubitMap(np.diag([2.0, 0.5, 0.5, 0.5])))
    with pytest.raises(NormExceeded):
        bistochastic_decompose(QubitMap(np.diag([1.0, 1.5, 0.0, 0.0])))


def test_known_maps_exact():
    d = decompose(identity_map())
    assert len(d.kraus) == 1 and not d.co_kraus and np.array_equal(d.kraus[0], np.eye(2))
    d = decompose(transpose_map())
    assert len(d.co_kraus) == 1 and not d.kraus and np.array_equal(d.co_kraus[0], np.eye(2))
    d = decompose(depolarizing_map())
    assert d.n_terms <= 4
    assert _oracle_residual(depolarizing_map(), d) <= 1e-12


def test_interior_maps(rng):
    for t in (0.05, 0.3, 0.8):
        for s in range(20):
            m = random_map(100 + s, "interior", t)
            d = decompose(m)
            assert d.n_terms <= 4
            assert _oracle_residual(m, d) <= 1e-8
            assert verify_decomposition(m, d) == pytest.approx(_oracle_residual(m, d), abs=1e-13)


def test_unitary_mixtures_are_bistochastic_path(rng):
    m = QubitMap(0.3 * conjugation_map(random_su2(rng)).ptm + 0.7 * transpose_map().ptm)
    rep = decompose_report(m)
    assert rep.path == "bistochastic" and rep.residual <= 1e-12


def test_boundary_map_needs_general_route():
    m = conjugation_map(np.array([[1.0, 0.2], [0.0, 0.3]]))
    with pytest.raises(BoundaryMap):
        decompose(m)
    rep = decompose_general(m)
    assert rep.eps == 1e-6
    assert rep.residual == pytest.approx(_oracle_residual(m, rep.decomposition), rel=1e-6)
    omega = depolarizing_map().ptm
    assert rep.residual <= 3e-6 * np.linalg.norm(m.ptm - omega)
    assert [a["eps"] for a in rep.attempts] == [1e-2, 1e-4, 1e-6]


def test_nonpositive_rejected():
    with pytest.raises(NotPositive):
        decompose(QubitMap(np.diag([1.0, 1.5, 0.0, 0.0])))
    with pytest.raises(NotPositive):
        decompose_general(random_map(0, "nonpositive"))
