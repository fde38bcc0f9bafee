import numpy as np
import pytest

from posmaps.lorentz import ConeMembership, herm_to_lorentz, in_cone, lorentz_to_herm, minkowski_j, q_form


def test_q_is_four_times_determinant(rng):
    for _ in range(20):
        H = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        H = H + H.conj().T
        assert q_form(herm_to_lorentz(H)) == pytest.approx(4 * np.linalg.det(H).real, abs=1e-12)


def test_psd_matrices_land_in_cone(rng):
    for _ in range(20):
        G = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        assert in_cone(herm_to_lorentz(G @ G.conj().T)) == ConeMembership.INTERIOR
    pure = np.array([[1.0, 0.0], [0.0, 0.0]])
    assert in_cone(herm_to_lorentz(pure)) == ConeMembership.BOUNDARY


def test_classification():
    assert in_cone([1, 0, 0, 0]) == ConeMembership.INTERIOR
    assert in_cone([1, 0, 0, 1]) == ConeMembership.BOUNDARY
    assert in_cone([1, 0, 0, 2]) == ConeMembership.OUTSIDE
    assert in_cone([-1, 0, 0, 0]) == ConeMembership.NEGATIVE_CONE
    assert in_cone([-1, 1, 0, 0]) == ConeMembership.NEGATIVE_CONE


def test_round_trip(rng):
    x = rng.standard_normal(4)
    assert np.allclose(herm_to_lorentz(lorentz_to_herm(x)), x)


def test_minkowski_j():
    assert np.array_equal(minkowski_j(3), np.diag([1.0, -1.0, -1.0]))
    with pytest.raises(ValueError):
        minkowski_j(1)
