import numpy as np
import pytest

from posmaps.errors import NotPositiveDefinite
from posmaps.numkit import (
    herm_eig,
    jacobi_eigh,
    jacobi_eigvalsh_herm,
    lambda_min,
    pd_functions,
    svd3,
    sym_eig,
)


def test_sym_eig_matches_jacobi_reference(rng):
    for n in (2, 3, 4, 6):
        for _ in range(20):
            S = rng.standard_normal((n, n))
            S = S + S.T
            w, V = sym_eig(S)
            wj, Vj = jacobi_eigh(S)
            assert np.allclose(w, wj, atol=1e-12 * np.linalg.norm(S))
            assert np.allclose(V @ np.diag(w) @ V.T, S, atol=1e-12)
            assert np.allclose(Vj.T @ Vj, np.eye(n), atol=1e-12)


def test_herm_eig_matches_real_embedding(rng):
    for _ in range(20):
        H = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        H = H + H.conj().T
        w, V = herm_eig(H)
        assert np.allclose(w, jacobi_eigvalsh_herm(H), atol=1e-12)
        assert np.allclose(V @ np.diag(w) @ V.conj().T, H, atol=1e-12)


def test_jacobi_known_spectrum():
    # [[2, 1], [1, 2]] has eigenvalues 1 and 3
    w, V = jacobi_eigh(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert np.allclose(w, [1.0, 3.0], atol=1e-15)
    assert abs(abs(V[0, 0]) - 1 / np.sqrt(2)) < 1e-15


def test_lambda_min_symmetrizes():
    assert lambda_min(np.array([[1.0, 2.0], [0.0, 1.0]])) == pytest.approx(0.0, abs=1e-15)


def test_pd_functions_on_diagonal():
    s, isq, inv = pd_functions(np.diag([4.0, 9.0]))
    assert np.allclose(s, np.diag([2.0, 3.0]))
    assert np.allclose(isq, np.diag([0.5, 1 / 3]))
    assert np.allclose(inv, np.diag([0.25, 1 / 9]))


def test_pd_functions_reject_singular():
    with pytest.raises(NotPositiveDefinite):
        pd_functions(np.diag([1.0, 0.0]))
    with pytest.raises(NotPositiveDefinite):
        pd_functions(np.diag([1.0, 1e-14]))


def test_svd3_is_proper(rng):
    for _ in range(50):
        M = rng.standard_normal((3, 3))
        U, s, V = svd3(M)
        assert np.linalg.det(U) == pytest.approx(1.0)
        assert np.linalg.det(V) == pytest.approx(1.0)
        assert np.allclose(U @ np.diag(s) @ V.T, M, atol=1e-12)
        assert s[0] >= s[1] >= abs(s[2])
        assert np.sign(s[2]) == np.sign(np.linalg.det(M))


def test_svd3_reflection():
    U, s, V = svd3(np.diag([1.0, -1.0, 1.0]))
    assert np.allclose(s, [1.0, 1.0, -1.0])
