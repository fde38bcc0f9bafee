"""Dense kernels for small real symmetric and complex Hermitian matrices.

The production routines delegate to LAPACK through ``numpy.linalg``; at
these sizes (dimension at most 8) LAPACK is deterministic for identical input
and orders of magnitude faster than a Python loop.  A cyclic Jacobi solver is
kept alongside as an independent reference used by the test-suite.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import NotPositiveDefinite, PosMapsError

MAX_SYM_DIM = 8
MAX_HERM_DIM = 4


class EigResult(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_sym(M) -> np.ndarray:
    """Return the symmetric part of a real square matrix (exactly symmetric)."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    return 0.5 * (M + M.T)


def as_herm(H) -> np.ndarray:
    """Return the Hermitian part of a complex square matrix (exactly Hermitian)."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    return 0.5 * (H + H.conj().T)


def sym_eig(S) -> EigResult:
    """Full spectral decomposition of a real symmetric matrix, eigenvalues ascending."""
    S = as_sym(S)
    w, V = np.linalg.eigh(S)
    return EigResult(w, V)


def herm_eig(H) -> EigResult:
    """Full spectral decomposition of a complex Hermitian matrix, eigenvalues ascending."""
    H = as_herm(H)
    w, V = np.linalg.eigh(H)
    return EigResult(w, V)


def lambda_min(S) -> float:
    """Smallest eigenvalue of a symmetric or Hermitian matrix."""
    S = np.asarray(S)
    return float(np.linalg.eigvalsh(0.5 * (S + S.conj().T))[0])


def pd_floor(P) -> float:
    return 1e-12 * (1.0 + np.linalg.norm(P))


def pd_functions(P):
    """Square root, inverse square root and inverse of a positive definite matrix.

    Raises:
        NotPositiveDefinite: if the smallest eigenvalue is at or below
            ``1e-12 * (1 + ||P||_F)``.
    """
    P = as_herm(P)
    w, V = np.linalg.eigh(P)
    if w[0] <= pd_floor(P):
        raise NotPositiveDefinite(f"smallest eigenvalue {w[0]:.3e} below floor {pd_floor(P):.3e}")
    r = np.sqrt(w)
    sqrt = as_herm((V * r) @ V.conj().T)
    inv_sqrt = as_herm((V / r) @ V.conj().T)
    inv = as_herm((V / w) @ V.conj().T)
    return sqrt, inv_sqrt, inv


def svd3(M):
    """Proper singular value decomposition of a real 3x3 matrix.

    Returns ``(U, s, V)`` with ``U, V`` in SO(3) and ``M = U @ diag(s) @ V.T``.
    The singular values are sorted so that ``s[0] >= s[1] >= |s[2]|``; when
    ``det M < 0`` the sign is carried by ``s[2]``.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (3, 3):
        raise ValueError(f"svd3 expects a 3x3 matrix, got {M.shape}")
    U, s, Vt = np.linalg.svd(M)
    V = Vt.T.copy()
    U = U.copy()
    s = s.copy()
    if np.linalg.det(U) < 0:
        U[:, 2] = -U[:, 2]
        s[2] = -s[2]
    if np.linalg.det(V) < 0:
        V[:, 2] = -V[:, 2]
        s[2] = -s[2]
    return U, s, V


def jacobi_eigh(S, tol=1e-15, max_sweeps=100) -> EigResult:
    """Cyclic Jacobi eigensolver for a real symmetric matrix.

    Reference implementation; slow but independent of LAPACK.
    """
    A = as_sym(S).copy()
    n = A.shape[0]
    V = np.eye(n)
    scale = max(np.linalg.norm(A), 1e-300)
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    # theta^2 would overflow; t ~ 1 / (2 theta)
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                G = np.eye(n)
                G[p, p] = G[q, q] = c
                G[p, q] = s
                G[q, p] = -s
                A = G.T @ A @ G
                A[p, q] = A[q, p] = 0.0
                V = V @ G
    else:
        raise PosMapsError("Jacobi iteration cap reached")
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return EigResult(w[order], V[:, order])


def jacobi_eigvalsh_herm(H) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix via Jacobi on its real embedding."""
    H = as_herm(H)
    X, Y = H.real, H.imag
    emb = np.block([[X, -Y], [Y, X]])
    w = jacobi_eigh(emb).eigenvalues
    return w[::2]
