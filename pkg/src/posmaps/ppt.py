"""PPT separability test for two-qubit states.

In dimension 2 x 2 every positive map is decomposable, so a state is
separable exactly when its partial transpose is positive semidefinite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidState

STATE_TOL = 1e-10
PPT_TOL = 1e-10

PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def validate_state(rho, tol=STATE_TOL) -> np.ndarray:
    """Hermitian part of ``rho`` after checking it is a density matrix.

    Raises:
        InvalidState: wrong shape, not Hermitian, negative eigenvalue below
            ``-tol`` or trace off by more than ``tol``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise InvalidState(f"two-qubit state must be 4x4, got {rho.shape}")
    if np.linalg.norm(rho - rho.conj().T) > tol * max(1.0, np.linalg.norm(rho)):
        raise InvalidState("state is not Hermitian")
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise InvalidState(f"trace {tr:.17g} differs from 1")
    lmin = float(np.linalg.eigvalsh(rho)[0])
    if lmin < -tol:
        raise InvalidState(f"negative eigenvalue {lmin:.3e}")
    return rho


def partial_transpose(rho) -> np.ndarray:
    """Transpose on the second tensor factor."""
    r = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)
    return r.transpose(0, 3, 2, 1).reshape(4, 4)


@dataclass(frozen=True)
class PPTVerdict:
    """``verdict`` is ``separable``, ``entangled`` or ``PPT-boundary``."""

    verdict: str
    min_pt_eigenvalue: float
    pt_eigenvalues: np.ndarray

    @property
    def separable(self):
        return self.verdict != "entangled"


def separability_verdict(rho, tol=PPT_TOL) -> PPTVerdict:
    """Separable iff ``lambda_min(rho^Gamma) >= -tol``.

    States with ``|lambda_min| <= tol`` are reported as ``PPT-boundary``
    (separable, up to the tolerance).
    """
    rho = validate_state(rho)
    ev = np.linalg.eigvalsh(partial_transpose(rho))
    lmin = float(ev[0])
    if lmin < -tol:
        kind = "entangled"
    elif lmin <= tol:
        kind = "PPT-boundary"
    else:
        kind = "separable"
    return PPTVerdict(kind, lmin, ev)


def werner_state(p) -> np.ndarray:
    """``p |Phi+><Phi+| + (1 - p) Id / 4``."""
    return p * np.outer(PHI_PLUS, PHI_PLUS.conj()) + (1.0 - p) * np.eye(4) / 4.0


def werner_threshold(tol=1e-12):
    """Bisection on ``p`` for the sign change of ``lambda_min(rho_p^Gamma)``."""
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if np.linalg.eigvalsh(partial_transpose(werner_state(mid)))[0] < 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def random_state(rng, rank=None) -> np.ndarray:
    """Random two-qubit density matrix ``G G^+ / tr`` with ``G`` of shape ``4 x rank``."""
    rank = int(rng.integers(1, 5)) if rank is None else rank
    G = rng.standard_normal((4, rank)) + 1j * rng.standard_normal((4, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real
