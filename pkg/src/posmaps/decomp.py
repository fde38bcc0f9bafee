"""Explicit Kraus/co-Kraus decompositions of positive qubit maps.

Bistochastic maps act on the Bloch ball through a contraction ``R``.  Its
proper SVD ``R = U diag(s) V'`` puts ``s`` in the cube ``[-1, 1]^3``; writing
``s`` as a convex combination of at most four cube vertices ``eps_k`` gives
``R = sum_k lam_k U D(eps_k) V'`` with orthogonal summands.  Rotations lift to
unitary conjugations, reflections to a unitary conjugation after the
transpose.  Interior maps are first scaled to bistochastic form and the
scaling is undone on every term.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BoundaryMap,
    NoConvergence,
    NormExceeded,
    NotBistochastic,
    NotInterior,
    NotPositive,
    NotRotation,
)
from .numkit import pd_functions, svd3
from .positivity import is_bistochastic, is_interior, is_positive
from .qmap import PAULI, REFLECTION, QubitMap, depolarizing_map, from_kraus
from .scaling import scale_to_bistochastic

ZERO_WEIGHT = 1e-12
CUBE_VERTICES = np.array(list(itertools.product([1.0, -1.0], repeat=3)))


@dataclass(frozen=True)
class Decomposition:
    kraus: list
    co_kraus: list

    @property
    def n_terms(self):
        return len(self.kraus) + len(self.co_kraus)


@dataclass(frozen=True)
class RotationTerm:
    weight: float
    O: np.ndarray
    det_sign: int


# ------------------------------------------------------------ Caratheodory

def caratheodory_cube(s, drop=1e-14):
    """Write ``s`` in ``[-1, 1]^3`` as a convex combination of at most 4 vertices.

    Starts from the product weights ``prod_i (1 + eps_i s_i) / 2`` over all
    8 vertices and removes support points along affine dependencies until at
    most four remain.

    Returns:
        list of ``(weight, eps)`` pairs with ``eps`` in ``{-1, +1}^3``.
    """
    s = np.clip(np.asarray(s, dtype=float), -1.0, 1.0)
    w = np.prod((1.0 + CUBE_VERTICES * s) / 2.0, axis=1)
    keep = w > drop
    pts, w = CUBE_VERTICES[keep], w[keep]
    while len(w) > 4:
        # affine dependence: sum c_i p_i = 0, sum c_i = 0
        A = np.vstack([pts.T, np.ones(len(w))])
        c = np.linalg.svd(A)[2][-1]
        if not np.any(c > 0):
            c = -c
        pos = c > 0
        ratios = np.full(len(w), np.inf)
        ratios[pos] = w[pos] / c[pos]
        j = int(np.argmin(ratios))
        w = w - ratios[j] * c
        w[j] = 0.0
        keep = w > drop
        pts, w = pts[keep], w[keep]
    w = w / w.sum()
    return [(float(wi), p.astype(int)) for wi, p in zip(w, pts)]


# ------------------------------------------------------------------- spinor

def rotation_of_unitary(U) -> np.ndarray:
    """``R_ij = 1/2 tr(sigma_i U sigma_j U^+)`` for ``i, j`` in ``{x, y, z}``."""
    U = np.asarray(U, dtype=complex)
    P = PAULI[1:]
    images = np.einsum("ij,bjk,lk->bil", U, P, U.conj())
    return 0.5 * np.einsum("aij,bji->ab", P, images).real


def spinor_lift(R) -> np.ndarray:
    """SU(2) preimage of a rotation under the spinor map.

    The sign is fixed so that the largest-magnitude quaternion component is
    positive.

    Raises:
        NotRotation: if ``R`` is not orthogonal with positive determinant.
    """
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or np.linalg.norm(R.T @ R - np.eye(3)) > 1e-8 or np.linalg.det(R) <= 0:
        raise NotRotation("input is not in SO(3)")
    # quaternion (w, x, y, z); U = w Id - i (x sx + y sy + z sz)
    tr = np.trace(R)
    cands = np.array([1 + tr, 1 + R[0, 0] - R[1, 1] - R[2, 2],
                      1 - R[0, 0] + R[1, 1] - R[2, 2], 1 - R[0, 0] - R[1, 1] + R[2, 2]])
    k = int(np.argmax(cands))
    q = np.empty(4)
    root = np.sqrt(max(cands[k], 0.0))
    if k == 0:
        q = np.array([root, (R[2, 1] - R[1, 2]) / root, (R[0, 2] - R[2, 0]) / root,
                      (R[1, 0] - R[0, 1]) / root])
    elif k == 1:
        q = np.array([(R[2, 1] - R[1, 2]) / root, root, (R[0, 1] + R[1, 0]) / root,
                      (R[0, 2] + R[2, 0]) / root])
    elif k == 2:
        q = np.array([(R[0, 2] - R[2, 0]) / root, (R[0, 1] + R[1, 0]) / root, root,
                      (R[1, 2] + R[2, 1]) / root])
    else:
        q = np.array([(R[1, 0] - R[0, 1]) / root, (R[0, 2] + R[2, 0]) / root,
                      (R[1, 2] + R[2, 1]) / root, root])
    q /= np.linalg.norm(q)
    if q[int(np.argmax(np.abs(q)))] < 0:
        q = -q
    w, x, y, z = q
    return w * PAULI[0] - 1j * (x * PAULI[1] + y * PAULI[2] + z * PAULI[3])


# ------------------------------------------------------ bistochastic maps

def bistochastic_decompose(m: QubitMap, tol=1e-9):
    """Signed isometries ``O_k`` with ``R = sum_k lam_k O_k`` (at most four).

    Raises:
        NotBistochastic: if the PTM border is not ``(1, 0, 0, 0)``.
        NormExceeded: if ``||R|| > 1 + 1e-8`` (the map is not positive).
    """
    if not is_bistochastic(m, tol):
        raise NotBistochastic("map is not unital and trace preserving")
    U, s, V = svd3(m.rblock)
    if s[0] > 1.0 + 1e-8:
        raise NormExceeded(f"Bloch contraction has norm {s[0]:.12g} > 1")
    terms = []
    for lam, eps in caratheodory_cube(s):
        if lam < ZERO_WEIGHT:
            continue
        O = U @ np.diag(eps.astype(float)) @ V.T
        terms.append(RotationTerm(lam, O, int(np.prod(eps))))
    total = sum(t.weight for t in terms)
    return [RotationTerm(t.weight / total, t.O, t.det_sign) for t in terms]


def _terms_to_decomposition(terms, Ainv=None, Binv=None) -> Decomposition:
    I2 = np.eye(2, dtype=complex)
    Ainv = I2 if Ainv is None else Ainv
    Binv = I2 if Binv is None else Binv
    kraus, co_kraus = [], []
    for t in terms:
        r = np.sqrt(t.weight)
        if t.det_sign > 0:
            U = spinor_lift(t.O)
            kraus.append(r * Ainv @ U @ Binv)
        else:
            # O = O' diag(1,-1,1): Phi_O = Phi_{U'} o T, and the transpose
            # passes through Phi_{B^-1} as entrywise conjugation
            U = spinor_lift(t.O @ REFLECTION)
            co_kraus.append(r * Ainv @ U @ Binv.conj())
    return Decomposition(kraus, co_kraus)


def verify_decomposition(m: QubitMap, d: Decomposition) -> float:
    """``||PTM(from_kraus(d)) - PTM(m)||_F``."""
    return float(np.linalg.norm(from_kraus(d.kraus, d.co_kraus).ptm - m.ptm))


@dataclass(frozen=True)
class DecompositionReport:
    decomposition: Decomposition
    residual: float
    path: str
    eps: float | None = None
    scaling_iterations: int = 0
    attempts: list = field(default_factory=list)


def decompose_report(m: QubitMap, tol=1e-8, max_iter=10000, scaling_tol=1e-10,
                     known_interior=False) -> DecompositionReport:
    """Exact pipeline with diagnostics; see :func:`decompose`.

    ``known_interior`` skips the numerical interiority gate for maps that are
    interior by construction (such as ``(1 - eps) Phi + eps Omega``), whose
    relative margin can fall below the strictness threshold for tiny ``eps``.
    """
    if not known_interior and not is_positive(m).positive:
        raise NotPositive("map is not positive")
    if is_bistochastic(m):
        d = _terms_to_decomposition(bistochastic_decompose(m))
        return DecompositionReport(d, verify_decomposition(m, d), "bistochastic")
    if not known_interior and not is_interior(m):
        raise BoundaryMap("map lies on the boundary of the positive cone; use decompose_general")
    res = scale_to_bistochastic(m, tol=scaling_tol, max_iter=max_iter, check_interior=False)
    Ainv = pd_functions(res.A)[2]
    Binv = pd_functions(res.B)[2]
    terms = bistochastic_decompose(res.scaled, tol=max(1e-9, 10 * scaling_tol))
    d = _terms_to_decomposition(terms, Ainv, Binv)
    return DecompositionReport(d, verify_decomposition(m, d), "interior",
                               scaling_iterations=res.iterations)


def decompose(m: QubitMap, tol=1e-8, max_iter=10000) -> Decomposition:
    """At most four Kraus/co-Kraus operators realizing ``m``.

    Bistochastic maps are decomposed directly; other maps must lie in the
    interior of the positive cone and are scaled first.

    Raises:
        NotPositive, BoundaryMap, NoConvergence
    """
    return decompose_report(m, tol=tol, max_iter=max_iter).decomposition


DEFAULT_EPS_SCHEDULE = (1e-2, 1e-4, 1e-6)


def decompose_general(m: QubitMap, eps_schedule=DEFAULT_EPS_SCHEDULE, tol=1e-8, max_iter=10000):
    """Decomposition of any positive map, regularizing boundary maps.

    Boundary maps are replaced by ``(1 - eps) Phi + eps Omega`` along the
    schedule.  The returned residual is always measured against the original
    map, so the regularization error is reported rather than hidden.

    Returns:
        ``DecompositionReport`` of the last successful stage.

    Raises:
        NotPositive: if ``m`` is not positive.
        NoConvergence: if no stage of the schedule succeeds.
    """
    if not is_positive(m).positive:
        raise NotPositive("map is not positive")
    try:
        return decompose_report(m, tol=tol, max_iter=max_iter)
    except BoundaryMap:
        pass
    omega = depolarizing_map().ptm
    last = None
    attempts = []
    for eps in eps_schedule:
        m_eps = QubitMap((1.0 - eps) * m.ptm + eps * omega)
        try:
            # m positive => m_eps(rho) >= eps tr(rho) Id / 2, strictly interior
            rep = decompose_report(m_eps, tol=tol, max_iter=max_iter, known_interior=True)
        except (NoConvergence, NotInterior, BoundaryMap) as exc:
            attempts.append({"eps": eps, "ok": False, "error": str(exc)})
            continue
        own = rep.residual
        if own > tol:
            attempts.append({"eps": eps, "ok": False, "residual_regularized": own})
            continue
        residual = verify_decomposition(m, rep.decomposition)
        attempts.append({"eps": eps, "ok": True, "residual": residual,
                         "residual_regularized": own, "n_terms": rep.decomposition.n_terms})
        last = DecompositionReport(rep.decomposition, residual, f"regularized({eps:g})", eps,
                                   rep.scaling_iterations, attempts)
    if last is None:
        raise NoConvergence(0, float("nan"), "no stage of the regularization schedule succeeded")
    return DecompositionReport(last.decomposition, last.residual, last.path, last.eps,
                               last.scaling_iterations, attempts)
