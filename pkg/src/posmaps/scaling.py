"""Scaling interior positive maps to bistochastic form.

For positive definite ``A, B`` the map ``Phi_A o Phi o Phi_B`` is unital iff
``Phi(B^2) = A^-2`` and trace preserving iff ``Phi^*(A^2) = B^-2``.
Eliminating ``B`` leaves the fixed-point equation ``S = f(S)`` with

    f(S) = Phi(Phi^*(S)^-1)^-1,    S = A^2.

The normalized map ``f1(s) = f(s) / tr f(s)`` sends density matrices to
density matrices; a fixed point ``sigma0`` of ``f1`` is automatically a fixed
point of ``f`` (the scaled map is trace preserving and sends ``Id`` to
``Id / alpha``, which forces ``alpha = 1``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergence, NotInterior, NotPositiveDefinite
from .numkit import as_herm, pd_functions
from .positivity import is_interior, slemma_margin
from .qmap import PAULI, QubitMap, adjoint, apply, bloch, compose, conjugation_map

log = logging.getLogger(__name__)

I2 = np.eye(2, dtype=complex)
NEAR_BOUNDARY_MARGIN = 1e-6
STALL_WINDOW = 25


@dataclass(frozen=True)
class ScalingResult:
    A: np.ndarray
    B: np.ndarray
    scaled: QubitMap
    sigma0: np.ndarray
    iterations: int
    residual_unital: float
    residual_tp: float
    fixed_point_residual: float
    alpha: float
    scheme: str
    warnings: list = field(default_factory=list)


def _inv(P):
    try:
        return pd_functions(P)[2]
    except NotPositiveDefinite as exc:
        raise NotInterior(f"intermediate lost positive definiteness: {exc}") from exc


def f_map(m: QubitMap, S, normalized=False):
    """``f(S) = Phi(Phi^*(S)^-1)^-1``, or ``f(S) / tr f(S)`` when ``normalized``.

    Raises:
        NotInterior: if an intermediate matrix is not positive definite.
    """
    S = as_herm(S)
    inner = _inv(as_herm(apply(adjoint(m), S)))
    out = _inv(as_herm(apply(m, inner)))
    if normalized:
        return out / np.trace(out).real
    return out


def scaling_pair(m: QubitMap, sigma):
    """``A = sigma^(1/2)`` and ``B = Phi^*(sigma)^(-1/2)``."""
    A = pd_functions(sigma)[0]
    try:
        B = pd_functions(as_herm(apply(adjoint(m), sigma)))[1]
    except NotPositiveDefinite as exc:
        raise NotInterior(str(exc)) from exc
    return A, B


def scaled_map(m: QubitMap, A, B) -> QubitMap:
    """``Phi_A o Phi o Phi_B``."""
    return compose(conjugation_map(A), compose(m, conjugation_map(B)))


def bistochastic_residuals(m: QubitMap):
    unital = np.linalg.norm(apply(m, I2) - I2)
    tp = np.linalg.norm(apply(adjoint(m), I2) - I2)
    return float(unital), float(tp)


def _finish(m, sigma, iterations, scheme, warnings):
    sigma = as_herm(sigma / np.trace(sigma).real)
    A, B = scaling_pair(m, sigma)
    scaled = scaled_map(m, A, B)
    ru, rt = bistochastic_residuals(scaled)
    f = f_map(m, sigma)
    fp_res = float(np.linalg.norm(f / np.trace(f).real - sigma))
    return ScalingResult(
        A, B, scaled, sigma, iterations, ru, rt, fp_res, float(np.trace(f).real), scheme, warnings
    )


def _sigma_of(r):
    return as_herm(0.5 * (I2 + r[0] * PAULI[1] + r[1] * PAULI[2] + r[2] * PAULI[3]))


def _newton_system(m: QubitMap, r):
    """Residual ``f1(sigma) - sigma`` in Bloch coordinates and its exact Jacobian.

    Uses ``d(X^-1) = -X^-1 dX X^-1`` through each stage of ``f``.
    """
    S = _sigma_of(r)
    adj = adjoint(m)
    X = as_herm(apply(adj, S))
    Z = _inv(X)
    f = _inv(as_herm(apply(m, Z)))
    tr = np.trace(f).real
    f1 = f / tr
    G = bloch(f1)[1:].real - r
    Jac = np.empty((3, 3))
    for j in range(3):
        dS = 0.5 * PAULI[j + 1]
        dZ = -Z @ apply(adj, dS) @ Z
        df = -f @ apply(m, dZ) @ f
        df1 = df / tr - f * np.trace(df).real / tr**2
        Jac[:, j] = bloch(as_herm(df1))[1:].real
    Jac -= np.eye(3)
    return G, Jac


def _newton(m: QubitMap, sigma, budget, tol, converged):
    """Newton iteration on the Bloch vector of ``sigma`` with backtracking."""
    r = bloch(sigma / np.trace(sigma).real)[1:].real
    G, Jac = _newton_system(m, r)
    res = float(np.linalg.norm(G))
    best = res
    used = 0
    while used < budget:
        if res <= tol and converged(_sigma_of(r)):
            return _sigma_of(r), used, best
        try:
            step = np.linalg.solve(Jac, -G)
        except np.linalg.LinAlgError:
            step = -G
        used += 1
        lam = 1.0
        moved = False
        for _ in range(40):
            r_new = r + lam * step
            if np.linalg.norm(r_new) < 1.0:
                try:
                    G_new, Jac_new = _newton_system(m, r_new)
                except NotInterior:
                    G_new = None
                if G_new is not None and np.linalg.norm(G_new) < res:
                    r, G, Jac = r_new, G_new, Jac_new
                    res = float(np.linalg.norm(G))
                    best = min(best, res)
                    moved = True
                    break
            lam *= 0.5
        if not moved:
            break
    if res <= tol and converged(_sigma_of(r)):
        return _sigma_of(r), used, best
    return None, used, best


def scale_to_bistochastic(
    m: QubitMap, tol=1e-10, max_iter=10000, check_interior=True
) -> ScalingResult:
    """Positive definite ``A, B`` making ``Phi_A o Phi o Phi_B`` bistochastic.

    Runs the damped iteration ``sigma <- (1 - eta) sigma + eta f1(sigma)``
    from ``Id/2``; ``eta`` halves whenever the fixed-point residual fails to
    decrease.  Near the boundary of the cone the iteration contracts very
    slowly, so once progress stalls the remaining budget goes to Newton's
    method on ``f1(sigma) = sigma``.  The gauge is fixed by
    ``tr sigma0 = 1``.  Every Newton step counts as one iteration.

    Raises:
        NotInterior: if ``m`` is not in the interior of the positive cone.
        NoConvergence: if the residuals exceed ``tol`` after ``max_iter``
            iterations.
    """
    warnings = []
    if check_interior:
        if not is_interior(m):
            raise NotInterior("scaling requires a map in the interior of the positive cone")
        res, _, scale = slemma_margin(m)
        if res.g_star / scale < NEAR_BOUNDARY_MARGIN:
            warnings.append(
                f"interiority margin {res.g_star / scale:.3e} below {NEAR_BOUNDARY_MARGIN:g}; "
                "expect ill-conditioned scaling"
            )

    def converged(sig):
        sig = sig / np.trace(sig).real
        A, B = scaling_pair(m, sig)
        ru, rt = bistochastic_residuals(scaled_map(m, A, B))
        return max(ru, rt) <= tol

    sigma = I2 / 2
    f1 = f_map(m, sigma, normalized=True)
    res_now = float(np.linalg.norm(f1 - sigma))
    best = res_now
    history = [res_now]
    eta = 1.0
    it = 0
    while it < max_iter:
        if res_now <= tol and converged(sigma):
            return _finish(m, sigma, it, "damped", warnings)
        cand = as_herm((1.0 - eta) * sigma + eta * f1)
        it += 1
        f1_cand = f_map(m, cand, normalized=True)
        res_cand = float(np.linalg.norm(f1_cand - cand))
        if res_cand < res_now:
            sigma, f1, res_now = cand, f1_cand, res_cand
            best = min(best, res_now)
        else:
            eta *= 0.5
        history.append(res_now)
        stalled = len(history) > STALL_WINDOW and res_now > 0.5 * history[-STALL_WINDOW - 1]
        if eta < 1e-8 or stalled:
            break
    if res_now <= tol and converged(sigma):
        return _finish(m, sigma, it, "damped", warnings)

    log.debug("damped iteration stalled at %d iterations; switching to Newton", it)
    sig_newton, used, best_newton = _newton(m, sigma, max_iter - it, tol, converged)
    it += used
    if sig_newton is not None:
        return _finish(m, sig_newton, it, "newton", warnings)
    raise NoConvergence(it, min(best, best_newton))


def reconstruct(result: ScalingResult) -> QubitMap:
    """``Phi_{A^-1} o scaled o Phi_{B^-1}``: recovers the input map."""
    Ainv = pd_functions(result.A)[2]
    Binv = pd_functions(result.B)[2]
    return compose(conjugation_map(Ainv), compose(result.scaled, conjugation_map(Binv)))
