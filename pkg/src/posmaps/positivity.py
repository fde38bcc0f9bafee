"""Membership tests for the cone of positive qubit maps and its sub-cones.

Positivity is decided through the S-lemma: ``Phi`` sends ``L_4 U -L_4`` into
itself iff ``PTM' J PTM - mu J`` is PSD for some ``mu >= 0``.  The sign of
``Phi(Id)`` then tells ``P`` from ``-P``.  Pure-state sampling on the Bloch
sphere is only used as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .lorentz import minkowski_j
from .numkit import lambda_min
from .qmap import QubitMap, adjoint, choi, compose, transpose_map
from .slemma import mu_search

POSITIVITY_TOL = 1e-10
TOL_STRICT = 1e-8
PROPERTY_TOL = 1e-9
J4 = minkowski_j(4)

AXIS_STATES = {
    "+z": np.array([1, 0], dtype=complex),
    "-z": np.array([0, 1], dtype=complex),
    "+x": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "-x": np.array([1, -1], dtype=complex) / np.sqrt(2),
    "+y": np.array([1, 1j], dtype=complex) / np.sqrt(2),
    "-y": np.array([1, -1j], dtype=complex) / np.sqrt(2),
}


def bloch_direction_state(n) -> np.ndarray:
    """Pure state vector whose Bloch vector is the unit vector ``n``."""
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n)
    theta = np.arccos(np.clip(n[2], -1.0, 1.0))
    phi = np.arctan2(n[1], n[0])
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def state_bloch_direction(phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=complex)
    phi = phi / np.linalg.norm(phi)
    rho = np.outer(phi, phi.conj())
    return np.array([2 * rho[0, 1].real, 2 * rho[1, 0].imag, (rho[0, 0] - rho[1, 1]).real])


def fibonacci_sphere(count: int) -> np.ndarray:
    """Quasi-uniform unit vectors (golden-spiral lattice), shape ``(count, 3)``."""
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    ang = np.pi * (3.0 - np.sqrt(5.0)) * i
    return np.column_stack([r * np.cos(ang), r * np.sin(ang), z])


def pure_image_min_eig(m: QubitMap, dirs) -> np.ndarray:
    """``lambda_min(Phi(|n><n|))`` for unit Bloch directions ``n`` (rows of ``dirs``)."""
    dirs = np.atleast_2d(dirs)
    x = np.column_stack([np.ones(len(dirs)), dirs])
    y = x @ m.ptm.T
    return 0.5 * (y[:, 0] - np.linalg.norm(y[:, 1:], axis=1))


def _refine_direction(m: QubitMap, n0):
    def f(ang):
        th, ph = ang
        n = [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)]
        return float(pure_image_min_eig(m, n)[0])

    n0 = np.asarray(n0) / np.linalg.norm(n0)
    x0 = [np.arccos(np.clip(n0[2], -1, 1)), np.arctan2(n0[1], n0[0])]
    res = minimize(f, x0, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 400})
    th, ph = res.x
    n = np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
    return n, f(res.x)


def worst_pure_state(m: QubitMap, seeds=(), samples=2000):
    """Pure state (Bloch direction) minimizing ``lambda_min(Phi(|phi><phi|))``."""
    cands = [state_bloch_direction(v) for v in AXIS_STATES.values()]
    cands += [np.asarray(s, dtype=float) for s in seeds]
    grid = fibonacci_sphere(samples)
    vals = pure_image_min_eig(m, grid)
    cands.append(grid[int(np.argmin(vals))])
    cands = [c / np.linalg.norm(c) for c in cands if np.linalg.norm(c) > 0]
    vals = [float(pure_image_min_eig(m, c)[0]) for c in cands]
    order = np.argsort(vals, kind="stable")[:3]
    best = (cands[order[0]], vals[order[0]])
    for k in order:
        n, v = _refine_direction(m, cands[k])
        if v < best[1] - 1e-15:
            best = (n, v)
    return best


@dataclass(frozen=True)
class PositivityResult:
    """Outcome of :func:`is_positive`.

    ``orientation`` is ``"positive"`` when ``Phi(Id)`` lies in the cone,
    ``"negative"`` when ``-Phi`` is the positive map, ``"degenerate"`` when
    ``Phi(Id)`` vanishes.  A failed test carries a violating pure state.
    """

    positive: bool
    g_star: float
    mu: float
    Q: np.ndarray
    orientation: str
    threshold: float
    violating_state: np.ndarray | None = None
    violating_eigenvalue: float | None = None
    extra: dict = field(default_factory=dict)

    def __bool__(self):
        return self.positive


def slemma_margin(m: QubitMap):
    L = m.ptm
    F = L.T @ J4 @ L
    res = mu_search(F, J4)
    # ||F||_2 <= ||L||_2^2; the latter stays meaningful when F vanishes
    scale = max(np.linalg.norm(L, 2) ** 2, 1e-300)
    return res, F, scale


def orientation(m: QubitMap, tol=POSITIVITY_TOL) -> str:
    col = m.ptm[:, 0]
    size = max(np.linalg.norm(m.ptm), 1e-300)
    if np.linalg.norm(col) <= tol * size:
        return "degenerate"
    return "positive" if col[0] > 0 else "negative"


def is_positive(m: QubitMap, tol=POSITIVITY_TOL) -> PositivityResult:
    """Decide ``Phi(PSD) subset PSD`` with an S-lemma certificate or a violating pure state."""
    L = m.ptm
    if not np.any(L):
        return PositivityResult(True, 0.0, 0.0, np.zeros((4, 4)), "zero", 0.0)
    res, F, scale = slemma_margin(m)
    threshold = tol * scale
    orient = orientation(m, tol)
    feasible = res.g_star >= -threshold
    if feasible and orient == "positive":
        return PositivityResult(True, res.g_star, res.mu_star, res.Q, orient, threshold)
    if orient == "degenerate":
        # Phi(|n><n|) = -Phi(|-n><-n|) when Phi(Id) = 0: either some axis
        # state has an indefinite image or the map vanishes on a spanning set
        dirs = np.array([state_bloch_direction(v) for v in AXIS_STATES.values()])
        vals = pure_image_min_eig(m, dirs)
        k = int(np.argmin(vals))
        if vals[k] >= -tol * np.sqrt(scale):
            return PositivityResult(True, res.g_star, res.mu_star, res.Q, "zero", threshold)
        return PositivityResult(
            False, res.g_star, res.mu_star, res.Q, orient, threshold,
            violating_state=list(AXIS_STATES.values())[k], violating_eigenvalue=float(vals[k]),
        )

    seeds = []
    if not feasible:
        # S-lemma witness x: q(x) > 0 >= q(Lx); an eigenvector of the state
        # rho_x is a pure state with an indefinite image
        from .slemma import counterexample_at, pencil_walk

        tau, *_ = pencil_walk(F, -J4, tol=0.0)
        x, _ = counterexample_at(F, -J4, tau)
        if x[0] < 0:
            x = -x
        rho = 0.5 * np.array([[x[0] + x[3], x[1] - 1j * x[2]], [x[1] + 1j * x[2], x[0] - x[3]]])
        _, V = np.linalg.eigh(rho)
        seeds = [state_bloch_direction(V[:, k]) for k in range(2)]
    n, val = worst_pure_state(m, seeds)
    state = bloch_direction_state(n)
    return PositivityResult(
        False, res.g_star, res.mu_star, res.Q, orient, threshold,
        violating_state=state, violating_eigenvalue=val,
    )


@dataclass(frozen=True)
class InteriorReport:
    interior: bool
    g_star: float
    relative_margin: float
    sample_min: float
    sample_agrees: bool
    boundary_band: bool


def interior_report(m: QubitMap, tol_strict=TOL_STRICT, samples=2000) -> InteriorReport:
    """Strict S-lemma feasibility, cross-checked against a pure-state sample."""
    res, F, scale = slemma_margin(m)
    rel = res.g_star / scale
    interior = rel > tol_strict and orientation(m) == "positive"
    smin = float(np.min(pure_image_min_eig(m, fibonacci_sphere(samples))))
    size = max(m.ptm[0, 0], 1e-300)
    sample_interior = smin > tol_strict * size
    band = abs(rel) <= tol_strict
    return InteriorReport(interior, res.g_star, rel, smin, sample_interior == interior or band, band)


def is_interior(m: QubitMap, tol_strict=TOL_STRICT) -> bool:
    """``True`` iff ``Phi`` maps every nonzero PSD matrix to a positive definite one."""
    res, F, scale = slemma_margin(m)
    return bool(res.g_star / scale > tol_strict and orientation(m) == "positive")


@dataclass(frozen=True)
class PropertyReport:
    positive: PositivityResult
    interior: bool
    interior_margin: float
    cp: bool
    cp_margin: float
    ccp: bool
    ccp_margin: float
    unital: bool
    trace_preserving: bool
    bistochastic: bool
    unital_residual: float
    tp_residual: float


def is_cp(m: QubitMap, tol=PROPERTY_TOL):
    C = choi(m)
    lm = lambda_min(C)
    return bool(lm >= -tol * (1.0 + np.linalg.norm(C))), lm


def is_ccp(m: QubitMap, tol=PROPERTY_TOL):
    return is_cp(compose(m, transpose_map()), tol)


def property_report(m: QubitMap, tol=PROPERTY_TOL) -> PropertyReport:
    pos = is_positive(m)
    res, F, scale = slemma_margin(m)
    interior = is_interior(m)
    cp, cpm = is_cp(m, tol)
    ccp, ccpm = is_ccp(m, tol)
    e0 = np.array([1.0, 0, 0, 0])
    ur = float(np.max(np.abs(m.ptm[:, 0] - e0)))
    tr = float(np.max(np.abs(m.ptm[0, :] - e0)))
    unital = ur <= tol
    tp = tr <= tol
    return PropertyReport(
        pos, interior, res.g_star / scale, cp, cpm, ccp, ccpm, unital, tp, unital and tp, ur, tr
    )


def is_unital(m: QubitMap, tol=PROPERTY_TOL) -> bool:
    return bool(np.max(np.abs(m.ptm[:, 0] - [1, 0, 0, 0])) <= tol)


def is_trace_preserving(m: QubitMap, tol=PROPERTY_TOL) -> bool:
    return is_unital(adjoint(m), tol)


def is_bistochastic(m: QubitMap, tol=PROPERTY_TOL) -> bool:
    return is_unital(m, tol) and is_trace_preserving(m, tol)
