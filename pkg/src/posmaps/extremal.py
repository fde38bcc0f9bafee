"""Extreme rays of the cone of Lorentz-cone preserving maps.

A map ``L`` preserving ``L_m`` satisfies ``L' J L = mu J + Q`` with
``mu >= 0`` and ``Q`` PSD (S-lemma with ``G = J``).  If ``Q = 0`` the map is a
scaled Lorentz transformation (an automorphism); rank-one maps ``|u><v|`` are
extreme exactly when ``u`` and ``v`` are boundary rays.  In every other case
an explicit rank-one ``Delta`` with ``L +- Delta`` still cone preserving is
constructed, witnessing that the ray of ``L`` is not extreme.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ExtractionFailure, NotAutomorphism, PerturbationFailure, QZero, RankDeficientInput
from .lorentz import minkowski_j, q_form
from .numkit import lambda_min, sym_eig
from .qmap import QubitMap, choi, compose, conjugation_map, transpose_map
from .slemma import mu_search

RANK_TOL = 1e-9
CONE_TOL = 1e-10
AUTOMORPHISM_TOL = 1e-9
BOUNDARY_TOL = 1e-9
EPS_ABORT = 1e-12


@dataclass(frozen=True)
class ConeTest:
    preserves: bool
    g_star: float
    mu: float
    Q: np.ndarray
    orientation: str


def _as_matrix(L):
    if isinstance(L, QubitMap):
        return L.ptm
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError(f"expected a square matrix, got {L.shape}")
    return L


def preserves_cone(L, tol=CONE_TOL) -> ConeTest:
    """Whether ``L`` maps ``L_m`` into itself.

    The S-lemma establishes ``L(L_m U -L_m) subset L_m U -L_m``; the image of
    the interior point ``e_0`` then fixes the sign, which excludes ``-P``.
    """
    L = _as_matrix(L)
    m = L.shape[0]
    J = minkowski_j(m)
    F = L.T @ J @ L
    res = mu_search(F, J)
    scale = max(np.linalg.norm(L, 2) ** 2, 1e-300)
    col = L[:, 0]
    if not np.any(L):
        return ConeTest(True, 0.0, 0.0, res.Q, "zero")
    if np.linalg.norm(col) <= tol * np.linalg.norm(L):
        orient = "degenerate"
    else:
        orient = "positive" if col[0] > 0 else "negative"
    ok = res.g_star >= -tol * scale and orient == "positive"
    return ConeTest(bool(ok), res.g_star, res.mu_star, res.Q, orient)


@dataclass(frozen=True)
class ExtremalVerdict:
    """``kind`` is one of ``automorphism``, ``rank_one_extreme``, ``not_extreme``,
    ``not_in_cone``.  Only the fields relevant to the kind are set."""

    kind: str
    mu: float | None = None
    u: np.ndarray | None = None
    v: np.ndarray | None = None
    delta: np.ndarray | None = None
    eps: float | None = None
    rank: int | None = None
    delta_kind: str | None = None


def numerical_rank(L, rel=RANK_TOL) -> int:
    s = np.linalg.svd(L, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > rel * s[0]))


def on_boundary(x, tol=BOUNDARY_TOL) -> bool:
    x = np.asarray(x, dtype=float)
    return abs(q_form(x)) <= tol * float(x @ x) and x[0] > 0


def _transverse(x):
    """A vector not proportional to ``x`` (first spatial axis orthogonal to it)."""
    m = len(x)
    for k in range(1, m):
        w = np.zeros(m)
        w[k] = 1.0
        w = w - (w @ x) / (x @ x) * x
        if np.linalg.norm(w) > 1e-3:
            return w / np.linalg.norm(w)
    w = np.zeros(m)
    w[0] = 1.0
    return w


def _line_search(L, direction, eps0):
    eps = eps0
    while eps >= EPS_ABORT:
        if preserves_cone(L + eps * direction).preserves and preserves_cone(L - eps * direction).preserves:
            return eps
        eps *= 0.5
    raise PerturbationFailure("no verified perturbation above the abort threshold")


def _rank_one_factors(L):
    U, s, Vt = np.linalg.svd(L)
    u = s[0] * U[:, 0]
    v = Vt[0].copy()
    if u[0] < 0:
        u, v = -u, -v
    return u, v


def classify(L) -> ExtremalVerdict:
    """Automorphism / rank-one extreme / not extreme (with a witness ``Delta``)."""
    L = _as_matrix(L)
    test = preserves_cone(L)
    if not test.preserves:
        return ExtremalVerdict("not_in_cone")
    rank = numerical_rank(L)
    if rank == 0:
        return ExtremalVerdict("not_extreme", rank=0)
    if rank == 1:
        u, v = _rank_one_factors(L)
        if on_boundary(u) and on_boundary(v):
            return ExtremalVerdict("rank_one_extreme", u=u, v=v, rank=1)
        # an interior factor splits: (u +- eps w) v' stays in the cone
        if not on_boundary(u):
            D = np.outer(_transverse(u), v)
        else:
            D = np.outer(u, _transverse(v))
        scale = np.linalg.norm(L) / np.linalg.norm(D)
        eps = _line_search(L, D, 0.5 * scale)
        return ExtremalVerdict("not_extreme", delta=eps * D, eps=eps, u=u, v=v, rank=1,
                               delta_kind="rank_one_split")
    J = minkowski_j(L.shape[0])
    F = L.T @ J @ L
    if np.linalg.norm(test.Q) <= AUTOMORPHISM_TOL * np.linalg.norm(L) ** 2 and test.mu > 0:
        # least-squares projection of L'JL onto span(J)
        mu = float(np.sum(F * J) / np.sum(J * J))
        return ExtremalVerdict("automorphism", mu=mu, rank=rank)
    delta, eps, info = build_perturbation(L, test.mu, test.Q)
    return ExtremalVerdict("not_extreme", mu=test.mu, u=info["u"], v=info["v"], delta=delta,
                           eps=eps, rank=rank, delta_kind=f"delta={info['delta_flag']}")


def build_perturbation(L, mu, Q):
    """Rank-one ``Delta = eps |u><v|`` with ``L +- Delta`` cone preserving.

    ``v`` is the top eigenpair of ``Q`` scaled so that ``Q - |v><v|`` stays PSD;
    ``u`` solves ``L' J u = delta v`` with ``delta = 1`` when ``L' J`` is
    invertible and ``delta = 0`` (``u`` in its null space) otherwise.  Then
    ``(L + s|u><v|)' J (L + s|u><v|) = mu J + Q' + (1 + 2 s delta + s^2 u'Ju) |v><v|``,
    so ``eps`` starts inside the window where the last coefficient is
    positive and is halved until both signs pass :func:`preserves_cone`.

    Returns:
        ``(Delta, eps, info)`` with ``info`` holding ``u``, ``v``, ``delta_flag``.

    Raises:
        RankDeficientInput: if ``rank(L) < 2``.
        QZero: if ``Q`` vanishes.
        PerturbationFailure: if no ``eps >= 1e-12`` verifies.
    """
    L = _as_matrix(L)
    Q = 0.5 * (np.asarray(Q, dtype=float) + np.asarray(Q, dtype=float).T)
    if numerical_rank(L) < 2:
        raise RankDeficientInput("the construction needs rank(L) >= 2")
    if np.linalg.norm(Q) <= AUTOMORPHISM_TOL * np.linalg.norm(L) ** 2:
        raise QZero("Q vanishes: the map is a scaled automorphism")
    m = L.shape[0]
    J = minkowski_j(m)
    w, V = sym_eig(Q)
    v = np.sqrt(max(w[-1], 0.0)) * V[:, -1]
    K = L.T @ J
    sK = np.linalg.svd(K, compute_uv=False)
    if sK[-1] > RANK_TOL * sK[0]:
        u = np.linalg.solve(K, v)
        flag = 1
    else:
        u = np.linalg.svd(K)[2][-1]
        flag = 0
    c = float(u @ J @ u)
    # 1 + 2 s flag + s^2 c >= 0 for |s| <= window
    if flag == 1:
        window = 0.5 if c == 0 else (1.0 if c >= 1 else (1 - np.sqrt(1 - c)) / c)
    else:
        window = np.inf if c >= 0 else 1.0 / np.sqrt(-c)
    D = np.outer(u, v)
    scale = np.linalg.norm(L) / np.linalg.norm(D)
    eps0 = min(0.5 * window, 0.5 * scale)
    eps = _line_search(L, D, eps0)
    return eps * D, eps, {"u": u, "v": v, "delta_flag": flag, "uJu": c}


# --------------------------------------------------------- qubit automorphisms

def _vector_from_choi(C, tol=1e-9):
    w, V = np.linalg.eigh(C)
    top = w[-1]
    if top <= 0 or w[-2] > tol * top or w[0] < -tol * top:
        return None
    vec = np.sqrt(top) * V[:, -1]
    # C = sum_ij E_ij (x) M E_ij M^+ has vector entries vec[2i + k] = M[k, i]
    M = vec.reshape(2, 2).T
    k = int(np.argmax(np.abs(M)))
    phase = M.flat[k] / abs(M.flat[k])
    return M / phase


def kadison_extract(m: QubitMap, tol=1e-9):
    """``V`` with ``m = Phi_V`` or ``m = Phi_V o T`` for a qubit automorphism.

    Returns:
        ``(V, is_co)``; ``V`` has its largest-magnitude entry real positive.

    Raises:
        NotAutomorphism: if ``classify`` does not report an automorphism.
        ExtractionFailure: if neither Choi matrix has numerical rank one.
    """
    verdict = classify(m.ptm)
    if verdict.kind != "automorphism":
        raise NotAutomorphism(f"map classified as {verdict.kind}")
    size = max(1.0, np.linalg.norm(m.ptm))
    V = _vector_from_choi(choi(m), tol)
    if V is not None:
        if np.linalg.norm(conjugation_map(V).ptm - m.ptm) <= tol * size:
            return V, False
    V = _vector_from_choi(choi(compose(m, transpose_map())), tol)
    if V is not None:
        rebuilt = compose(conjugation_map(V), transpose_map())
        if np.linalg.norm(rebuilt.ptm - m.ptm) <= tol * size:
            return V, True
    raise ExtractionFailure("neither the Choi matrix nor that of m o T has rank one")


# ---------------------------------------------------------- random generators

def random_rotation(rng, n):
    Z = rng.standard_normal((n, n))
    Qm, R = np.linalg.qr(Z)
    return Qm * np.sign(np.diag(R))


def random_boost(rng, m, max_rapidity=1.5):
    n = rng.standard_normal(m - 1)
    n /= np.linalg.norm(n)
    phi = rng.uniform(0, max_rapidity)
    B = np.eye(m)
    B[0, 0] = np.cosh(phi)
    B[0, 1:] = B[1:, 0] = np.sinh(phi) * n
    B[1:, 1:] += (np.cosh(phi) - 1.0) * np.outer(n, n)
    return B


def random_automorphism(rng, m):
    """Scaled orthochronous Lorentz transformation ``t * R * boost``."""
    R = np.eye(m)
    R[1:, 1:] = random_rotation(rng, m - 1)
    return rng.uniform(0.5, 2.0) * R @ random_boost(rng, m)


def random_boundary_vector(rng, m):
    n = rng.standard_normal(m - 1)
    n /= np.linalg.norm(n)
    return rng.uniform(0.5, 2.0) * np.concatenate([[1.0], n])


def random_rank_one_extreme(rng, m):
    return np.outer(random_boundary_vector(rng, m), random_boundary_vector(rng, m))


def random_strict_mix(rng, m):
    lam = rng.uniform(0.2, 0.8)
    return lam * random_automorphism(rng, m) + (1 - lam) * random_automorphism(rng, m)
