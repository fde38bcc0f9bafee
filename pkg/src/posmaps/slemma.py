"""S-lemma engine: one-constraint quadratic implications and their certificates.

Two formulations are provided.

* :func:`decide` answers "does ``x'Gx >= 0`` imply ``x'Fx >= 0``?" (with a
  Slater point ``xbar``, ``xbar'G xbar > 0``).  Feasibility is decided by
  maximizing the concave function ``g(mu) = lambda_min(F - mu G)`` over
  ``mu >= 0``; a feasible answer ships ``(mu, Q = F - mu G)``.
* :func:`reformulated_decide` answers "do ``{x'Mx >= 0}`` and ``{x'Nx >= 0}``
  cover R^n?" by walking the pencil ``M_t = (1-t) M + t N``.

When the implication fails, the counterexample is read off the bottom
eigenspace of the pencil at its best parameter: on that eigenspace the two
quadratic forms can be balanced, and the balanced unit vector violates both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SlaterViolation
from .numkit import as_sym, lambda_min

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_TOL = 1e-9


def golden_max(fn, lo, hi, rel_width=1e-12):
    """Maximize a unimodal function on ``[lo, hi]``; returns ``(x, fn(x))``."""
    a, b = float(lo), float(hi)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    width_goal = rel_width * max(1.0, abs(hi))
    while b - a > width_goal:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    best = (x, fn(x))
    for end in (lo, hi):
        fe = fn(end)
        if fe >= best[1]:
            best = (float(end), fe)
    return best


# ------------------------------------------------------------------ mu search

@dataclass(frozen=True)
class MuSearch:
    mu_star: float
    g_star: float
    Q: np.ndarray


def mu_bracket_cap(F, G):
    nF, nG = np.linalg.norm(F), np.linalg.norm(G)
    return 1e12 * (1.0 + nF / max(nG, 1e-300))


def mu_search(F, G) -> MuSearch:
    """Maximize ``g(mu) = lambda_min(F - mu G)`` over ``mu >= 0``.

    ``g`` is concave, so a doubling bracket followed by golden-section search
    finds the maximizer; ``Q = F - mu_star G``.
    """
    F, G = as_sym(F), as_sym(G)
    if F.shape != G.shape:
        raise ValueError(f"shape mismatch {F.shape} vs {G.shape}")

    def g(mu):
        return lambda_min(F - mu * G)

    cap = mu_bracket_cap(F, G)
    hi = 1.0
    while hi < cap and g(hi) >= g(0.5 * hi):
        hi *= 2.0
    hi = min(hi, cap)
    mu, gval = golden_max(g, 0.0, hi)
    return MuSearch(mu, gval, F - mu * G)


# -------------------------------------------------------------- pencil walk

@dataclass(frozen=True)
class PencilWalkState:
    t: float
    lambda_t: float
    eigenspace: np.ndarray


def _h(x, A, B):
    return max(float(x @ A @ x), float(x @ B @ x))


def _cluster(K, rel=1e-8):
    w, V = np.linalg.eigh(K)
    gap = rel * (1.0 + np.linalg.norm(K))
    k = int(np.sum(w <= w[0] + gap))
    return w[0], V[:, :k]


def _balanced_candidates(W, A, B, grid=16):
    """Unit vectors in ``span(W)`` where ``x'Ax`` and ``x'Bx`` are balanced.

    The eigenspace sphere is connected, so whenever the difference form takes
    both signs on it there is a vector with ``x'Ax == x'Bx``; it is found in
    closed form on the great circle joining the extreme eigenvectors of the
    restricted difference, plus a deterministic grid of great circles.
    """
    D = W.T @ (A - B) @ W
    D = 0.5 * (D + D.T)
    alpha, P = np.linalg.eigh(D)
    cands = [W @ P[:, 0], W @ P[:, -1]]
    a0, a1 = alpha[0], alpha[-1]
    if a0 < 0.0 < a1:
        theta = math.atan(math.sqrt(-a0 / a1))
        cands.append(W @ (math.cos(theta) * P[:, 0] + math.sin(theta) * P[:, -1]))
    k = W.shape[1]
    if k > 1:
        angles = np.linspace(0.0, math.pi, grid, endpoint=False)
        for i in range(k):
            for j in range(i + 1, k):
                for ang in angles:
                    cands.append(W @ (math.cos(ang) * P[:, i] + math.sin(ang) * P[:, j]))
    return [c / np.linalg.norm(c) for c in cands]


def polish(x, A, B, iters=40):
    """Decrease ``max(x'Ax, x'Bx)`` on the unit sphere by projected subgradient steps."""
    x = x / np.linalg.norm(x)
    hx = _h(x, A, B)
    scale = 1.0 + max(np.linalg.norm(A, 2), np.linalg.norm(B, 2))
    step = 0.5 / scale
    for _ in range(iters):
        a, b = float(x @ A @ x), float(x @ B @ x)
        # both forms near-active: move along the averaged gradient
        if abs(a - b) <= 1e-3 * scale * step:
            grad = (A + B) @ x
        elif a > b:
            grad = 2.0 * A @ x
        else:
            grad = 2.0 * B @ x
        grad = grad - (grad @ x) * x
        if np.linalg.norm(grad) == 0.0:
            break
        improved = False
        s = step
        for _ in range(30):
            y = x - s * grad
            y /= np.linalg.norm(y)
            hy = _h(y, A, B)
            if hy < hx:
                x, hx, improved = y, hy, True
                break
            s *= 0.5
        if not improved:
            break
    return x, hx


def multistart_witness(A, B, seed=0, starts=64, iters=200):
    """Minimize ``max(x'Ax, x'Bx)`` over the unit sphere from many starts.

    Best value wins; ties go to the lowest start index.
    """
    rng = np.random.default_rng(seed)
    n = A.shape[0]
    best = None
    for i in range(starts):
        x0 = rng.standard_normal(n)
        x, hx = polish(x0, A, B, iters=iters)
        if best is None or hx < best[1]:
            best = (x, hx)
    return best


def pencil_walk(M, N, tol=DEFAULT_TOL, step=1.0 / 64):
    """Locate the parameter ``tau`` maximizing ``lambda_min(M_t)`` on ``[0, 1]``.

    A grid scan with spacing ``step`` brackets the maximum of the concave
    function ``t -> lambda_min(M_t) + tol*scale(t)``; golden-section search
    refines it.
    """
    M, N = as_sym(M), as_sym(N)
    nM, nN = np.linalg.norm(M), np.linalg.norm(N)

    def lam(t):
        return lambda_min((1.0 - t) * M + t * N)

    def slack(t):
        return tol * ((1.0 - t) * (1.0 + nM) + t * nN)

    def score(t):
        return lam(t) + slack(t)

    n_steps = max(1, int(math.ceil(1.0 / step)))
    grid = np.linspace(0.0, 1.0, n_steps + 1)
    vals = [score(t) for t in grid]
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, n_steps)]
    tau, best = golden_max(score, lo, hi)
    if vals[i] > best:
        tau, best = float(grid[i]), vals[i]
    return tau, best, score, lam, grid, vals


@dataclass(frozen=True)
class ReformulatedOutcome:
    """``kind`` is ``"witness"`` (``t`` with ``M_t`` PSD within tolerance) or
    ``"counterexample"`` (``x`` with ``x'Mx < 0`` and ``x'Nx < 0``)."""

    kind: str
    t: float | None = None
    lambda_t: float | None = None
    x: np.ndarray | None = None
    margin: float = 0.0
    corner: bool = False
    state: PencilWalkState | None = None


def reformulated_decide(M, N, tol=DEFAULT_TOL, step=1.0 / 64, seed=0):
    """Decide whether ``{x'Mx >= 0} U {x'Nx >= 0} = R^n`` via the pencil walk.

    Args:
        M, N: symmetric matrices of equal size.
        tol: relative tolerance on ``lambda_min(M_t)``.
        step: grid spacing of the initial scan over ``t``.
        seed: seed for the multistart fallback of the counterexample search.
    """
    M, N = as_sym(M), as_sym(N)
    if M.shape != N.shape:
        raise ValueError(f"shape mismatch {M.shape} vs {N.shape}")
    tau, best, score, lam, grid, vals = pencil_walk(M, N, tol=tol, step=step)

    if best >= 0.0:
        # first feasible parameter: score is nondecreasing on [0, tau]
        if score(0.0) >= 0.0:
            t_first = 0.0
        else:
            lo, hi = 0.0, tau
            for j, t in enumerate(grid):
                if t >= tau:
                    break
                if vals[j] >= 0.0:
                    hi = float(t)
                    break
                lo = float(t)
            while hi - lo > 1e-15:
                mid = 0.5 * (lo + hi)
                if score(mid) >= 0.0:
                    hi = mid
                else:
                    lo = mid
            t_first = hi
        lt = lam(t_first)
        Mt = (1.0 - t_first) * M + t_first * N
        _, W = _cluster(Mt)
        return ReformulatedOutcome(
            "witness",
            t=t_first,
            lambda_t=lt,
            margin=lt,
            corner=t_first == 1.0,
            state=PencilWalkState(t_first, lt, W),
        )

    x, hx = counterexample_at(M, N, tau, seed=seed)
    lt = lam(tau)
    Mt = (1.0 - tau) * M + tau * N
    _, W = _cluster(Mt)
    return ReformulatedOutcome(
        "counterexample",
        t=tau,
        lambda_t=lt,
        x=x,
        margin=-hx,
        state=PencilWalkState(tau, lt, W),
    )


def counterexample_at(M, N, tau, seed=0):
    """Unit ``x`` minimizing ``max(x'Mx, x'Nx)``, seeded from the pencil at ``tau``."""
    Mt = (1.0 - tau) * M + tau * N
    _, W = _cluster(Mt)
    best = None
    for c in _balanced_candidates(W, M, N):
        hc = _h(c, M, N)
        if best is None or hc < best[1]:
            best = (c, hc)
    x, hx = polish(best[0], M, N)
    if hx >= 0.0:
        xm, hm = multistart_witness(M, N, seed=seed)
        if hm < hx:
            x, hx = xm, hm
    return x, hx


# ------------------------------------------------------------------- decide

@dataclass(frozen=True)
class SLemmaOutcome:
    """Result of :func:`decide`.

    Feasible outcomes carry ``mu`` and ``Q = F - mu G``; infeasible ones carry
    a unit ``witness`` with ``x'Gx > 0 > x'Fx``.  ``margin`` is the raw
    quantity the verdict rests on: ``lambda_min(Q)`` or
    ``min(x'Gx, -x'Fx)``.
    """

    feasible: bool
    g_star: float
    mu: float
    Q: np.ndarray | None = None
    witness: np.ndarray | None = None
    margin: float = 0.0
    threshold: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def verdict(self):
        return "feasible" if self.feasible else "infeasible"


def feasibility_scale(F, G, mu):
    return 1.0 + np.linalg.norm(F) + mu * np.linalg.norm(G)


def decide(F, G, xbar, tol=DEFAULT_TOL, seed=0) -> SLemmaOutcome:
    """Decide ``x'Gx >= 0  =>  x'Fx >= 0`` and certify the answer.

    Raises:
        SlaterViolation: if ``xbar'G xbar <= 0``.
    """
    F, G = as_sym(F), as_sym(G)
    xbar = np.asarray(xbar, dtype=float)
    if float(xbar @ G @ xbar) <= 0.0:
        raise SlaterViolation("Slater point must satisfy xbar' G xbar > 0")
    res = mu_search(F, G)
    threshold = tol * feasibility_scale(F, G, res.mu_star)
    if res.g_star >= -threshold:
        return SLemmaOutcome(
            True, res.g_star, res.mu_star, Q=res.Q, margin=lambda_min(res.Q), threshold=threshold
        )
    # counterexample from the reformulated pencil with M = F, N = -G
    tau, *_ = pencil_walk(F, -G, tol=0.0)
    x, hx = counterexample_at(F, -G, tau, seed=seed)
    margin = min(float(x @ G @ x), -float(x @ F @ x))
    return SLemmaOutcome(
        False, res.g_star, res.mu_star, witness=x, margin=margin, threshold=threshold,
        extra={"tau": tau},
    )


def check_outcome(F, G, outcome: SLemmaOutcome, tol=DEFAULT_TOL):
    """Re-verify an outcome from its certificate alone; returns ``(ok, margin)``."""
    F, G = as_sym(F), as_sym(G)
    if outcome.feasible:
        lm = lambda_min(F - outcome.mu * G)
        return outcome.mu >= 0 and lm >= -tol * feasibility_scale(F, G, outcome.mu), lm
    x = np.asarray(outcome.witness, dtype=float)
    x = x / np.linalg.norm(x)
    margin = min(float(x @ G @ x), -float(x @ F @ x))
    return margin > 0.0, margin
