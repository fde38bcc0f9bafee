"""Linear maps on 2x2 Hermitian matrices.

A map is stored through its Pauli-transfer matrix (PTM)
``L[a, b] = 1/2 tr(sigma_a Phi(sigma_b))`` with ``sigma_0 = Id``.  In Bloch
coordinates ``x_a = tr(sigma_a rho)`` the map acts as ``x' = L x``, and
``q(x) = x_0^2 - |x_vec|^2 = 4 det(rho)``, so the PTM is at the same time the
matrix of the map acting on the Lorentz cone L_4.

Random generators use ``numpy.random.default_rng(seed)`` (PCG64).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInput, ZeroMatrix

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = np.stack([I2, SX, SY, SZ])

TRANSPOSE_PTM = np.diag([1.0, 1.0, -1.0, 1.0])
# Bloch image of the transpose: the reflection y -> -y
REFLECTION = np.diag([1.0, -1.0, 1.0])


@dataclass(frozen=True, eq=False)
class QubitMap:
    """Linear map on M_2^sa given by its 4x4 real Pauli-transfer matrix."""

    ptm: np.ndarray = field()

    def __post_init__(self):
        L = np.array(self.ptm, dtype=float)
        if L.shape != (4, 4):
            raise ValueError(f"PTM must be 4x4, got {L.shape}")
        L.setflags(write=False)
        object.__setattr__(self, "ptm", L)

    def __call__(self, rho):
        return apply(self, rho)

    def __add__(self, other):
        return QubitMap(self.ptm + other.ptm)

    def __sub__(self, other):
        return QubitMap(self.ptm - other.ptm)

    def __mul__(self, c):
        return QubitMap(c * self.ptm)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return compose(self, other)

    @property
    def rblock(self):
        """Lower-right 3x3 block: the action on traceless Bloch vectors."""
        return self.ptm[1:, 1:]


def bloch(rho) -> np.ndarray:
    """Bloch coordinates ``x_a = tr(sigma_a rho)`` (complex for non-Hermitian input)."""
    rho = np.asarray(rho, dtype=complex)
    x = np.einsum("aij,ji->a", PAULI, rho)
    if np.allclose(x.imag, 0.0, atol=0.0):
        return x.real
    return x


def from_bloch(x) -> np.ndarray:
    """Inverse of :func:`bloch`: ``rho = 1/2 sum_a x_a sigma_a``."""
    x = np.asarray(x)
    return 0.5 * np.einsum("a,aij->ij", x, PAULI)


def _ptm_of_conjugation(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    images = np.einsum("ij,bjk,lk->bil", M, PAULI, M.conj())
    return 0.5 * np.einsum("aij,bji->ab", PAULI, images).real


def from_kraus(kraus=(), co_kraus=()) -> QubitMap:
    """PTM of ``rho -> sum_j A_j rho A_j^+ + sum_k B_k rho^T B_k^+``."""
    kraus = list(kraus)
    co_kraus = list(co_kraus)
    if not kraus and not co_kraus:
        raise EmptyInput("at least one Kraus or co-Kraus operator is required")
    L = np.zeros((4, 4))
    for A in kraus:
        L += _ptm_of_conjugation(A)
    for B in co_kraus:
        L += _ptm_of_conjugation(B) @ TRANSPOSE_PTM
    return QubitMap(L)


def apply(m: QubitMap, rho) -> np.ndarray:
    """Image ``Phi(rho)``; extends complex-linearly to non-Hermitian input."""
    return from_bloch(m.ptm @ bloch(rho))


def adjoint(m: QubitMap) -> QubitMap:
    # the normalized Pauli basis is Hilbert-Schmidt orthonormal
    return QubitMap(m.ptm.T)


def compose(m2: QubitMap, m1: QubitMap) -> QubitMap:
    """``m2 o m1`` (apply ``m1`` first)."""
    return QubitMap(m2.ptm @ m1.ptm)


def identity_map() -> QubitMap:
    return QubitMap(np.eye(4))


def transpose_map() -> QubitMap:
    return QubitMap(TRANSPOSE_PTM)


def depolarizing_map() -> QubitMap:
    """Completely depolarizing map ``rho -> tr(rho) Id/2``."""
    return QubitMap(np.diag([1.0, 0.0, 0.0, 0.0]))


def conjugation_map(M) -> QubitMap:
    """``rho -> M rho M^+``."""
    M = np.asarray(M, dtype=complex)
    if M.shape != (2, 2):
        raise ValueError(f"conjugation needs a 2x2 matrix, got {M.shape}")
    if not np.any(M):
        raise ZeroMatrix("conjugation by the zero matrix")
    return QubitMap(_ptm_of_conjugation(M))


def special_map(kind: str, M=None) -> QubitMap:
    """Named maps: ``identity``, ``transpose``, ``depolarizing``, ``conjugation``."""
    if kind == "identity":
        return identity_map()
    if kind == "transpose":
        return transpose_map()
    if kind == "depolarizing":
        return depolarizing_map()
    if kind == "conjugation":
        if M is None:
            raise ValueError("conjugation requires a matrix")
        return conjugation_map(M)
    raise ValueError(f"unknown special map {kind!r}")


def matrix_units():
    units = []
    for i in range(2):
        for j in range(2):
            E = np.zeros((2, 2), dtype=complex)
            E[i, j] = 1.0
            units.append((i, j, E))
    return units


def choi(m: QubitMap) -> np.ndarray:
    """Choi matrix ``C = sum_ij E_ij (x) Phi(E_ij)`` (system factor first)."""
    C = np.zeros((4, 4), dtype=complex)
    for i, j, E in matrix_units():
        C += np.kron(E, apply(m, E))
    return 0.5 * (C + C.conj().T)


# ---------------------------------------------------------------- random maps

def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_kraus(rng, count=None):
    if count is None:
        count = int(rng.integers(1, 5))
    return [random_complex(rng, (2, 2)) for _ in range(count)]


def _trace_normalized(m: QubitMap) -> QubitMap:
    return QubitMap(m.ptm / m.ptm[0, 0])


def random_cp(rng) -> QubitMap:
    return _trace_normalized(from_kraus(random_kraus(rng)))


def random_ccp(rng) -> QubitMap:
    return _trace_normalized(from_kraus(co_kraus=random_kraus(rng)))


def random_decomposable(rng) -> QubitMap:
    """Random CP + co-CP sum normalized so that ``L_00 = 1``."""
    w = rng.uniform()
    return _trace_normalized(w * random_cp(rng) + (1.0 - w) * random_ccp(rng))


def random_unitary(rng) -> np.ndarray:
    """Haar-random 2x2 unitary (QR of a complex Gaussian with phase fix)."""
    Z = random_complex(rng, (2, 2)) / np.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_su2(rng) -> np.ndarray:
    U = random_unitary(rng)
    return U / np.sqrt(np.linalg.det(U))


def random_boundary(rng) -> QubitMap:
    """A positive map on the boundary of the cone of positive maps.

    Each variant sends some pure state to a rank-one matrix: a single
    conjugation (possibly followed by the transpose), a two-term CP or co-CP
    map (some pure state is an eigenvector of ``A_2^{-1} A_1``), or a mixture
    of two unitary conjugations.
    """
    variant = int(rng.integers(0, 5))
    if variant == 0:
        m = conjugation_map(random_complex(rng, (2, 2)))
    elif variant == 1:
        m = from_kraus(co_kraus=[random_complex(rng, (2, 2))])
    elif variant == 2:
        m = from_kraus(random_kraus(rng, 2))
    elif variant == 3:
        m = from_kraus(co_kraus=random_kraus(rng, 2))
    else:
        p = rng.uniform(0.1, 0.9)
        U1, U2 = random_unitary(rng), random_unitary(rng)
        m = from_kraus([np.sqrt(p) * U1, np.sqrt(1 - p) * U2])
    return _trace_normalized(m)


def random_map(seed: int, kind: str = "interior", t: float = 0.3) -> QubitMap:
    """Deterministic random map of the requested kind.

    Kinds: ``interior`` (``(1-t) Psi + t Omega`` with ``Psi`` a random CP +
    co-CP map), ``cp``, ``ccp``, ``boundary`` and ``nonpositive`` (rejection
    sampled until the positivity test fails).
    """
    rng = np.random.default_rng(seed)
    if kind == "interior":
        if not 0.0 < t <= 1.0:
            raise ValueError(f"interior mixing weight must lie in (0, 1], got {t}")
        if t == 1.0:
            return depolarizing_map()
        psi = random_decomposable(rng)
        return QubitMap((1.0 - t) * psi.ptm + t * depolarizing_map().ptm)
    if kind == "cp":
        return random_cp(rng)
    if kind == "ccp":
        return random_ccp(rng)
    if kind == "boundary":
        return random_boundary(rng)
    if kind == "nonpositive":
        from .positivity import is_positive

        while True:
            L = rng.standard_normal((4, 4)) * 0.6
            L[0, 0] = 1.0 + abs(L[0, 0])
            m = QubitMap(L)
            if not is_positive(m).positive:
                return m
    raise ValueError(f"unknown random map kind {kind!r}")
