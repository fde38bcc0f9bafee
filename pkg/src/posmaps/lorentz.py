"""Lorentz cone geometry and the PSD(C^2) <-> L_4 identification."""

from __future__ import annotations

from enum import Enum

import numpy as np

from .qmap import bloch, from_bloch


class ConeMembership(str, Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"
    NEGATIVE_CONE = "negative_cone"


def minkowski_j(m: int) -> np.ndarray:
    """The form matrix ``diag(1, -1, ..., -1)`` of size ``m``."""
    if m < 2:
        raise ValueError(f"Lorentz cone needs m >= 2, got {m}")
    d = -np.ones(m)
    d[0] = 1.0
    return np.diag(d)


def q_form(x) -> float:
    """``x_0^2 - sum_{k>=1} x_k^2``."""
    x = np.asarray(x, dtype=float)
    return float(x[0] ** 2 - np.dot(x[1:], x[1:]))


def in_cone(x, tol: float = 1e-10) -> ConeMembership:
    """Classify ``x`` against L_m with a tolerance relative to ``|x|^2``."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    x = np.asarray(x, dtype=float)
    q = q_form(x)
    n2 = float(np.dot(x, x))
    band = tol * n2
    if abs(q) <= band:
        if x[0] >= -tol:
            return ConeMembership.BOUNDARY
        return ConeMembership.NEGATIVE_CONE
    if q > band:
        return ConeMembership.INTERIOR if x[0] > 0 else ConeMembership.NEGATIVE_CONE
    return ConeMembership.OUTSIDE


def herm_to_lorentz(rho) -> np.ndarray:
    """Coordinates ``x_a = tr(sigma_a rho)`` of a 2x2 Hermitian matrix."""
    x = bloch(rho)
    return np.real(x).astype(float)


def lorentz_to_herm(x) -> np.ndarray:
    """Inverse of :func:`herm_to_lorentz`."""
    return from_bloch(np.asarray(x, dtype=float))
