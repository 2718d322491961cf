"""Sine (particle-in-a-box) discrete variable representation.

The grid excludes both box endpoints, so Dirichlet boundary conditions are
built in. Derivative matrices are obtained by transforming the exact
sine-basis operators to the grid representation, which keeps the second
derivative spectrally accurate.
"""
from __future__ import annotations

import numpy as np


def grid_points(r_min: float, r_max: float, n: int) -> tuple[np.ndarray, float]:
    """Interior DVR points and spacing for the box [r_min, r_max]."""
    if r_max <= r_min:
        raise ValueError("r_max must exceed r_min")
    if n < 2:
        raise ValueError("need at least 2 grid points")
    dr = (r_max - r_min) / (n + 1)
    r = r_min + dr * np.arange(1, n + 1)
    return r, dr


def _fbr_to_dvr(n: int) -> np.ndarray:
    # orthogonal (and symmetric) sine transform between basis and grid
    j = np.arange(1, n + 1)
    return np.sqrt(2.0 / (n + 1)) * np.sin(np.outer(j, j) * np.pi / (n + 1))


def second_derivative(n: int, dr: float) -> np.ndarray:
    """Exact sine-DVR second-derivative matrix (negative definite)."""
    box = (n + 1) * dr
    k = np.arange(1, n + 1) * np.pi / box
    u = _fbr_to_dvr(n)
    return (u * -(k**2)) @ u


def first_derivative(n: int, dr: float) -> np.ndarray:
    """Sine-DVR first-derivative matrix (antisymmetric).

    Basis matrix elements <k|d/dR|k'> vanish unless k + k' is odd, where
    they equal 4 k k' / (box (k^2 - k'^2)).
    """
    box = (n + 1) * dr
    k = np.arange(1, n + 1)
    kk = np.subtract.outer(k**2, k**2).astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = 4.0 * np.outer(k, k) / (box * kk)
    a[(k[:, None] + k[None, :]) % 2 == 0] = 0.0
    u = _fbr_to_dvr(n)
    return u @ a @ u


def kinetic(n: int, dr: float, mass: float) -> np.ndarray:
    """Radial kinetic energy matrix -hbar^2/(2M) d^2/dR^2 on the DVR grid."""
    return -0.5 / mass * second_derivative(n, dr)
