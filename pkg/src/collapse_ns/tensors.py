"""Deformation and viscous stress tensors.

A velocity gradient ``G`` stores ``G[..., i, j] = d_i u^j``; all functions
broadcast over leading axes.
"""

from __future__ import annotations

import numpy as np


def divergence(G):
    return np.trace(G, axis1=-2, axis2=-1)


def deformation(G):
    """Symmetric part of the velocity gradient."""
    G = np.asarray(G, dtype=float)
    return 0.5 * (G + np.swapaxes(G, -1, -2))


def _identity_like(G):
    n = G.shape[-1]
    return np.broadcast_to(np.eye(n), G.shape)


def stress(G, mu: float, eta: float, N: int | None = None):
    """Newtonian stress ``mu (2D - (2/N) div Id) + eta div Id``."""
    G = np.asarray(G, dtype=float)
    N = G.shape[-1] if N is None else N
    div = divergence(G)[..., None, None]
    eye = _identity_like(G)
    return mu * (2.0 * deformation(G) - (2.0 / N) * div * eye) + eta * div * eye


def contract(A, B):
    """Frobenius contraction ``sum_ij A_ij B_ij``."""
    return np.sum(np.asarray(A) * np.asarray(B), axis=(-2, -1))


def contraction_identity(G, mu: float, eta: float, N: int | None = None):
    """Both sides of ``S(G):G = 2 mu |D - div Id / N|^2 + eta div^2``."""
    G = np.asarray(G, dtype=float)
    N = G.shape[-1] if N is None else N
    lhs = contract(stress(G, mu, eta, N), G)
    div = divergence(G)
    traceless = deformation(G) - (div / N)[..., None, None] * _identity_like(G)
    rhs = 2.0 * mu * contract(traceless, traceless) + eta * div * div
    return lhs, rhs
