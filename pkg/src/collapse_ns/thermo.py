"""Gamma-law pressure, its renormalization potential and the relative entropy density."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PressureLaw:
    """``p(rho) = a * rho**gamma``."""

    gamma: float = 2.0
    a: float = 1.0

    def __post_init__(self):
        if self.a <= 0 or self.gamma < 1:
            raise ValueError("need a > 0 and gamma >= 1")

    def admissible(self, ambient_dim: int) -> bool:
        """Whether ``gamma > N / 2`` for an N-dimensional fluid domain."""
        return self.gamma > 0.5 * ambient_dim

    def require(self, ambient_dim: int) -> None:
        if not self.admissible(ambient_dim):
            raise ValueError(
                f"gamma = {self.gamma} must exceed N/2 = {0.5 * ambient_dim}"
            )

    def pressure(self, rho):
        return self.a * np.power(rho, self.gamma)

    def dpressure(self, rho):
        return self.a * self.gamma * np.power(rho, self.gamma - 1.0)

    def sound_speed(self, rho):
        return np.sqrt(self.dpressure(rho))


@dataclass(frozen=True)
class Renormalization:
    """Pressure potential H with ``rho H' - H = p`` normalised by ``H(rho_floor) = 0``."""

    law: PressureLaw
    rho_floor: float = 1.0

    def __post_init__(self):
        if self.rho_floor <= 0:
            raise ValueError("rho_floor must be positive")


def renorm_H(renorm: Renormalization, rho):
    """Return ``(H, H', H'')`` at ``rho > 0``."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise ValueError("renormalization requires rho > 0")
    return _renorm(renorm, rho)


def _renorm(renorm: Renormalization, rho):
    g = renorm.law.gamma
    a = renorm.law.a
    floor = renorm.rho_floor
    if g == 1.0:
        log_ratio = np.log(rho / floor)
        return a * rho * log_ratio, a * (log_ratio + 1.0), a / rho
    fg = floor ** (g - 1.0)
    rg = np.power(rho, g - 1.0)
    h = a * rho * (rg - fg) / (g - 1.0)
    h1 = a * (g * rg - fg) / (g - 1.0)
    h2 = a * g * rg / rho
    return h, h1, h2


def _potential_at_zero_safe(renorm: Renormalization, rho):
    """``H(rho)`` extended continuously to ``rho = 0`` (needed for vacuum points)."""
    rho = np.asarray(rho, dtype=float)
    g = renorm.law.gamma
    if g == 1.0:
        safe = np.where(rho > 0, rho, 1.0)
        return np.where(rho > 0, renorm.law.a * safe * np.log(safe / renorm.rho_floor), 0.0)
    fg = renorm.rho_floor ** (g - 1.0)
    return renorm.law.a * rho * (np.power(rho, g - 1.0) - fg) / (g - 1.0)


def entropy_integrand(renorm: Renormalization, rho, u, r, U):
    """Relative entropy density ``rho|u-U|^2/2 + H(rho) - H'(r)(rho - r) - H(r)``.

    Velocities carry the vector index last; scalar velocities are accepted.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("comparison density must be positive")
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("density must be non-negative")
    w = np.asarray(u, dtype=float) - np.asarray(U, dtype=float)
    w2 = w * w if w.ndim == rho.ndim else np.sum(w * w, axis=-1)
    h_r, h1_r, _ = _renorm(renorm, r)
    return 0.5 * rho * w2 + _potential_at_zero_safe(renorm, rho) - h1_r * (rho - r) - h_r


@dataclass(frozen=True)
class CoercivityConstants:
    c1: float
    c2: float
    c3: float


def coercivity_scan(
    renorm: Renormalization,
    K: tuple[float, float],
    Kprime: tuple[float, float],
    samples: int = 10_000,
    seed: int = 0,
    w_max: float = 2.0,
    rho_max: float | None = None,
) -> CoercivityConstants:
    """Empirical bracketing constants of the relative entropy density.

    ``c1, c2`` bracket the density by ``|u-U|^2 + |rho-r|^2`` for ``rho, r``
    in ``K``; ``c3`` bounds it below by ``1 + rho|u-U|^2 + rho^gamma`` for
    ``r`` in ``K`` and ``rho`` outside ``K'``.
    """
    lo, hi = K
    lop, hip = Kprime
    if not (0 < lop < lo < hi < hip):
        raise ValueError("need 0 < K' lower < K lower < K upper < K' upper")
    rng = np.random.default_rng(seed)
    rho = rng.uniform(lo, hi, samples)
    r = rng.uniform(lo, hi, samples)
    w = rng.uniform(-w_max, w_max, samples)
    # Pure density and pure velocity directions keep the ratios sharp.
    w[: samples // 4] = 0.0
    rho[samples // 4 : samples // 2] = r[samples // 4 : samples // 2]
    dens = entropy_integrand(renorm, rho, w, r, 0.0)
    norm = w * w + (rho - r) ** 2
    ok = norm > 1e-14
    ratio = dens[ok] / norm[ok]
    c1, c2 = float(np.min(ratio)), float(np.max(ratio))

    top = rho_max if rho_max is not None else 10.0 * hip
    r_out = rng.uniform(lo, hi, samples)
    below = rng.uniform(0.0, lop, samples // 2)
    above = np.exp(rng.uniform(np.log(hip), np.log(top), samples - samples // 2))
    rho_out = np.concatenate([below, above])
    rho_out[0] = 0.0
    w_out = rng.uniform(-w_max, w_max, samples)
    dens_out = entropy_integrand(renorm, rho_out, w_out, r_out, 0.0)
    weight = 1.0 + rho_out * w_out**2 + np.power(rho_out, renorm.law.gamma)
    c3 = float(np.min(dens_out / weight))
    if min(c1, c3) <= 0 or not np.isfinite(c2):
        raise ArithmeticError(
            f"coercivity violated on samples: c1={c1:.3e}, c3={c3:.3e}"
        )
    return CoercivityConstants(c1, c2, c3)
