"""Identity checks shared by the command line and the acceptance tests.

Each check returns ``CheckResult`` rows: a name, the measured value, the
threshold and whether the value passes (``value <= threshold`` for residuals,
``value >= threshold`` for orders and constants).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import FiberProfile, ThinGrid, build_profile, dlog_area
from .lift import (
    area_rate_check,
    boundary_lift,
    flow_area_check,
    lift_field,
    lifted_continuity_residual,
    solve_fiber_neumann,
)
from .tensors import contraction_identity
from .thermo import PressureLaw, Renormalization, coercivity_scan, entropy_integrand, renorm_H


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    threshold: float
    lower_bound: bool = False

    @property
    def ok(self) -> bool:
        if not math.isfinite(self.value):
            return False
        return self.value >= self.threshold if self.lower_bound else self.value <= self.threshold

    def line(self) -> str:
        rel = ">=" if self.lower_bound else "<="
        return f"{self.name:<44s} {self.value:.3e}  ({rel} {self.threshold:.1e})  {'ok' if self.ok else 'FAIL'}"


def _order(errors: list[float]) -> float:
    e = np.asarray(errors)
    return float(np.min(np.log2(e[:-1] / e[1:])))


def _sampled_divergence_error(profile: FiberProfile, x: float, m: int) -> float:
    """Sup error of the sampled fiber velocity against the closed form."""
    pot = solve_fiber_neumann(profile, x, 1.0, method="sampled", resolution=m)
    return float(np.max(np.abs(pot.velocity_samples - pot.velocity(pot.nodes))))


def _continuity_errors(profile: FiberProfile, epsilon: float, sizes=(32, 64, 128)) -> list[float]:
    """Residual of the lifted continuity equation for a prescribed mass flux.

    The weighted flux ``rho u A`` is 1 on the circle (steady) and
    ``sin^2(pi x)`` on the interval, so the exact density rate is known.
    """
    errs = []
    for n in sizes:
        grid = ThinGrid(profile, epsilon, n, 8)
        x = grid.x
        area = profile.area(x)
        rho = 1.0 + 0.2 * np.cos(2.0 * np.pi * x)
        if profile.periodic:
            flux, rho_t = np.ones_like(x), np.zeros_like(x)
        else:
            flux = np.sin(np.pi * x) ** 2
            rho_t = -np.pi * np.sin(2.0 * np.pi * x) / area
        errs.append(lifted_continuity_residual((rho, flux / (rho * area)), profile, grid, drho_dt=rho_t))
    return errs


def lift_checks(profile: FiberProfile, epsilon: float = 0.1, points: int = 17) -> list[CheckResult]:
    """Residuals of the lift identities for one profile."""
    xs = np.linspace(0.0, 1.0, points) if not profile.periodic else np.arange(points) / points
    div_err = 0.0
    tang = 0.0
    flux_err = 0.0
    rate_err = 0.0
    for x in xs:
        pot = solve_fiber_neumann(profile, x, 1.0)
        div_err = max(div_err, abs(float(pot.divergence()) - float(dlog_area(profile, x))))
        if profile.fiber_dim == 1:
            sides = ("top", "bottom")
        else:
            sides = tuple(np.linspace(0.0, 2.0 * np.pi, 8, endpoint=False))
        for side in sides:
            b, lifted, nu = boundary_lift(profile, x, side, 1.0, epsilon)
            tang = max(tang, abs(float(lifted @ nu)))
            b1, _, _ = boundary_lift(profile, x, side, 1.0, 1.0)
            flux_err = max(flux_err, abs(pot.boundary_flux() - b1))
        if 0.05 < x < 0.95 or profile.periodic:
            coarse, direct = area_rate_check(profile, x, 2e-3)
            fine, _ = area_rate_check(profile, x, 1e-3)
            rate = (4.0 * fine - coarse) / 3.0
            rate_err = max(rate_err, abs(rate - direct) / (1.0 + abs(direct)))
    out = [
        CheckResult("fiber divergence vs d/dx log A", div_err, 1e-10),
        CheckResult("tangency of the boundary lift", tang, 1e-13),
        CheckResult("Neumann flux vs boundary lift", flux_err, 1e-10),
        CheckResult("flow area rate vs boundary integral", rate_err, 1e-8),
    ]
    x0 = 0.2
    t_end = 0.5
    flow = flow_area_check(profile, x0, t_end)
    out.append(CheckResult("flow-transported area vs A", abs(flow.area_via_flow - flow.area_direct), 1e-8))

    grid = ThinGrid(profile, epsilon, 32, 8)
    u = np.sin(2.0 * np.pi * grid.x) + 0.3
    if not profile.periodic:
        u = np.sin(np.pi * grid.x)
    lift = lift_field(profile, grid, u)
    top = grid.wall_normals("top")
    bot = grid.wall_normals("bottom")
    wall_tang = max(
        float(np.max(np.abs(lift.horizontal[:, -1] * top[:, 0] + lift.vertical[:, -1] * top[:, 1]))),
        float(np.max(np.abs(lift.horizontal[:, 0] * bot[:, 0] + lift.vertical[:, 0] * bot[:, 1]))),
    )
    out.append(CheckResult("tangency of the lifted field at wall nodes", wall_tang, 1e-12))

    if profile.fiber_dim == 1:
        errs = [_sampled_divergence_error(profile, 0.3, m) for m in (16, 32, 64)]
        out.append(CheckResult("sampled Neumann velocity error (m=64)", errs[-1], 1e-10))
        cont = _continuity_errors(profile, epsilon)
        out.append(CheckResult("lifted continuity residual order", _order(cont), 1.9, True))
    return out


def thermo_checks(law: PressureLaw | None = None, ambient_dim: int = 2) -> list[CheckResult]:
    law = law or PressureLaw()
    law.require(ambient_dim)
    renorm = Renormalization(law, 1.0)
    rho = np.logspace(-3, 3, 2001)
    h, h1, h2 = renorm_H(renorm, rho)
    ode = float(np.max(np.abs(rho * h1 - h - law.pressure(rho)) / (1.0 + np.abs(law.pressure(rho)))))
    hess = float(np.max(np.abs(h2 - law.dpressure(rho) / rho) / (1.0 + np.abs(h2))))
    rng = np.random.default_rng(1)
    n = 100_000
    rr = rng.uniform(0.0, 5.0, n)
    r = rng.uniform(0.05, 5.0, n)
    uu = rng.normal(size=(n, 2))
    U = rng.normal(size=(n, 2))
    dens = entropy_integrand(renorm, rr, uu, r, U)
    const = coercivity_scan(renorm, (0.5, 2.0), (0.25, 4.0))
    return [
        CheckResult("renormalization ODE residual", ode, 1e-11),
        CheckResult("second derivative vs p'/rho", hess, 1e-12),
        CheckResult("most negative entropy integrand", max(0.0, -float(np.min(dens))), 1e-14),
        CheckResult("coercivity C1", const.c1, 0.0, True),
        CheckResult("coercivity C3", const.c3, 0.0, True),
        CheckResult("coercivity C2 (upper bracket, reported)", const.c2, math.inf),
    ]


def stress_checks(samples: int = 10_000, seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    for N in (2, 3):
        G = rng.normal(size=(samples, N, N))
        err = 0.0
        for mu, eta in rng.uniform(0.0, 2.0, size=(8, 2)):
            lhs, rhs = contraction_identity(G, mu, eta, N)
            err = max(err, float(np.max(np.abs(lhs - rhs) / (1.0 + np.abs(lhs)))))
        out.append(CheckResult(f"stress contraction identity N={N}", err, 1e-12))
    return out


def default_lift_profiles() -> dict[str, FiberProfile]:
    return {
        "cosine": build_profile({"base": "circle", "area": "cosine", "mean": 1.5, "amplitude": 0.5}),
        "affine": build_profile({"base": "interval", "area": "affine", "a0": 1.0, "a1": 0.5}),
    }
