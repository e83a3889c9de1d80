"""Weighted one-dimensional limit systems on the base.

    d_t (A rho) + d_x (A rho u) = 0
    rho (d_t u + u u_x) + p(rho)_x = viscous force

The viscous force of the Navier-Stokes limit is
``(mu + lam) u_xx + lam (u (log A)')_x`` with ``lam = eta + (N - 2) mu / N``;
the Euler limit has none.  A third model, ``ns_averaged``, carries the
fiber average of the full stress divergence including the wall traction and
is provided as a diagnostic for planar (N = 2) channels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np

from . import kernels
from .geometry import BaseGrid, FiberProfile, d2log_area, dlog_area
from .thermo import PressureLaw

MODELS = ("ns_limit", "euler_limit", "ns_averaged")


class LimitSolverError(RuntimeError):
    """The limit solution left the smooth regime."""


@dataclass(frozen=True)
class LimitConfig:
    mu: float = 0.05
    eta: float = 0.05
    law: PressureLaw = field(default_factory=PressureLaw)
    model: str = "ns_limit"
    ambient_dim: int = 2
    cfl: float = 0.5
    t_end: float = 0.25
    kappa: float = 0.01
    forcing: Callable | None = None  # t -> (f_weighted_density, f_velocity)
    disable_geometric_term: bool = False

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if self.mu < 0 or self.eta < 0:
            raise ValueError("viscosities must be non-negative")
        if not (0.0 < self.cfl <= 0.9):
            raise ValueError("cfl must lie in (0, 0.9]")
        if self.model == "ns_averaged" and self.ambient_dim != 2:
            raise ValueError("the averaged model is derived for planar channels only")

    @property
    def bulk_coefficient(self) -> float:
        """``eta + (N - 2) mu / N``, the coefficient of the geometric term."""
        n = self.ambient_dim
        return self.eta + (n - 2) * self.mu / n

    def force_coefficients(self) -> dict[str, float]:
        """Coefficients of ``u_xx, (u L')_x, L' u_x, u L'^2`` in the viscous force."""
        mu, eta = self.mu, self.eta
        if self.model == "euler_limit":
            return {"c_uxx": 0.0, "c_t": 0.0, "c_lux": 0.0, "c_ul2": 0.0}
        if self.model == "ns_averaged":
            return {"c_uxx": mu + eta, "c_t": eta - mu, "c_lux": 2.0 * mu, "c_ul2": -2.0 * mu}
        lam = self.bulk_coefficient
        c_t = 0.0 if self.disable_geometric_term else lam
        return {"c_uxx": mu + lam, "c_t": c_t, "c_lux": 0.0, "c_ul2": 0.0}


@dataclass
class LimitState:
    grid: BaseGrid
    rho_hat: np.ndarray
    u_hat: np.ndarray
    t: float = 0.0

    def copy(self) -> "LimitState":
        return LimitState(self.grid, self.rho_hat.copy(), self.u_hat.copy(), self.t)


@dataclass(frozen=True)
class ClassicalCertificate:
    Lambda: float
    rho_min: float
    rho_max: float

    def lines(self) -> list[str]:
        return [f"Lambda={self.Lambda:.17g}", f"rho_min={self.rho_min:.17g}", f"rho_max={self.rho_max:.17g}"]


@dataclass
class LimitTrajectory:
    profile: FiberProfile
    config: LimitConfig
    states: list[LimitState]
    certificate: ClassicalCertificate

    def at(self, t: float) -> LimitState:
        for st in self.states:
            if abs(st.t - t) <= 1e-12 * max(1.0, abs(t)):
                return st
        raise KeyError(f"no stored limit state at t={t}")


def initial_state(
    profile: FiberProfile,
    n: int,
    rho0: Callable | float = 1.0,
    u0: Callable | float = 0.0,
) -> LimitState:
    """Sample initial data on a base grid with ``n`` cells."""
    grid = BaseGrid(n, profile.periodic)
    x = grid.x
    rho = np.asarray(rho0(x) if callable(rho0) else np.full_like(x, rho0), dtype=float)
    u = np.asarray(u0(x) if callable(u0) else np.full_like(x, u0), dtype=float)
    u = u.copy()
    if not grid.periodic:
        u[0] = u[-1] = 0.0
    return LimitState(grid, rho.copy(), u, 0.0)


_GEOM_CACHE: dict = {}


def base_geometry(profile: FiberProfile, grid: BaseGrid) -> dict:
    key = (profile, grid)
    geom = _GEOM_CACHE.get(key)
    if geom is None:
        x = grid.x
        geom = {
            "A": profile.area(x),
            "L1": dlog_area(profile, x),
            "L2": d2log_area(profile, x),
            "dx": grid.dx,
            "periodic": grid.periodic,
        }
        if len(_GEOM_CACHE) > 64:
            _GEOM_CACHE.clear()
        _GEOM_CACHE[key] = geom
    return geom


def _params(config: LimitConfig) -> dict:
    out = {"gamma": float(config.law.gamma), "a": float(config.law.a), "kappa": float(config.kappa)}
    out.update(config.force_coefficients())
    return out


def time_derivatives(state: LimitState, profile: FiberProfile, config: LimitConfig, backend=None):
    """Semi-discrete ``(d_t rho_hat, d_t u_hat)`` including forcing."""
    rhs = kernels.limit_rhs if backend is None else backend
    geom = base_geometry(profile, state.grid)
    w = geom["A"] * state.rho_hat
    dw, du = rhs(w, state.u_hat, geom, _params(config))
    if config.forcing is not None:
        fw, fu = config.forcing(state.t)
        dw = dw + fw
        du = du + fu
        if not state.grid.periodic:
            du[0] = du[-1] = 0.0
    return dw / geom["A"], du


def stable_dt(state: LimitState, config: LimitConfig) -> float:
    dx = state.grid.dx
    c = config.law.sound_speed(state.rho_hat)
    dt = dx / float(np.max(np.abs(state.u_hat) + c))
    coef = config.force_coefficients()
    diff = abs(coef["c_uxx"]) + 0.5 * abs(coef["c_t"])
    if diff > 0:
        dt = min(dt, dx * dx * float(np.min(state.rho_hat)) / (2.0 * diff))
    return config.cfl * dt


def _c2_norm(u: np.ndarray, dx: float, periodic: bool) -> float:
    if periodic:
        ux = (np.roll(u, -1) - np.roll(u, 1)) / (2.0 * dx)
        uxx = (np.roll(u, -1) - 2.0 * u + np.roll(u, 1)) / (dx * dx)
    else:
        ux = np.gradient(u, dx, edge_order=2)
        uxx = np.gradient(ux, dx, edge_order=2)
    return float(np.max(np.abs(u)) + np.max(np.abs(ux)) + np.max(np.abs(uxx)))


def _min_gradient(u: np.ndarray, dx: float, periodic: bool) -> float:
    if periodic:
        return float(np.min((np.roll(u, -1) - np.roll(u, 1)) / (2.0 * dx)))
    return float(np.min((u[2:] - u[:-2]) / (2.0 * dx)))


def step(state: LimitState, profile: FiberProfile, config: LimitConfig, dt: float) -> LimitState:
    """One SSP-RK3 step in the variables ``(A rho_hat, u_hat)``."""
    area = base_geometry(profile, state.grid)["A"]
    t = state.t
    w0, u0 = area * state.rho_hat, state.u_hat

    def rates(w, u, tt):
        dr, du = time_derivatives(LimitState(state.grid, w / area, u, tt), profile, config)
        return dr * area, du

    dw, du = rates(w0, u0, t)
    w1, u1 = w0 + dt * dw, u0 + dt * du
    dw, du = rates(w1, u1, t + dt)
    w2 = 0.75 * w0 + 0.25 * (w1 + dt * dw)
    u2 = 0.75 * u0 + 0.25 * (u1 + dt * du)
    dw, du = rates(w2, u2, t + 0.5 * dt)
    w3 = (w0 + 2.0 * (w2 + dt * dw)) / 3.0
    u3 = (u0 + 2.0 * (u2 + dt * du)) / 3.0
    if not state.grid.periodic:
        u3[0] = u3[-1] = 0.0
    return LimitState(state.grid, w3 / area, u3, t + dt)


def run_limit(
    initial: LimitState,
    profile: FiberProfile,
    config: LimitConfig,
    sample_times: Iterable[float] | None = None,
) -> LimitTrajectory:
    """Integrate to every sample time (hit exactly) and certify smoothness."""
    times = sorted(set(float(t) for t in sample_times)) if sample_times is not None else [config.t_end]
    state = initial.copy()
    grid = state.grid
    horizon = max(times[-1], 1e-12)
    lam = _c2_norm(state.u_hat, grid.dx, grid.periodic)
    rmin, rmax = float(np.min(state.rho_hat)), float(np.max(state.rho_hat))
    states: list[LimitState] = []

    def observe(st: LimitState):
        nonlocal lam, rmin, rmax
        if not (np.all(np.isfinite(st.rho_hat)) and np.all(np.isfinite(st.u_hat))):
            raise LimitSolverError(f"non-finite limit state at t={st.t:.6g}")
        lo = float(np.min(st.rho_hat))
        if lo <= 0:
            raise LimitSolverError(f"limit density lost positivity at t={st.t:.6g}")
        rmin = min(rmin, lo)
        rmax = max(rmax, float(np.max(st.rho_hat)))
        lam = max(lam, _c2_norm(st.u_hat, grid.dx, grid.periodic))
        if not math.isfinite(lam):
            raise LimitSolverError("C2 norm of the limit velocity is not finite")
        if config.model == "euler_limit" and _min_gradient(st.u_hat, grid.dx, grid.periodic) < -1.0 / horizon:
            raise LimitSolverError(f"velocity gradient steepening towards a shock at t={st.t:.6g}")

    observe(state)
    for target in times:
        if target < state.t - 1e-12:
            raise ValueError("sample times must not precede the initial time")
        while target - state.t > 1e-13 * max(1.0, target):
            dt = min(stable_dt(state, config), target - state.t)
            state = step(state, profile, config, dt)
            observe(state)
        state = replace(state, t=target)
        states.append(state.copy())
    return LimitTrajectory(profile, config, states, ClassicalCertificate(lam, rmin, rmax))


def weighted_mass(trajectory: LimitTrajectory) -> np.ndarray:
    """Trapezoid quadrature of ``A rho_hat`` for each stored state."""
    out = []
    for st in trajectory.states:
        area = base_geometry(trajectory.profile, st.grid)["A"]
        out.append(float(np.sum(st.grid.weights * area * st.rho_hat)))
    return np.asarray(out)


# ---------------------------------------------------------------------------
# Manufactured solutions


def manufactured_limit(profile: FiberProfile, config: LimitConfig, amplitude: float = 1.0):
    """Exact ``(rho_hat, u_hat)`` and forcing for the chosen limit model (periodic base)."""
    import sympy as sp

    from .thin_solver import _sympy_area

    x, t = sp.symbols("x t", real=True)
    area = _sympy_area(profile, x)
    L1 = sp.diff(sp.log(area), x)
    rho = 1 + amplitude * sp.Rational(1, 10) * sp.sin(2 * sp.pi * x - t)
    u = amplitude * (sp.Rational(1, 5) + sp.Rational(1, 10) * sp.cos(2 * sp.pi * x + 2 * t))
    c = config.force_coefficients()
    force = (
        c["c_uxx"] * sp.diff(u, x, 2)
        + c["c_t"] * sp.diff(u * L1, x)
        + c["c_lux"] * L1 * sp.diff(u, x)
        + c["c_ul2"] * u * L1**2
    )
    p = config.law.a * rho ** sp.Float(config.law.gamma)
    f_w = sp.diff(area * rho, t) + sp.diff(area * rho * u, x)
    f_u = sp.diff(u, t) + u * sp.diff(u, x) + sp.diff(p, x) / rho - force / rho
    fns = [sp.lambdify((x, t), e, modules="numpy", cse=True) for e in (rho, u, f_w, f_u)]
    return fns


def mms_verify_limit(
    profile: FiberProfile,
    config: LimitConfig,
    resolutions: Iterable[int] = (64, 128, 256),
    t_end: float = 0.1,
    min_order: float = 1.5,
):
    """Refinement study of the limit solver; returns rows ``(n, err_rho, err_u, ord_rho, ord_u)``."""
    if not profile.periodic:
        raise ValueError("the limit manufactured solution needs a periodic base")
    rho_e, u_e, f_w, f_u = manufactured_limit(profile, config)
    rows = []
    for n in resolutions:
        grid = BaseGrid(n, True)
        x = grid.x
        ones = np.ones_like(x)
        cfg = replace(config, forcing=lambda tt: (f_w(x, tt) * ones, f_u(x, tt) * ones), t_end=t_end)
        init = LimitState(grid, rho_e(x, 0.0) * ones, u_e(x, 0.0) * ones, 0.0)
        final = run_limit(init, profile, cfg, [t_end]).states[-1]
        er = math.sqrt(float(np.mean((final.rho_hat - rho_e(x, t_end)) ** 2)))
        eu = math.sqrt(float(np.mean((final.u_hat - u_e(x, t_end)) ** 2)))
        rows.append([n, er, eu, math.nan, math.nan])
    for prev, cur in zip(rows, rows[1:]):
        ratio = math.log(cur[0] / prev[0])
        cur[3] = math.log(prev[1] / cur[1]) / ratio
        cur[4] = math.log(prev[2] / cur[2]) / ratio
        if min(cur[3], cur[4]) < min_order:
            raise ArithmeticError(f"observed order below {min_order}: {cur[3]:.2f}, {cur[4]:.2f}")
    return [tuple(r) for r in rows]
