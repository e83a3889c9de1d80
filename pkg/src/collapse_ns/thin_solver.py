"""Compressible Navier-Stokes on the mapped thin domain.

Slip walls on the lateral boundary (zero normal velocity, zero tangential
traction) and no-slip end fibers when the base is an interval.  Time stepping
is the three-stage strong-stability-preserving Runge-Kutta scheme with the
boundary projection applied after every stage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator

import numpy as np

from . import kernels
from .geometry import FiberProfile, ThinGrid
from .lift import lift_field
from .thermo import PressureLaw


class SolverError(RuntimeError):
    """Loss of positivity or finiteness during a run."""

    def __init__(self, message: str, t: float, node: tuple[int, ...] | None = None):
        super().__init__(f"{message} at t={t:.6g}" + (f", node={node}" if node else ""))
        self.t = t
        self.node = node


Forcing = Callable[[float], tuple[np.ndarray, np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class SolverConfig:
    mu: float
    eta: float
    law: PressureLaw = field(default_factory=PressureLaw)
    cfl: float = 0.5
    t_end: float = 0.25
    forcing: Forcing | None = None
    kappa: float = 0.01

    def __post_init__(self):
        if self.mu < 0 or self.eta < 0:
            raise ValueError("viscosities must be non-negative")
        if not (0.0 < self.cfl <= 0.9):
            raise ValueError("cfl must lie in (0, 0.9]")
        if self.kappa < 0:
            raise ValueError("dissipation coefficient must be non-negative")


@dataclass
class FluidState:
    grid: ThinGrid
    rho: np.ndarray
    mom: np.ndarray  # shape (2, nx_nodes, ns + 1)
    t: float = 0.0

    @property
    def velocity(self) -> np.ndarray:
        return self.mom / self.rho

    def copy(self) -> "FluidState":
        return FluidState(self.grid, self.rho.copy(), self.mom.copy(), self.t)


_GEOM_CACHE: dict = {}


def grid_geometry(grid: ThinGrid) -> dict:
    """Geometric arrays consumed by the right-hand-side kernels."""
    key = (grid.profile, grid.epsilon, grid.nx, grid.ns)
    geom = _GEOM_CACHE.get(key)
    if geom is None:
        top = grid.wall_normals("top")
        bottom = grid.wall_normals("bottom")
        area = grid.area()
        geom = {
            "A": area,
            "Ap": grid.area(1),
            "Ap_metric": _central_difference(area, grid.dx, grid.periodic),
            "Af": grid.face_area(),
            "Apf": grid.face_area(1),
            "s": grid.s,
            "s_faces": grid.s_faces,
            "eps": float(grid.epsilon),
            "dx": grid.dx,
            "ds": grid.ds,
            "periodic": grid.periodic,
            "nu_top": top,
            "nu_bottom": bottom,
        }
        if len(_GEOM_CACHE) > 64:
            _GEOM_CACHE.clear()
        _GEOM_CACHE[key] = geom
    return geom


def _central_difference(f: np.ndarray, dx: float, periodic: bool) -> np.ndarray:
    if periodic:
        return (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * dx)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * dx)
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx)
    out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * dx)
    return out


def enforce_boundary(grid: ThinGrid, mom: np.ndarray) -> None:
    """Remove the wall-normal momentum and zero the end fibers, in place."""
    geom = grid_geometry(grid)
    for j, nu in ((0, geom["nu_bottom"]), (-1, geom["nu_top"])):
        normal = mom[0, :, j] * nu[:, 0] + mom[1, :, j] * nu[:, 1]
        mom[0, :, j] -= normal * nu[:, 0]
        mom[1, :, j] -= normal * nu[:, 1]
    if not grid.periodic:
        mom[:, 0, :] = 0.0
        mom[:, -1, :] = 0.0


def slip_residual(state: FluidState) -> float:
    """Largest ``|<u, nu>|`` over wall nodes."""
    geom = grid_geometry(state.grid)
    u = state.velocity
    res = 0.0
    for j, nu in ((0, geom["nu_bottom"]), (-1, geom["nu_top"])):
        res = max(res, float(np.max(np.abs(u[0, :, j] * nu[:, 0] + u[1, :, j] * nu[:, 1]))))
    return res


def total_mass(state: FluidState) -> float:
    return float(np.sum(state.grid.node_weights() * state.rho))


def rest_state(grid: ThinGrid, rho: float = 1.0) -> FluidState:
    return FluidState(grid, np.full(grid.shape, float(rho)), np.zeros((2,) + grid.shape), 0.0)


def init_well_prepared(limit_state, profile: FiberProfile, grid: ThinGrid) -> FluidState:
    """Density constant along fibers, momentum from the lifted base velocity."""
    from .lift import _on_grid_nodes

    if hasattr(limit_state, "rho_hat"):
        rho_hat, u_hat, t0 = limit_state.rho_hat, limit_state.u_hat, limit_state.t
    else:
        (rho_hat, u_hat), t0 = limit_state, 0.0
    rho_nodes = _on_grid_nodes(rho_hat, grid)
    if np.any(rho_nodes <= 0):
        raise ValueError("initial density must be positive")
    lift = lift_field(profile, grid, u_hat)
    rho = np.repeat(rho_nodes[:, None], grid.ns + 1, axis=1)
    mom = np.stack([rho * lift.horizontal, rho * lift.vertical])
    enforce_boundary(grid, mom)
    return FluidState(grid, rho, mom, float(t0))


def stable_dt(state: FluidState, config: SolverConfig) -> float:
    grid = state.grid
    geom = grid_geometry(grid)
    width = min(grid.dx, grid.epsilon * float(np.min(geom["A"])) * grid.ds)
    rho = state.rho
    u = state.mom / rho
    c = config.law.sound_speed(rho)
    speed = float(np.max(np.sqrt(u[0] ** 2 + u[1] ** 2) + c))
    dt = width / speed
    visc = 2.0 * (2.0 * config.mu + config.eta)
    if visc > 0:
        dt = min(dt, width * width * float(np.min(rho)) / visc)
    return config.cfl * dt


def _params(config: SolverConfig) -> dict:
    return {
        "gamma": float(config.law.gamma),
        "a": float(config.law.a),
        "mu": float(config.mu),
        "eta": float(config.eta),
        "kappa": float(config.kappa),
    }


def evaluate_rhs(grid: ThinGrid, rho, mom, t: float, config: SolverConfig, backend=None):
    """Semi-discrete time derivative of ``(rho, mom)`` including forcing."""
    thin_rhs = kernels.thin_rhs if backend is None else backend
    d0, d1, d2 = thin_rhs(rho, mom[0], mom[1], grid_geometry(grid), _params(config))
    if config.forcing is not None:
        f0, f1, f2 = config.forcing(t)
        d0 = d0 + f0
        d1 = d1 + f1
        d2 = d2 + f2
    return d0, np.stack([d1, d2])


def _check(grid: ThinGrid, rho, mom, t):
    if not np.all(np.isfinite(rho)) or not np.all(np.isfinite(mom)):
        bad = np.argwhere(~np.isfinite(rho))
        raise SolverError("non-finite state", t, tuple(int(v) for v in bad[0]) if bad.size else None)
    if np.min(rho) <= 0:
        node = np.unravel_index(int(np.argmin(rho)), rho.shape)
        raise SolverError("non-positive density", t, tuple(int(v) for v in node))


def step(state: FluidState, config: SolverConfig, dt: float | None = None) -> FluidState:
    """One SSP-RK3 step; ``dt`` defaults to the stable step."""
    grid = state.grid
    if dt is None:
        dt = stable_dt(state, config)
    t = state.t
    r0, m0 = state.rho, state.mom

    d_r, d_m = evaluate_rhs(grid, r0, m0, t, config)
    r1 = r0 + dt * d_r
    m1 = m0 + dt * d_m
    enforce_boundary(grid, m1)
    _check(grid, r1, m1, t + dt)

    d_r, d_m = evaluate_rhs(grid, r1, m1, t + dt, config)
    r2 = 0.75 * r0 + 0.25 * (r1 + dt * d_r)
    m2 = 0.75 * m0 + 0.25 * (m1 + dt * d_m)
    enforce_boundary(grid, m2)
    _check(grid, r2, m2, t + 0.5 * dt)

    d_r, d_m = evaluate_rhs(grid, r2, m2, t + 0.5 * dt, config)
    r3 = (r0 + 2.0 * (r2 + dt * d_r)) / 3.0
    m3 = (m0 + 2.0 * (m2 + dt * d_m)) / 3.0
    enforce_boundary(grid, m3)
    _check(grid, r3, m3, t + dt)
    return FluidState(grid, r3, m3, t + dt)


def run(
    state: FluidState,
    config: SolverConfig,
    sample_times: Iterable[float] | None = None,
) -> Iterator[FluidState]:
    """Advance to each sample time in turn (hitting it exactly) and yield the state."""
    times = sorted(sample_times) if sample_times is not None else [config.t_end]
    current = state
    for target in times:
        if target < current.t - 1e-12:
            raise ValueError("sample times must not precede the state time")
        while target - current.t > 1e-13 * max(1.0, target):
            dt = min(stable_dt(current, config), target - current.t)
            current = step(current, config, dt)
        current = replace(current, t=float(target))
        yield current


def kinetic_plus_potential(state: FluidState, law: PressureLaw, rho_floor: float = 1.0) -> float:
    """Trapezoid quadrature of ``rho|u|^2/2 + H(rho)``."""
    from .thermo import Renormalization, renorm_H

    h = renorm_H(Renormalization(law, rho_floor), state.rho)[0]
    dens = 0.5 * np.sum(state.mom**2, axis=0) / state.rho + h
    return float(np.sum(state.grid.node_weights() * dens))


# ---------------------------------------------------------------------------
# Manufactured solutions


@dataclass
class ManufacturedSolution:
    """Exact fields and body force for a slip-compatible smooth flow."""

    rho: Callable
    u: Callable
    v: Callable
    force: Callable  # (x, y, t) -> (f_rho, f_mx, f_my)

    def state(self, grid: ThinGrid, t: float) -> FluidState:
        X, Y = _node_coords(grid)
        rho = self.rho(X, Y, t) * np.ones_like(X)
        mom = np.stack([rho * self.u(X, Y, t), rho * self.v(X, Y, t)])
        return FluidState(grid, rho, mom, t)

    def forcing_for(self, grid: ThinGrid) -> Forcing:
        X, Y = _node_coords(grid)

        def forcing(t):
            return tuple(np.broadcast_to(f, X.shape) for f in self.force(X, Y, t))

        return forcing


def _node_coords(grid: ThinGrid):
    X = np.repeat(grid.x[:, None], grid.ns + 1, axis=1)
    return X, grid.y()


def _sympy_area(profile: FiberProfile, x):
    import sympy as sp

    p = profile.params
    if profile.kind == "constant":
        return sp.Float(p[0])
    if profile.kind == "affine":
        return p[0] + p[1] * x
    if profile.kind == "cosine":
        return p[0] + p[1] * sp.cos(2 * sp.pi * (x - p[2]))
    if profile.kind == "exponential":
        return p[0] * sp.exp(p[1] * x)
    raise ValueError("manufactured solutions need an analytic area")


def manufactured_solution(
    profile: FiberProfile,
    epsilon: float,
    mu: float,
    eta: float,
    law: PressureLaw,
    amplitude: float = 1.0,
) -> ManufacturedSolution:
    """Smooth flow that satisfies both slip conditions exactly on the walls.

    The velocity is ``(phi, (log A)' y phi)`` with ``phi = g + c y^2``; the
    coefficient ``c`` cancels the tangential traction on the walls.  With
    ``amplitude = 0`` the solution is the rest state.
    """
    import sympy as sp

    x, y, t = sp.symbols("x y t", real=True)
    area = _sympy_area(profile, x)
    L1 = sp.diff(sp.log(area), x)
    L2 = sp.diff(L1, x)
    half = sp.Rational(1, 2) * epsilon * area
    h1 = sp.diff(half, x)
    wall = amplitude * (sp.Rational(3, 20) + sp.Rational(1, 10) * sp.sin(2 * sp.pi * x - t))
    wall_x = sp.diff(wall, x)
    r0 = 2 * h1 * (L1 * wall - wall_x) + (1 - h1**2) * (L2 * half * wall + h1 * wall_x)
    coef = -r0 / (2 * half * (1 + h1**2) ** 2)
    base = wall - half**2 * coef
    phi = base + coef * y**2
    u = phi
    v = L1 * y * phi
    s = y / (epsilon * area)
    rho = 1 + amplitude * (
        sp.Rational(1, 10) * sp.sin(2 * sp.pi * x - t) + sp.Rational(1, 20) * s**2 * sp.cos(2 * sp.pi * x)
    )

    lam = eta - mu
    ux, uy, vx, vy = sp.diff(u, x), sp.diff(u, y), sp.diff(v, x), sp.diff(v, y)
    div = ux + vy
    s11 = 2 * mu * ux + lam * div
    s22 = 2 * mu * vy + lam * div
    s12 = mu * (uy + vx)
    p = law.a * rho ** sp.Float(law.gamma)
    mx, my = rho * u, rho * v
    f_rho = sp.diff(rho, t) + sp.diff(mx, x) + sp.diff(my, y)
    f_mx = sp.diff(mx, t) + sp.diff(mx * u + p - s11, x) + sp.diff(mx * v - s12, y)
    f_my = sp.diff(my, t) + sp.diff(my * u - s12, x) + sp.diff(my * v + p - s22, y)

    def lam_fn(expr):
        return sp.lambdify((x, y, t), expr, modules="numpy", cse=True)

    force_fns = [lam_fn(e) for e in (f_rho, f_mx, f_my)]
    return ManufacturedSolution(
        rho=lam_fn(rho),
        u=lam_fn(u),
        v=lam_fn(v),
        force=lambda X, Y, T: tuple(f(X, Y, T) for f in force_fns),
    )


@dataclass
class MMSRow:
    nx: int
    ns: int
    error_rho: float
    error_u: float
    order_rho: float = math.nan
    order_u: float = math.nan


def _l2(grid: ThinGrid, err: np.ndarray) -> float:
    w = grid.node_weights()
    return math.sqrt(float(np.sum(w * err)) / float(np.sum(w)))


def mms_verify(
    profile: FiberProfile,
    config: SolverConfig,
    resolutions: Iterable[int] = (64, 128, 256),
    epsilon: float = 0.5,
    t_end: float = 0.1,
    ns_ratio: int = 4,
    amplitude: float = 1.0,
    min_order: float = 1.5,
) -> list[MMSRow]:
    """Grid-refinement study against a manufactured solution.

    Raises ``ArithmeticError`` when an observed order falls below ``min_order``.
    """
    sol = manufactured_solution(profile, epsilon, config.mu, config.eta, config.law, amplitude)
    rows: list[MMSRow] = []
    for nx in resolutions:
        grid = ThinGrid(profile, epsilon, nx, max(4, nx // ns_ratio))
        cfg = replace(config, forcing=sol.forcing_for(grid), t_end=t_end)
        state = sol.state(grid, 0.0)
        enforce_boundary(grid, state.mom)
        final = list(run(state, cfg, [t_end]))[-1]
        exact = sol.state(grid, t_end)
        err_rho = _l2(grid, (final.rho - exact.rho) ** 2)
        err_u = _l2(grid, np.sum((final.velocity - exact.velocity) ** 2, axis=0))
        rows.append(MMSRow(nx, grid.ns, err_rho, err_u))
    for prev, cur in zip(rows, rows[1:]):
        ratio = cur.nx / prev.nx
        if prev.error_rho > 0 and cur.error_rho > 0:
            cur.order_rho = math.log(prev.error_rho / cur.error_rho) / math.log(ratio)
        if prev.error_u > 0 and cur.error_u > 0:
            cur.order_u = math.log(prev.error_u / cur.error_u) / math.log(ratio)
        for order in (cur.order_rho, cur.order_u):
            if not math.isnan(order) and order < min_order:
                raise ArithmeticError(f"observed order {order:.2f} below {min_order}")
    return rows
