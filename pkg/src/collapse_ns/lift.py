"""Canonical lift of base velocities to the thin domain.

A base velocity ``X`` (scalar, the base is one-dimensional) is lifted to the
fiber over ``x`` as ``(X, V)`` where the vertical part ``V`` is the gradient of
the zero-mean solution of the fiber Neumann problem

    Laplace_F U = X * (log A)'   in F_x,     dU/dn = beta   on the fiber boundary,

and ``beta`` is the normal correction that makes the lift tangent to the wall.
For interval fibers ``V = X (A'/A) y``; for disk fibers ``V = X (R'/R) r``
radially.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import FiberProfile, ThinGrid, dlog_area, wall_frame

_COMPAT_TOL = 1e-10
_DISK_ANGLES = 64


class CompatibilityError(ArithmeticError):
    """Neumann data incompatible with the source term."""


def boundary_lift(profile: FiberProfile, x: float, side, Xhat: float, epsilon: float = 1.0):
    """Return ``(beta, lifted_vector, outward_normal)`` at one boundary point.

    ``side`` is ``"top"``/``"bottom"`` for interval fibers and an angle in
    radians for disk fibers.
    """
    if profile.fiber_dim == 1:
        nu, n, _ = wall_frame(profile, epsilon, np.array([x]), side)
        nu, n = nu[0], n[0]
        horizontal = np.array([Xhat, 0.0])
    else:
        theta = float(side)
        r1 = float(profile.radius(x, 1))
        norm = math.sqrt(1.0 + (epsilon * r1) ** 2)
        nu = np.array([-epsilon * r1, math.cos(theta), math.sin(theta)]) / norm
        n = np.array([0.0, math.cos(theta), math.sin(theta)])
        horizontal = np.array([Xhat, 0.0, 0.0])
    cos_angle = float(nu @ n)
    if abs(cos_angle) < 1e-14:
        raise ArithmeticError("fiber normal is tangent to the wall")
    b = -float(horizontal @ nu) / cos_angle
    return b, b * n + horizontal, nu


def beta(profile: FiberProfile, x: float, side, Xhat: float, epsilon: float = 1.0) -> float:
    """Normal coefficient that makes the horizontal lift tangent to the wall."""
    return boundary_lift(profile, x, side, Xhat, epsilon)[0]


def _boundary_integral(profile: FiberProfile, x: float, Xhat: float) -> float:
    """Integral of ``<lifted X, n>`` over the boundary of the unit-scale fiber."""
    if profile.fiber_dim == 1:
        return beta(profile, x, "top", Xhat) + beta(profile, x, "bottom", Xhat)
    radius = float(profile.radius(x))
    thetas = 2.0 * math.pi * np.arange(_DISK_ANGLES) / _DISK_ANGLES
    vals = [beta(profile, x, th, Xhat) for th in thetas]
    return float(np.mean(vals)) * 2.0 * math.pi * radius


@dataclass(frozen=True)
class FiberPotential:
    """Fiber potential at one base point.

    ``slope`` is ``dV/dy`` for interval fibers and ``dV_r/dr`` for disk
    fibers, so ``V = slope * coordinate``.  ``nodes``, ``values`` and
    ``velocity_samples`` hold the sampled Neumann solution when requested.
    """

    x: float
    xhat: float
    fiber_dim: int
    half_width: float
    slope: float
    nodes: np.ndarray | None = field(default=None, repr=False)
    values: np.ndarray | None = field(default=None, repr=False)
    velocity_samples: np.ndarray | None = field(default=None, repr=False)

    def velocity(self, coord):
        return self.slope * np.asarray(coord, dtype=float)

    def potential(self, coord):
        """Zero-mean potential with gradient ``velocity``."""
        c = np.asarray(coord, dtype=float)
        h = self.half_width
        mean = self.slope * h * h / (6.0 if self.fiber_dim == 1 else 4.0)
        return 0.5 * self.slope * c * c - mean

    def divergence(self, coord=0.0):
        return np.full_like(np.asarray(coord, dtype=float), self.fiber_dim * self.slope)

    def boundary_flux(self) -> float:
        """``V . n`` on the fiber boundary."""
        return self.slope * self.half_width

    def sampled_divergence(self) -> np.ndarray:
        """Fiber divergence of the sampled velocity at interior nodes."""
        if self.velocity_samples is None:
            raise ValueError("potential was not sampled")
        r, v = self.nodes, self.velocity_samples
        if self.fiber_dim == 1:
            return (v[2:] - v[:-2]) / (r[2:] - r[:-2])
        return (r[2:] * v[2:] - r[:-2] * v[:-2]) / ((r[2:] - r[:-2]) * r[1:-1])


def _sampled_interval(source: float, flux_top: float, flux_bottom: float, h: float, m: int):
    """Node-centred finite volumes for ``U'' = source`` on ``[-h, h]`` with a zero-mean gauge."""
    y = np.linspace(-h, h, m + 1)
    d = y[1] - y[0]
    w = np.full(m + 1, d)
    w[0] = w[-1] = 0.5 * d
    mat = np.zeros((m + 2, m + 2))
    rhs = np.zeros(m + 2)
    for k in range(m + 1):
        if k > 0:
            mat[k, k - 1] += 1.0 / d
            mat[k, k] -= 1.0 / d
        if k < m:
            mat[k, k + 1] += 1.0 / d
            mat[k, k] -= 1.0 / d
        rhs[k] = source * w[k]
    rhs[0] -= flux_bottom
    rhs[m] -= flux_top
    mat[: m + 1, m + 1] = w
    mat[m + 1, : m + 1] = w
    sol = np.linalg.solve(mat, rhs)
    u = sol[: m + 1]
    v = np.empty_like(u)
    v[1:-1] = (u[2:] - u[:-2]) / (2.0 * d)
    v[0] = -flux_bottom
    v[-1] = flux_top
    return y, u, v


def _sampled_disk(source: float, flux: float, radius: float, m: int):
    """Radial finite volumes for ``(r U')'/r = source`` on ``[0, R]``, zero-mean gauge."""
    r = np.linspace(0.0, radius, m + 1)
    d = r[1] - r[0]
    faces = np.concatenate([[0.0], 0.5 * (r[1:] + r[:-1]), [radius]])
    area = 0.5 * (faces[1:] ** 2 - faces[:-1] ** 2)
    mat = np.zeros((m + 2, m + 2))
    rhs = np.zeros(m + 2)
    for k in range(m + 1):
        if k > 0:
            mat[k, k - 1] += faces[k] / d
            mat[k, k] -= faces[k] / d
        if k < m:
            mat[k, k + 1] += faces[k + 1] / d
            mat[k, k] -= faces[k + 1] / d
        rhs[k] = source * area[k]
    rhs[m] -= radius * flux
    mat[: m + 1, m + 1] = area
    mat[m + 1, : m + 1] = area
    sol = np.linalg.solve(mat, rhs)
    u = sol[: m + 1]
    v = np.empty_like(u)
    v[0] = 0.0
    v[1:-1] = (u[2:] - u[:-2]) / (2.0 * d)
    v[-1] = flux
    return r, u, v


def solve_fiber_neumann(
    profile: FiberProfile,
    x: float,
    Xhat: float,
    method: str = "analytic",
    resolution: int = 64,
) -> FiberPotential:
    """Fiber potential of the lift of ``Xhat`` at base point ``x`` (unit-scale fiber)."""
    source = Xhat * float(dlog_area(profile, x))
    fiber_integral = source * float(profile.area(x))
    boundary = _boundary_integral(profile, x, Xhat)
    if abs(fiber_integral - boundary) > _COMPAT_TOL * (1.0 + abs(fiber_integral)):
        raise CompatibilityError(
            f"fiber source {fiber_integral:.3e} != boundary flux {boundary:.3e}"
        )
    if profile.fiber_dim == 1:
        half = 0.5 * float(profile.area(x))
        slope = source
    else:
        half = float(profile.radius(x))
        slope = 0.5 * source
    pot = FiberPotential(float(x), float(Xhat), profile.fiber_dim, half, slope)
    if method == "analytic":
        return pot
    if method != "sampled":
        raise ValueError("method must be 'analytic' or 'sampled'")
    if profile.fiber_dim == 1:
        nodes, vals, vel = _sampled_interval(
            source,
            beta(profile, x, "top", Xhat),
            beta(profile, x, "bottom", Xhat),
            half,
            resolution,
        )
    else:
        nodes, vals, vel = _sampled_disk(source, beta(profile, x, 0.0, Xhat), half, resolution)
    return FiberPotential(float(x), float(Xhat), profile.fiber_dim, half, slope, nodes, vals, vel)


@dataclass(frozen=True)
class LiftField:
    """Lift ``(uhat, V)`` of a base velocity sampled on the thin-grid nodes."""

    epsilon: float
    uhat: np.ndarray
    horizontal: np.ndarray
    vertical: np.ndarray

    def vector(self) -> np.ndarray:
        return np.stack([self.horizontal, self.vertical], axis=-1)


def _on_grid_nodes(values, grid: ThinGrid) -> np.ndarray:
    """Restrict a base field to the thin-grid x-nodes."""
    arr = np.asarray(values, dtype=float)
    nodes = grid.base.num_nodes
    if arr.shape == (nodes,):
        return arr
    stride, rem = divmod(arr.size - (0 if grid.periodic else 1), grid.nx)
    if rem or stride < 1:
        raise ValueError("base field resolution is not a multiple of the grid's")
    return arr[::stride].copy()


def lift_field(profile: FiberProfile, grid: ThinGrid, uhat) -> LiftField:
    """Lift of the base velocity ``uhat`` (array or limit state) onto ``grid``."""
    if hasattr(uhat, "u_hat"):
        uhat = uhat.u_hat
    u = _on_grid_nodes(uhat, grid)
    eps = grid.epsilon
    area = profile.area(grid.x)
    rate = u * dlog_area(profile, grid.x)
    fiber_coord = np.outer(area, grid.s)  # y / eps
    vertical = eps * rate[:, None] * fiber_coord
    horizontal = np.repeat(u[:, None], grid.ns + 1, axis=1)
    return LiftField(eps, u, horizontal, vertical)


@dataclass(frozen=True)
class FlowAreaResult:
    area_via_flow: float
    area_direct: float
    boundary_drift: float

    def __iter__(self):
        return iter((self.area_via_flow, self.area_direct))


def flow_area_check(
    profile: FiberProfile,
    x0: float,
    t_end: float,
    dt: float = 1e-3,
    fiber_nodes: int = 33,
) -> FlowAreaResult:
    """Transport the fiber over ``x0`` along the lifted unit field with classical RK4.

    The state carries the base point, fiber coordinates of sample points and
    the Jacobian determinant of the flow; the transported area is the
    integral of the Jacobian over the initial fiber.
    """
    end = x0 + t_end
    if not profile.periodic and not (0.0 <= min(x0, end) and max(x0, end) <= 1.0):
        raise ValueError("the flow leaves the base interval")
    d = profile.fiber_dim
    half = 0.5 * float(profile.area(x0)) if d == 1 else float(profile.radius(x0))
    coords = np.linspace(-half, half, fiber_nodes) if d == 1 else np.linspace(0.0, half, fiber_nodes)

    def rhs(state):
        x = state[0]
        rate = float(dlog_area(profile, np.mod(x, 1.0) if profile.periodic else x))
        out = np.empty_like(state)
        out[0] = 1.0
        out[1:-1] = (rate / d) * state[1:-1]
        out[-1] = rate * state[-1]
        return out

    state = np.concatenate([[x0], coords, [1.0]])
    steps = max(1, int(round(abs(t_end) / dt)))
    h = t_end / steps
    for _ in range(steps):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * h * k1)
        k3 = rhs(state + 0.5 * h * k2)
        k4 = rhs(state + h * k3)
        state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    jac = np.full(fiber_nodes, state[-1])
    if d == 1:
        area_flow = float(np.trapezoid(jac, coords))
        edge = 0.5 * float(profile.area(end))
    else:
        area_flow = float(np.trapezoid(2.0 * math.pi * coords * jac, coords))
        edge = float(profile.radius(end))
    drift = abs(abs(state[-2]) - edge)
    return FlowAreaResult(area_flow, float(profile.area(end)), drift)


def area_rate_check(profile: FiberProfile, x: float, h: float = 1e-3) -> tuple[float, float]:
    """``d/dt A`` along the flow (centred difference of transported areas) and the
    boundary integral of the normal component of the lifted field."""
    fwd = flow_area_check(profile, x, h, dt=h / 8).area_via_flow
    bwd = flow_area_check(profile, x, -h, dt=h / 8).area_via_flow
    return (fwd - bwd) / (2.0 * h), _boundary_integral(profile, x, 1.0)


def _central_x(f: np.ndarray, dx: float, periodic: bool) -> np.ndarray:
    if periodic:
        return (np.roll(f, -1, axis=0) - np.roll(f, 1, axis=0)) / (2.0 * dx)
    out = np.full_like(f, np.nan)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * dx)
    return out


def lifted_continuity_residual(limit_state, profile: FiberProfile, grid: ThinGrid, drho_dt=None) -> float:
    """Sup over interior nodes of ``d_t rho_hat + div(rho_hat U_eps)``.

    ``limit_state`` is a limit state or a pair ``(rho_hat, u_hat)`` on the
    grid's x-nodes.  When ``drho_dt`` is omitted it is taken from the
    weighted continuity equation with central differences.
    """
    if hasattr(limit_state, "rho_hat"):
        rho, u = limit_state.rho_hat, limit_state.u_hat
    else:
        rho, u = limit_state
    rho = _on_grid_nodes(rho, grid)
    u = _on_grid_nodes(u, grid)
    area = profile.area(grid.x)
    if drho_dt is None:
        drho_dt = -_central_x(rho * u * area, grid.dx, grid.periodic) / area
    else:
        drho_dt = _on_grid_nodes(drho_dt, grid)
    lift = lift_field(profile, grid, u)
    f1 = rho[:, None] * lift.horizontal
    f2 = rho[:, None] * lift.vertical
    ds = grid.ds
    d1_dxi = _central_x(f1, grid.dx, grid.periodic)[:, 1:-1]
    d1_ds = (f1[:, 2:] - f1[:, :-2]) / (2.0 * ds)
    d2_ds = (f2[:, 2:] - f2[:, :-2]) / (2.0 * ds)
    s = grid.s[1:-1][None, :]
    rate = dlog_area(profile, grid.x)[:, None]
    scale = (grid.epsilon * area)[:, None]
    div = d1_dxi - s * rate * d1_ds + d2_ds / scale
    res = drho_dt[:, None] + div
    if not grid.periodic:
        res = res[1:-1]
    return float(np.max(np.abs(res)))


__all__ = [
    "CompatibilityError",
    "FiberPotential",
    "FlowAreaResult",
    "LiftField",
    "area_rate_check",
    "beta",
    "boundary_lift",
    "flow_area_check",
    "lift_field",
    "lifted_continuity_residual",
    "solve_fiber_neumann",
]
