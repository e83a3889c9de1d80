"""Relative entropy between a thin-domain flow and the lifted limit solution.

Every integral is a midpoint rule on the physical cells of the thin grid.
Cell-centre values are the mean of the four corner values and gradients are
the compact cell differences mapped to physical coordinates, for the flow and
for the comparison fields alike.  The comparison fields are sampled from the
limit solution at the thin-grid x-nodes (constant along fibers).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import ThinGrid, dlog_area
from .lift import lift_field
from .limit_solver import LimitConfig, LimitState, base_geometry, time_derivatives
from .tensors import contract, stress
from .thermo import PressureLaw, Renormalization, entropy_integrand, renorm_H


@dataclass
class EntropyReport:
    t: float
    E_vs_uhat: float
    E_vs_lift: float
    measure: float
    terms: tuple[float, float, float, float, float] = (math.nan,) * 5
    dissipation: float = math.nan
    remainder: float = math.nan
    inequality_slack: float = math.nan

    @property
    def E_normalized(self) -> float:
        return self.E_vs_uhat / self.measure

    @property
    def E_lift_normalized(self) -> float:
        return self.E_vs_lift / self.measure


# ---------------------------------------------------------------------------
# Limit fields on the thin grid


def _fine_derivative(f: np.ndarray, dx: float, periodic: bool, order: int = 1) -> np.ndarray:
    if periodic:
        if order == 1:
            return (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * dx)
        return (np.roll(f, -1) - 2.0 * f + np.roll(f, 1)) / (dx * dx)
    out = np.gradient(f, dx, edge_order=2)
    return out if order == 1 else np.gradient(out, dx, edge_order=2)


@dataclass
class ComparisonFields:
    """Limit quantities at the thin-grid x-nodes."""

    rho: np.ndarray
    u: np.ndarray
    ux: np.ndarray
    uxx: np.ndarray
    L1: np.ndarray
    ul_x: np.ndarray
    ul_xx: np.ndarray
    drho_dt: np.ndarray | None = None
    du_dt: np.ndarray | None = None


def comparison_fields(limit: LimitState, grid: ThinGrid, config: LimitConfig | None = None) -> ComparisonFields:
    """Sample the limit solution and its derivatives at the thin-grid x-nodes."""
    profile = grid.profile
    fine = limit.grid
    stride, rem = divmod(fine.n, grid.nx)
    if rem or stride < 1 or fine.periodic != grid.periodic:
        raise ValueError("limit grid must refine the thin grid by an integer factor")
    if np.any(limit.rho_hat <= 0) or not np.all(np.isfinite(limit.rho_hat)):
        raise ValueError("limit density must be positive and finite")
    L1f = base_geometry(profile, fine)["L1"]
    u = limit.u_hat
    ul = u * L1f
    d = fine.dx
    per = fine.periodic
    sub = slice(None, None, stride)
    out = ComparisonFields(
        rho=limit.rho_hat[sub].copy(),
        u=u[sub].copy(),
        ux=_fine_derivative(u, d, per)[sub],
        uxx=_fine_derivative(u, d, per, 2)[sub],
        L1=L1f[sub].copy(),
        ul_x=_fine_derivative(ul, d, per)[sub],
        ul_xx=_fine_derivative(ul, d, per, 2)[sub],
    )
    if config is not None:
        dr, du = time_derivatives(limit, profile, config)
        out.drho_dt = dr[sub].copy()
        out.du_dt = du[sub].copy()
    return out


# ---------------------------------------------------------------------------
# Cell operators


def _cells(f: np.ndarray, periodic: bool) -> tuple[np.ndarray, np.ndarray]:
    """Right-neighbour-in-x arrays for every cell's left node column."""
    if periodic:
        return f, np.roll(f, -1, axis=0)
    return f[:-1], f[1:]


def cell_average(f: np.ndarray, grid: ThinGrid) -> np.ndarray:
    left, right = _cells(f, grid.periodic)
    return 0.25 * (left[:, :-1] + left[:, 1:] + right[:, :-1] + right[:, 1:])


def cell_gradient(f: np.ndarray, grid: ThinGrid) -> tuple[np.ndarray, np.ndarray]:
    """Physical ``(d/dx, d/dy)`` at cell centres from the four corners."""
    left, right = _cells(f, grid.periodic)
    d_xi = (right[:, :-1] + right[:, 1:] - left[:, :-1] - left[:, 1:]) / (2.0 * grid.dx)
    d_s = (left[:, 1:] + right[:, 1:] - left[:, :-1] - right[:, :-1]) / (2.0 * grid.ds)
    xc = grid.x_faces
    area = grid.profile.area(xc)[:, None]
    rate = dlog_area(grid.profile, xc)[:, None]
    sc = grid.s_faces[None, :]
    return d_xi - sc * rate * d_s, d_s / (grid.epsilon * area)


def velocity_gradient(ux_field: np.ndarray, uy_field: np.ndarray, grid: ThinGrid) -> np.ndarray:
    """Cell-centre gradient ``G[..., i, j] = d_i u^j``."""
    a_x, a_y = cell_gradient(ux_field, grid)
    b_x, b_y = cell_gradient(uy_field, grid)
    return np.stack([np.stack([a_x, b_x], -1), np.stack([a_y, b_y], -1)], -2)


def _integrate(density: np.ndarray, grid: ThinGrid) -> float:
    return float(np.sum(grid.cell_measures() * density))


# ---------------------------------------------------------------------------
# Meter


def _lifted(fields: ComparisonFields, grid: ThinGrid):
    lift = lift_field(grid.profile, grid, fields.u)
    rho = np.repeat(fields.rho[:, None], grid.ns + 1, axis=1)
    return rho, lift.horizontal, lift.vertical


def _renorm(law: PressureLaw, fields: ComparisonFields, rho_floor: float | None = None) -> Renormalization:
    # The relative entropy does not depend on the reference density.
    return Renormalization(law, float(np.min(fields.rho)) if rho_floor is None else rho_floor)


def relative_entropy(
    state,
    limit: LimitState | ComparisonFields,
    against: str = "lift",
    law: PressureLaw | None = None,
    rho_floor: float | None = None,
) -> EntropyReport:
    """Relative entropy against ``(rho_hat, u_hat)`` and ``(rho_hat, U_eps)``.

    ``against`` selects which value ``E_normalized`` reports first; both
    values are always filled.
    """
    if against not in ("uhat", "lift"):
        raise ValueError("against must be 'uhat' or 'lift'")
    law = law or PressureLaw()
    grid = state.grid
    fields = limit if isinstance(limit, ComparisonFields) else comparison_fields(limit, grid)
    r_nodes, Ux, Uy = _lifted(fields, grid)
    renorm = _renorm(law, fields, rho_floor)
    rho_c = cell_average(state.rho, grid)
    vel = state.mom / state.rho
    u_c = np.stack([cell_average(vel[0], grid), cell_average(vel[1], grid)], -1)
    r_c = cell_average(r_nodes, grid)
    U_lift = np.stack([cell_average(Ux, grid), cell_average(Uy, grid)], -1)
    U_hat = np.stack([U_lift[..., 0], np.zeros_like(r_c)], -1)
    e_lift = _integrate(entropy_integrand(renorm, rho_c, u_c, r_c, U_lift), grid)
    e_hat = _integrate(entropy_integrand(renorm, rho_c, u_c, r_c, U_hat), grid)
    return EntropyReport(state.t, e_hat, e_lift, grid.measure())


def dissipation(state, fields: ComparisonFields, mu: float, eta: float) -> float:
    """``int [S(grad u) - S(grad U)] : (grad u - grad U)``."""
    grid = state.grid
    _, Ux, Uy = _lifted(fields, grid)
    vel = state.mom / state.rho
    G = velocity_gradient(vel[0] - Ux, vel[1] - Uy, grid)
    return _integrate(contract(stress(G, mu, eta, 2), G), grid)


def remainder(
    state, fields: ComparisonFields, mu: float, eta: float, law: PressureLaw, rho_floor: float | None = None
) -> float:
    """Remainder of the relative entropy inequality for the pair ``(rho_hat, U_eps)``."""
    if fields.du_dt is None:
        raise ValueError("comparison fields need time derivatives")
    grid = state.grid
    renorm = _renorm(law, fields, rho_floor)
    r_nodes, Ux, Uy = _lifted(fields, grid)
    y = grid.y()
    dUx = np.repeat(fields.du_dt[:, None], grid.ns + 1, axis=1)
    dUy = (fields.du_dt * fields.L1)[:, None] * y
    _, h1, h2 = renorm_H(renorm, fields.rho)
    dH1_nodes = np.repeat((h2 * fields.drho_dt)[:, None], grid.ns + 1, axis=1)
    H1_nodes = np.repeat(h1[:, None], grid.ns + 1, axis=1)

    avg = lambda f: cell_average(f, grid)  # noqa: E731
    rho = avg(state.rho)
    vel = state.mom / state.rho
    u = np.stack([avg(vel[0]), avg(vel[1])], -1)
    r = avg(r_nodes)
    U = np.stack([avg(Ux), avg(Uy)], -1)
    dU = np.stack([avg(dUx), avg(dUy)], -1)
    GU = velocity_gradient(Ux, Uy, grid)
    Gu = velocity_gradient(vel[0], vel[1], grid)
    gH1 = np.stack(cell_gradient(H1_nodes, grid), -1)
    w = U - u

    dens = rho * np.sum(dU * w, -1)
    dens += rho * np.einsum("...i,...ij,...j->...", u, GU, w)
    dens -= contract(stress(GU, mu, eta, 2), Gu - GU)
    dens += np.trace(GU, axis1=-2, axis2=-1) * (law.pressure(r) - law.pressure(rho))
    dens += (r - rho) * avg(dH1_nodes) + np.sum((r[..., None] * U - rho[..., None] * u) * gH1, -1)
    return _integrate(dens, grid)


def remainder_terms(state, fields: ComparisonFields, mu: float, eta: float, law: PressureLaw, ambient_dim: int = 2):
    """The five-term split of the remainder (I, II, III, IV, V)."""
    if fields.du_dt is None:
        raise ValueError("comparison fields need time derivatives")
    grid = state.grid
    lam = eta + (ambient_dim - 2) * mu / ambient_dim
    r_nodes, Ux, Uy = _lifted(fields, grid)
    avg = lambda f: cell_average(f, grid)  # noqa: E731
    col = lambda a: np.repeat(np.asarray(a)[:, None], grid.ns + 1, axis=1)  # noqa: E731
    y = grid.y()
    rho = avg(state.rho)
    vel = state.mom / state.rho
    u = np.stack([avg(vel[0]), avg(vel[1])], -1)
    r = avg(r_nodes)
    U = np.stack([avg(Ux), avg(Uy)], -1)
    w = U - u
    GU = velocity_gradient(Ux, Uy, grid)

    q = law.pressure(r) - law.pressure(rho) - (r - rho) * law.dpressure(r)
    t1 = np.trace(GU, axis1=-2, axis2=-1) * q
    t2 = -rho * np.einsum("...i,...ij,...j->...", w, GU, w)
    ul = fields.u * fields.L1
    bracket = fields.du_dt * fields.L1 + fields.u * fields.ul_x + ul * ul
    t3 = rho * avg(bracket[:, None] * y) * w[..., 1]
    t4 = -mu * avg(fields.ul_xx[:, None] * y) * w[..., 1]
    wh = w[..., 0]
    geo = avg(col(fields.ul_x))
    uxx = avg(col(fields.uxx))
    t5 = (rho - r) / r * (mu * uxx * wh + lam * (wh * geo + wh * uxx))
    return tuple(_integrate(t, grid) for t in (t1, t2, t3, t4, t5))


def measure_sample(
    state,
    limit: LimitState,
    limit_config: LimitConfig,
    mu: float,
    eta: float,
    law: PressureLaw,
    rho_floor: float | None = None,
) -> EntropyReport:
    """Full report for one time sample (inequality slack left unset).

    ``rho_floor`` fixes the reference density of the pressure potential; by
    default the smallest comparison density is used.
    """
    fields = comparison_fields(limit, state.grid, limit_config)
    rep = relative_entropy(state, fields, "lift", law, rho_floor)
    rep.dissipation = dissipation(state, fields, mu, eta)
    rep.remainder = remainder(state, fields, mu, eta, law, rho_floor)
    rep.terms = remainder_terms(state, fields, mu, eta, law)
    return rep


def inequality_check(reports: list[EntropyReport]) -> np.ndarray:
    """Slack ``E(0) + int R - E(t) - int dissipation`` with trapezoid time integrals.

    Fills ``inequality_slack`` of each report and returns the series.
    """
    if not reports:
        return np.zeros(0)
    t = np.array([r.t for r in reports])
    rem = np.array([r.remainder for r in reports])
    dis = np.array([r.dissipation for r in reports])
    e = np.array([r.E_vs_lift for r in reports])
    slack = e[0] + cumulative(rem, t) - e - cumulative(dis, t)
    for rep, val in zip(reports, slack):
        rep.inequality_slack = float(val)
    return slack


def cumulative(values: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Trapezoid running integral starting at zero."""
    from scipy.integrate import cumulative_trapezoid

    return cumulative_trapezoid(values, times, initial=0.0)


# ---------------------------------------------------------------------------
# Discrete Korn constant


@dataclass
class KornEstimate:
    epsilon: float
    constant: float
    kernel_dim: int
    converged: bool = True
    iterations: int = 0
    residual: float = math.nan
    ritz_values: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)


def korn_forms(grid: ThinGrid):
    """Sparse matrices of ``int |D(grad phi)|^2`` and ``int |phi|^2 + |grad phi|^2``
    on bilinear elements of the exactly mapped grid, and the admissible-space basis.

    Returns ``(a, b, P)`` with the admissible fields ``phi = P c``.
    """
    from scipy import sparse

    profile = grid.profile
    nxn, nsn = grid.shape
    node = lambda i, j: (i % nxn) * nsn + j  # noqa: E731
    g = 0.5 / math.sqrt(3.0)
    gauss = (0.5 - g, 0.5 + g)
    ncell_x = grid.nx
    ci, cj = np.meshgrid(np.arange(ncell_x), np.arange(grid.ns), indexing="ij")
    ci, cj = ci.ravel(), cj.ravel()
    corners = [(0, 0), (1, 0), (1, 1), (0, 1)]
    dofs = np.array([2 * node(ci + a, cj + b) + c for (a, b) in corners for c in range(2)]).T
    ke_a = np.zeros((ci.size, 8, 8))
    ke_b = np.zeros((ci.size, 8, 8))
    for gx in gauss:
        for gs in gauss:
            xq = (ci + gx) * grid.dx
            sq = -0.5 + (cj + gs) * grid.ds
            area = profile.area(xq)
            slope = profile.area(xq, 1)
            # map (xi, s) -> (x, y = eps A s); inverse Jacobian entries
            jy_xi = grid.epsilon * slope * sq
            jy_s = grid.epsilon * area
            det = grid.dx * grid.ds * jy_s  # physical area element per unit reference square
            shape = np.array([(1 - gx) * (1 - gs), gx * (1 - gs), gx * gs, (1 - gx) * gs])
            dxi = np.array([-(1 - gs), (1 - gs), gs, -gs]) / grid.dx
            dss = np.array([-(1 - gx), -gx, gx, (1 - gx)]) / grid.ds
            # d/dx = d/dxi - (jy_xi / jy_s) d/ds ; d/dy = d/ds / jy_s
            nx_ = dxi[None, :] - (jy_xi / jy_s)[:, None] * dss[None, :]
            ny_ = dss[None, :] / jy_s[:, None]
            weight = 0.25 * det
            # strain rows: e11, e22, sqrt2 e12 acting on (phi1_k, phi2_k) interleaved
            B = np.zeros((ci.size, 3, 8))
            B[:, 0, 0::2] = nx_
            B[:, 1, 1::2] = ny_
            B[:, 2, 0::2] = ny_ / math.sqrt(2.0)
            B[:, 2, 1::2] = nx_ / math.sqrt(2.0)
            ke_a += weight[:, None, None] * np.einsum("cki,ckj->cij", B, B)
            grad = np.einsum("ck,cl->ckl", nx_, nx_) + np.einsum("ck,cl->ckl", ny_, ny_)
            mass = np.outer(shape, shape)[None, :, :]
            scal = weight[:, None, None] * (grad + mass)
            ke_b[:, 0::2, 0::2] += scal
            ke_b[:, 1::2, 1::2] += scal
    rows = np.repeat(dofs, 8, axis=1).ravel()
    cols = np.tile(dofs, (1, 8)).ravel()
    ndof = 2 * nxn * nsn
    a = sparse.coo_matrix((ke_a.ravel(), (rows, cols)), shape=(ndof, ndof)).tocsr()
    b = sparse.coo_matrix((ke_b.ravel(), (rows, cols)), shape=(ndof, ndof)).tocsr()

    # admissible basis: tangential at walls, zero on end fibers
    tang_top = _tangents(grid, "top")
    tang_bot = _tangents(grid, "bottom")
    p_rows, p_cols, p_vals = [], [], []
    col = 0
    for i in range(nxn):
        end = not grid.periodic and (i == 0 or i == nxn - 1)
        for j in range(nsn):
            if end:
                continue
            k = node(i, j)
            if j == 0 or j == nsn - 1:
                t = tang_bot[i] if j == 0 else tang_top[i]
                p_rows += [2 * k, 2 * k + 1]
                p_cols += [col, col]
                p_vals += [t[0], t[1]]
                col += 1
            else:
                p_rows += [2 * k, 2 * k + 1]
                p_cols += [col, col + 1]
                p_vals += [1.0, 1.0]
                col += 2
    P = sparse.coo_matrix((p_vals, (p_rows, p_cols)), shape=(ndof, col)).tocsr()
    return a, b, P


def _tangents(grid: ThinGrid, side: str) -> np.ndarray:
    from .geometry import wall_frame

    return wall_frame(grid.profile, grid.epsilon, grid.x, side)[2]


def _b_orthonormalize(S: np.ndarray, br) -> np.ndarray:
    """B-orthonormal basis of the column span of ``S`` (rank-revealing)."""
    gram = S.T @ (br @ S)
    gram = 0.5 * (gram + gram.T)
    vals, vecs = np.linalg.eigh(gram)
    keep = vals > 1e-12 * vals.max()
    return S @ (vecs[:, keep] / np.sqrt(vals[keep]))


def korn_estimate(
    grid: ThinGrid,
    n_iter: int = 300,
    block: int = 8,
    depth: int = 4,
    kernel_tol: float = 1e-10,
    tol: float = 1e-6,
    stall_tol: float = 1e-5,
    stall_window: int = 10,
    seed: int = 0,
) -> KornEstimate:
    """Smallest ``a/b`` on the admissible space after deflating ``a <= kernel_tol * b``.

    Restarted block Krylov iteration on the shift-inverted pencil with a
    Rayleigh-Ritz projection.  Converged when the relative residual of the
    reported Ritz pair drops below ``tol`` or, for tightly clustered spectra
    where the eigenvector is ill-determined, when the Ritz value moved by less
    than ``stall_tol`` (relative) over ``stall_window`` iterations.
    """
    from scipy.linalg import eigh
    from scipy.sparse.linalg import splu

    a, b, P = korn_forms(grid)
    ar = (P.T @ a @ P).tocsc()
    br = (P.T @ b @ P).tocsc()
    n = ar.shape[0]
    shift = 1e-2
    solver = splu((ar + shift * br).tocsc())
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, block))
    theta = np.full(block, math.nan)
    converged = False
    kernel_dim = 0
    value = math.nan
    resid = math.nan
    history: list[float] = []
    it = 0
    for it in range(1, n_iter + 1):
        blocks = [X]
        for _ in range(depth - 1):
            blocks.append(solver.solve(br @ blocks[-1]))
        Q = _b_orthonormalize(np.hstack(blocks), br)
        Ka = Q.T @ (ar @ Q)
        theta, Y = eigh(0.5 * (Ka + Ka.T))
        X = Q @ Y[:, :block]
        theta = theta[:block]
        kernel_dim = int(np.sum(theta <= kernel_tol))
        if kernel_dim >= block - 1:
            raise ArithmeticError("near-kernel fills the iteration block; increase block size")
        value = float(theta[kernel_dim])
        x = X[:, kernel_dim]
        bx = br @ x
        resid = np.linalg.norm(ar @ x - value * bx) / np.linalg.norm(bx)
        history.append(value)
        stalled = len(history) > stall_window and abs(history[-1 - stall_window] - value) <= stall_tol * value
        if resid <= tol * max(value, kernel_tol) or stalled:
            converged = True
            break
    return KornEstimate(
        grid.epsilon, max(value, 0.0), kernel_dim, converged, it, float(resid), theta
    )
