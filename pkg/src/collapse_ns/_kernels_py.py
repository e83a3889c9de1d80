"""Pure numpy semi-discrete right-hand sides (reference implementation).

The compiled module ``_kernels`` implements the same arithmetic with loops;
both must agree to rounding.

Thin domain (mapped rectangle, nodes ``(x_i, s_j)``): conserved variables
``q = (rho, rho u, rho v)`` obey

    d_t (A q) + d_x (A F) + d_s (G / eps - s A' F) = A f

with physical fluxes ``F, G`` including the viscous stress.  Node-centred
finite volumes with half cells on the walls (and on the ends of an interval
base), compact viscous face gradients, and a fourth-difference dissipation
flux.
"""

from __future__ import annotations

import numpy as np


def _stress(ux, uy, vx, vy, mu, lam):
    div = ux + vy
    s11 = 2.0 * mu * ux + lam * div
    s22 = 2.0 * mu * vy + lam * div
    s12 = mu * (uy + vx)
    return s11, s12, s22


def _ds_nodal(f, ds):
    out = np.empty_like(f)
    out[:, 1:-1] = (f[:, 2:] - f[:, :-2]) / (2.0 * ds)
    out[:, 0] = (-3.0 * f[:, 0] + 4.0 * f[:, 1] - f[:, 2]) / (2.0 * ds)
    out[:, -1] = (3.0 * f[:, -1] - 4.0 * f[:, -2] + f[:, -3]) / (2.0 * ds)
    return out


def _dx_nodal(f, dx, periodic):
    if periodic:
        return (np.roll(f, -1, axis=0) - np.roll(f, 1, axis=0)) / (2.0 * dx)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * dx)
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx)
    out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * dx)
    return out


def thin_rhs(rho, mx, my, geom, params):
    """Time derivative of ``(rho, mx, my)`` without forcing and boundary projection.

    ``geom``: dict with ``A, Ap`` (nodes), ``Ap_metric`` (central difference
    of the nodal A, used in the inviscid metric term so that a fluid at rest
    stays at rest), ``Af, Apf`` (x-faces), ``s``, ``s_faces``, ``eps``,
    ``dx``, ``ds``, ``periodic``.
    ``params``: dict with ``gamma, a, mu, eta, kappa``.
    """
    A, Ap = geom["A"], geom["Ap"]
    Af, Apf = geom["Af"], geom["Apf"]
    s, sf = geom["s"], geom["s_faces"]
    eps, dx, ds, periodic = geom["eps"], geom["dx"], geom["ds"], geom["periodic"]
    gamma, a, mu, eta, kappa = (params[k] for k in ("gamma", "a", "mu", "eta", "kappa"))
    lam = eta - mu  # eta - 2 mu / N with N = 2
    nxn, nsn = rho.shape

    u = mx / rho
    v = my / rho
    p = a * rho * rho if gamma == 2.0 else a * rho**gamma
    c = np.sqrt(gamma * p / rho)
    speed = float(np.max(np.sqrt(u * u + v * v) + c))

    fx = (mx, mx * u + p, mx * v)
    fy = (my, my * u, my * v + p)
    cons = (rho, mx, my)

    dxu, dxv = _dx_nodal(u, dx, periodic), _dx_nodal(v, dx, periodic)
    dsu, dsv = _ds_nodal(u, ds), _ds_nodal(v, ds)

    # x-direction fluxes through faces i+1/2, stored as flux_x[k][face, j]
    if periodic:
        right = lambda f: np.roll(f, -1, axis=0)  # noqa: E731
        left_sl = slice(None)
        nfaces = nxn
    else:
        right = lambda f: f[1:]  # noqa: E731
        left_sl = slice(0, nxn - 1)
        nfaces = nxn - 1
    Afc = Af[:nfaces, None]
    rate_f = (Apf[:nfaces] / Af[:nfaces])[:, None]
    Anode = A[:, None]

    ux_ref = (right(u) - u[left_sl]) / dx
    vx_ref = (right(v) - v[left_sl]) / dx
    us_f = 0.5 * (right(dsu) + dsu[left_sl])
    vs_f = 0.5 * (right(dsv) + dsv[left_sl])
    sj = s[None, :]
    ux = ux_ref - sj * rate_f * us_f
    vx = vx_ref - sj * rate_f * vs_f
    uy = us_f / (eps * Afc)
    vy = vs_f / (eps * Afc)
    s11, s12, _ = _stress(ux, uy, vx, vy, mu, lam)
    visc_x = (0.0, s11, s12)

    flux_x = []
    for k in range(3):
        af = Anode * fx[k]
        inv = 0.5 * (right(af) + af[left_sl])
        flux = inv - Afc * visc_x[k] if k else inv
        flux_x.append(flux)

    if kappa > 0.0:
        coef = kappa * speed * Afc
        for k in range(3):
            q = cons[k]
            if periodic:
                d3 = np.roll(q, -2, 0) - 3.0 * np.roll(q, -1, 0) + 3.0 * q - np.roll(q, 1, 0)
                flux_x[k] = flux_x[k] + coef * d3
            else:
                d3 = np.zeros((nfaces, nsn))
                d3[1:-1] = q[3:] - 3.0 * q[2:-1] + 3.0 * q[1:-2] - q[:-3]
                flux_x[k] = flux_x[k] + coef * d3

    # s-direction fluxes through faces j+1/2 and the walls
    rate_n = (Ap / A)[:, None]
    Apm = geom["Ap_metric"][:, None]
    # exact slope in the mass flux keeps the wall node flux consistent with the zero wall flux
    Ghat = [fy[k] / eps - sj * (Ap[:, None] if k == 0 else Apm) * fx[k] for k in range(3)]
    us = (u[:, 1:] - u[:, :-1]) / ds
    vs = (v[:, 1:] - v[:, :-1]) / ds
    uxi = 0.5 * (dxu[:, 1:] + dxu[:, :-1])
    vxi = 0.5 * (dxv[:, 1:] + dxv[:, :-1])
    sfj = sf[None, :]
    ux = uxi - sfj * rate_n * us
    vx = vxi - sfj * rate_n * vs
    uy = us / (eps * Anode)
    vy = vs / (eps * Anode)
    s11, s12, s22 = _stress(ux, uy, vx, vy, mu, lam)
    visc_s = (
        None,
        s12 / eps - sfj * Ap[:, None] * s11,
        s22 / eps - sfj * Ap[:, None] * s12,
    )

    # Wall viscous flux: normal traction only (zero tangential stress).
    wall = {}
    for j, sw in ((0, -0.5), (nsn - 1, 0.5)):
        uxw = dxu[:, j] - sw * (Ap / A) * dsu[:, j]
        vxw = dxv[:, j] - sw * (Ap / A) * dsv[:, j]
        uyw = dsu[:, j] / (eps * A)
        vyw = dsv[:, j] / (eps * A)
        w11, w12, w22 = _stress(uxw, uyw, vxw, vyw, mu, lam)
        n1 = -eps * sw * Ap
        n2 = np.ones_like(n1)
        nn = n1 * n1 + n2 * n2
        snn = (n1 * (w11 * n1 + w12 * n2) + n2 * (w12 * n1 + w22 * n2)) / nn
        wall[j] = (snn * n1 / eps, snn * n2 / eps)

    flux_s = []
    for k in range(3):
        full = np.empty((nxn, nsn + 1))
        full[:, 1:-1] = 0.5 * (Ghat[k][:, 1:] + Ghat[k][:, :-1])
        if k:
            full[:, 1:-1] -= visc_s[k]
            full[:, 0] = Ghat[k][:, 0] - wall[0][k - 1]
            full[:, -1] = Ghat[k][:, -1] - wall[nsn - 1][k - 1]
        else:
            full[:, 0] = 0.0
            full[:, -1] = 0.0
        flux_s.append(full)

    if kappa > 0.0 and nsn >= 4:
        coef = kappa * speed / (eps * A)[:, None]
        for k in range(3):
            q = cons[k]
            d3 = q[:, 3:] - 3.0 * q[:, 2:-1] + 3.0 * q[:, 1:-2] - q[:, :-3]
            flux_s[k][:, 2:-2] += coef * A[:, None] * d3

    wx = np.ones(nxn)
    if not periodic:
        wx[0] = wx[-1] = 0.5
    ws = np.ones(nsn)
    ws[0] = ws[-1] = 0.5
    out = []
    for k in range(3):
        if periodic:
            fxk = flux_x[k]
            divx = fxk - np.roll(fxk, 1, axis=0)
        else:
            full = np.empty((nxn + 1, nsn))
            full[1:-1] = flux_x[k]
            full[0] = A[0] * fx[k][0]
            full[-1] = A[-1] * fx[k][-1]
            divx = full[1:] - full[:-1]
        divs = flux_s[k][:, 1:] - flux_s[k][:, :-1]
        rate = -(divx / (wx[:, None] * dx) + divs / (ws[None, :] * ds))
        out.append(rate / Anode)
    return out[0], out[1], out[2]


def limit_rhs(w, u, geom, params):
    """Time derivatives of ``(A rho_hat, u_hat)`` on a uniform base grid.

    ``geom``: ``A, L1, L2`` (area, (log A)', (log A)''), ``dx``, ``periodic``.
    ``params``: ``gamma, a, kappa`` and viscous-force coefficients
    ``c_uxx, c_t, c_lux, c_ul2`` multiplying ``u_xx, (u L1)_x, L1 u_x, u L1^2``.
    """
    A, L1 = geom["A"], geom["L1"]
    dx, periodic = geom["dx"], geom["periodic"]
    gamma, a, kappa = params["gamma"], params["a"], params["kappa"]
    c_uxx, c_t, c_lux, c_ul2 = (params[k] for k in ("c_uxx", "c_t", "c_lux", "c_ul2"))
    rho = w / A
    p = a * rho * rho if gamma == 2.0 else a * rho**gamma
    c = np.sqrt(gamma * p / rho)
    speed = float(np.max(np.abs(u) + c))
    flux = w * u
    n = w.size

    if periodic:
        nxt, prv = np.roll(flux, -1), np.roll(flux, 1)
        dw = -(nxt - prv) / (2.0 * dx)
    else:
        dw = np.empty(n)
        dw[1:-1] = -(flux[2:] - flux[:-2]) / (2.0 * dx)
        dw[0] = -(flux[1] - flux[0]) / dx
        dw[-1] = -(flux[-1] - flux[-2]) / dx

    def d1(f):
        if periodic:
            return (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * dx)
        out = np.zeros(n)
        out[1:-1] = (f[2:] - f[:-2]) / (2.0 * dx)
        return out

    def d2(f):
        if periodic:
            return (np.roll(f, -1) - 2.0 * f + np.roll(f, 1)) / (dx * dx)
        out = np.zeros(n)
        out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (dx * dx)
        return out

    ux = d1(u)
    force = c_uxx * d2(u) + c_t * d1(u * L1) + c_lux * L1 * ux + c_ul2 * u * L1 * L1
    du = -u * ux - d1(p) / rho + force / rho

    if kappa > 0.0:
        # the mass flux differences rho, scaled by the face area, so rest states stay exact
        if periodic:
            a_face = 0.5 * (A + np.roll(A, -1))
        else:
            a_face = 0.5 * (A[1:] + A[:-1])
        for q, dq, scale in ((rho, dw, a_face), (u, du, 1.0)):
            if periodic:
                d3 = np.roll(q, -2) - 3.0 * np.roll(q, -1) + 3.0 * q - np.roll(q, 1)
                fl = kappa * speed * scale * d3
                dq -= (fl - np.roll(fl, 1)) / dx
            else:
                fl = np.zeros(n - 1)
                fl[1:-1] = q[3:] - 3.0 * q[2:-1] + 3.0 * q[1:-2] - q[:-3]
                fl *= kappa * speed * scale
                dq[1:-1] -= (fl[1:] - fl[:-1]) / dx
    if not periodic:
        du[0] = du[-1] = 0.0
    return dw, du
