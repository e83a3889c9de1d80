# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled semi-discrete right-hand sides; loop ports of ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport pow, sqrt, fabs

cnp.import_array()


cdef inline void _stress(double ux, double uy, double vx, double vy, double mu, double lam,
                         double* s11, double* s12, double* s22) noexcept nogil:
    cdef double div = ux + vy
    s11[0] = 2.0 * mu * ux + lam * div
    s22[0] = 2.0 * mu * vy + lam * div
    s12[0] = mu * (uy + vx)


def thin_rhs(rho_in, mx_in, my_in, dict geom, dict params):
    cdef double[:, ::1] rho = np.ascontiguousarray(rho_in, dtype=np.float64)
    cdef double[:, ::1] mx = np.ascontiguousarray(mx_in, dtype=np.float64)
    cdef double[:, ::1] my = np.ascontiguousarray(my_in, dtype=np.float64)
    cdef double[::1] A = np.ascontiguousarray(geom["A"], dtype=np.float64)
    cdef double[::1] Ap = np.ascontiguousarray(geom["Ap"], dtype=np.float64)
    cdef double[::1] Apm = np.ascontiguousarray(geom["Ap_metric"], dtype=np.float64)
    cdef double[::1] Af = np.ascontiguousarray(geom["Af"], dtype=np.float64)
    cdef double[::1] Apf = np.ascontiguousarray(geom["Apf"], dtype=np.float64)
    cdef double[::1] s = np.ascontiguousarray(geom["s"], dtype=np.float64)
    cdef double[::1] sf = np.ascontiguousarray(geom["s_faces"], dtype=np.float64)
    cdef double eps = geom["eps"], dx = geom["dx"], ds = geom["ds"]
    cdef bint periodic = bool(geom["periodic"])
    cdef double gamma = params["gamma"], a = params["a"], mu = params["mu"]
    cdef double eta = params["eta"], kappa = params["kappa"]
    cdef double lam = eta - mu

    cdef Py_ssize_t nxn = rho.shape[0], nsn = rho.shape[1]
    cdef Py_ssize_t i, j, il, ir, k, nfaces, im, ip, ip2
    cdef double[:, ::1] u = np.empty((nxn, nsn))
    cdef double[:, ::1] v = np.empty((nxn, nsn))
    cdef double[:, ::1] p = np.empty((nxn, nsn))
    cdef double[:, ::1] dxu = np.empty((nxn, nsn))
    cdef double[:, ::1] dxv = np.empty((nxn, nsn))
    cdef double[:, ::1] dsu = np.empty((nxn, nsn))
    cdef double[:, ::1] dsv = np.empty((nxn, nsn))
    # nodal inviscid fluxes: A F (x direction) and G / eps - s A' F (s direction)
    cdef double[:, :, ::1] NF = np.empty((3, nxn, nsn))
    cdef double[:, :, ::1] NG = np.empty((3, nxn, nsn))
    # x fluxes: index i holds face i - 1/2 (entries 0..nxn)
    cdef double[:, :, ::1] FX = np.zeros((3, nxn + 1, nsn))
    # s fluxes: index j holds face j - 1/2 (entries 0..nsn)
    cdef double[:, :, ::1] FS = np.zeros((3, nxn, nsn + 1))
    out_rho = np.empty((nxn, nsn))
    out_mx = np.empty((nxn, nsn))
    out_my = np.empty((nxn, nsn))
    cdef double[:, ::1] o0 = out_rho, o1 = out_mx, o2 = out_my

    cdef double speed = 0.0, cc, r, val, inv2dx = 0.5 / dx, inv2ds = 0.5 / ds
    cdef double ux, uy, vx, vy, s11, s12, s22, rate, afc, sj, coef
    cdef double fl, fr, gl, gr, n1, nn, snn, sw, wxl, wsl
    cdef double idx = 1.0 / dx, ids = 1.0 / ds, iy

    with nogil:
        for i in range(nxn):
            for j in range(nsn):
                r = rho[i, j]
                u[i, j] = mx[i, j] / r
                v[i, j] = my[i, j] / r
                p[i, j] = a * r * r if gamma == 2.0 else a * pow(r, gamma)
                cc = sqrt(gamma * p[i, j] / r)
                val = sqrt(u[i, j] * u[i, j] + v[i, j] * v[i, j]) + cc
                if val > speed:
                    speed = val
                fl = mx[i, j] * u[i, j] + p[i, j]
                fr = mx[i, j] * v[i, j]
                NF[0, i, j] = A[i] * mx[i, j]
                NF[1, i, j] = A[i] * fl
                NF[2, i, j] = A[i] * fr
                sj = s[j] * Apm[i]
                # exact slope in the mass flux keeps the wall node flux consistent
                NG[0, i, j] = my[i, j] / eps - s[j] * Ap[i] * mx[i, j]
                NG[1, i, j] = my[i, j] * u[i, j] / eps - sj * fl
                NG[2, i, j] = (my[i, j] * v[i, j] + p[i, j]) / eps - sj * fr

        # nodal derivatives
        for i in range(nxn):
            for j in range(1, nsn - 1):
                dsu[i, j] = (u[i, j + 1] - u[i, j - 1]) * inv2ds
                dsv[i, j] = (v[i, j + 1] - v[i, j - 1]) * inv2ds
            dsu[i, 0] = (-3.0 * u[i, 0] + 4.0 * u[i, 1] - u[i, 2]) * inv2ds
            dsv[i, 0] = (-3.0 * v[i, 0] + 4.0 * v[i, 1] - v[i, 2]) * inv2ds
            j = nsn - 1
            dsu[i, j] = (3.0 * u[i, j] - 4.0 * u[i, j - 1] + u[i, j - 2]) * inv2ds
            dsv[i, j] = (3.0 * v[i, j] - 4.0 * v[i, j - 1] + v[i, j - 2]) * inv2ds
        for i in range(nxn):
            if periodic:
                ip = i + 1 if i + 1 < nxn else 0
                im = i - 1 if i > 0 else nxn - 1
                for j in range(nsn):
                    dxu[i, j] = (u[ip, j] - u[im, j]) * inv2dx
                    dxv[i, j] = (v[ip, j] - v[im, j]) * inv2dx
            elif i == 0:
                for j in range(nsn):
                    dxu[i, j] = (-3.0 * u[0, j] + 4.0 * u[1, j] - u[2, j]) * inv2dx
                    dxv[i, j] = (-3.0 * v[0, j] + 4.0 * v[1, j] - v[2, j]) * inv2dx
            elif i == nxn - 1:
                for j in range(nsn):
                    dxu[i, j] = (3.0 * u[i, j] - 4.0 * u[i - 1, j] + u[i - 2, j]) * inv2dx
                    dxv[i, j] = (3.0 * v[i, j] - 4.0 * v[i - 1, j] + v[i - 2, j]) * inv2dx
            else:
                for j in range(nsn):
                    dxu[i, j] = (u[i + 1, j] - u[i - 1, j]) * inv2dx
                    dxv[i, j] = (v[i + 1, j] - v[i - 1, j]) * inv2dx

        # x faces
        nfaces = nxn if periodic else nxn - 1
        for il in range(nfaces):
            ir = il + 1 if il + 1 < nxn else 0
            afc = Af[il]
            rate = Apf[il] / afc
            iy = 1.0 / (eps * afc)
            for j in range(nsn):
                sj = s[j]
                FX[0, il + 1, j] = 0.5 * (NF[0, ir, j] + NF[0, il, j])
                FX[1, il + 1, j] = 0.5 * (NF[1, ir, j] + NF[1, il, j])
                FX[2, il + 1, j] = 0.5 * (NF[2, ir, j] + NF[2, il, j])
                gl = 0.5 * (dsu[ir, j] + dsu[il, j])
                gr = 0.5 * (dsv[ir, j] + dsv[il, j])
                ux = (u[ir, j] - u[il, j]) * idx - sj * rate * gl
                vx = (v[ir, j] - v[il, j]) * idx - sj * rate * gr
                uy = gl * iy
                vy = gr * iy
                _stress(ux, uy, vx, vy, mu, lam, &s11, &s12, &s22)
                FX[1, il + 1, j] -= afc * s11
                FX[2, il + 1, j] -= afc * s12
        if kappa > 0.0:
            for il in range(nfaces):
                if periodic:
                    im = il - 1 if il > 0 else nxn - 1
                    ip = il + 1 if il + 1 < nxn else il + 1 - nxn
                    ip2 = il + 2 if il + 2 < nxn else il + 2 - nxn
                elif il < 1 or il > nfaces - 2:
                    continue
                else:
                    im = il - 1
                    ip = il + 1
                    ip2 = il + 2
                coef = kappa * speed * Af[il]
                for j in range(nsn):
                    FX[0, il + 1, j] += coef * (rho[ip2, j] - 3.0 * rho[ip, j] + 3.0 * rho[il, j] - rho[im, j])
                    FX[1, il + 1, j] += coef * (mx[ip2, j] - 3.0 * mx[ip, j] + 3.0 * mx[il, j] - mx[im, j])
                    FX[2, il + 1, j] += coef * (my[ip2, j] - 3.0 * my[ip, j] + 3.0 * my[il, j] - my[im, j])
        if periodic:
            for k in range(3):
                for j in range(nsn):
                    FX[k, 0, j] = FX[k, nxn, j]
        else:
            for k in range(3):
                for j in range(nsn):
                    FX[k, 0, j] = NF[k, 0, j]
                    FX[k, nxn, j] = NF[k, nxn - 1, j]

        # s faces and walls
        for i in range(nxn):
            rate = Ap[i] / A[i]
            iy = 1.0 / (eps * A[i])
            for j in range(nsn - 1):
                gl = (u[i, j + 1] - u[i, j]) * ids
                gr = (v[i, j + 1] - v[i, j]) * ids
                sj = sf[j]
                ux = 0.5 * (dxu[i, j + 1] + dxu[i, j]) - sj * rate * gl
                vx = 0.5 * (dxv[i, j + 1] + dxv[i, j]) - sj * rate * gr
                uy = gl * iy
                vy = gr * iy
                _stress(ux, uy, vx, vy, mu, lam, &s11, &s12, &s22)
                FS[0, i, j + 1] = 0.5 * (NG[0, i, j] + NG[0, i, j + 1])
                FS[1, i, j + 1] = 0.5 * (NG[1, i, j] + NG[1, i, j + 1]) - (s12 / eps - sj * Ap[i] * s11)
                FS[2, i, j + 1] = 0.5 * (NG[2, i, j] + NG[2, i, j + 1]) - (s22 / eps - sj * Ap[i] * s12)
            for k in range(2):
                j = 0 if k == 0 else nsn - 1
                sw = -0.5 if k == 0 else 0.5
                ux = dxu[i, j] - sw * rate * dsu[i, j]
                vx = dxv[i, j] - sw * rate * dsv[i, j]
                uy = dsu[i, j] * iy
                vy = dsv[i, j] * iy
                _stress(ux, uy, vx, vy, mu, lam, &s11, &s12, &s22)
                n1 = -eps * sw * Ap[i]
                nn = n1 * n1 + 1.0
                snn = (n1 * (s11 * n1 + s12) + (s12 * n1 + s22)) / nn
                il = 0 if k == 0 else nsn
                FS[0, i, il] = 0.0
                FS[1, i, il] = NG[1, i, j] - snn * n1 / eps
                FS[2, i, il] = NG[2, i, j] - snn / eps
            if kappa > 0.0 and nsn >= 4:
                coef = kappa * speed / (eps * A[i]) * A[i]
                for j in range(1, nsn - 2):
                    FS[0, i, j + 1] += coef * (rho[i, j + 2] - 3.0 * rho[i, j + 1] + 3.0 * rho[i, j] - rho[i, j - 1])
                    FS[1, i, j + 1] += coef * (mx[i, j + 2] - 3.0 * mx[i, j + 1] + 3.0 * mx[i, j] - mx[i, j - 1])
                    FS[2, i, j + 1] += coef * (my[i, j + 2] - 3.0 * my[i, j + 1] + 3.0 * my[i, j] - my[i, j - 1])

        for i in range(nxn):
            wxl = 0.5 if (not periodic and (i == 0 or i == nxn - 1)) else 1.0
            wxl = 1.0 / (wxl * dx)
            iy = 1.0 / A[i]
            for j in range(nsn):
                wsl = 2.0 * ids if (j == 0 or j == nsn - 1) else ids
                o0[i, j] = -((FX[0, i + 1, j] - FX[0, i, j]) * wxl + (FS[0, i, j + 1] - FS[0, i, j]) * wsl) * iy
                o1[i, j] = -((FX[1, i + 1, j] - FX[1, i, j]) * wxl + (FS[1, i, j + 1] - FS[1, i, j]) * wsl) * iy
                o2[i, j] = -((FX[2, i + 1, j] - FX[2, i, j]) * wxl + (FS[2, i, j + 1] - FS[2, i, j]) * wsl) * iy
    return out_rho, out_mx, out_my


def limit_rhs(w_in, u_in, dict geom, dict params):
    cdef double[::1] w = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef double[::1] u = np.ascontiguousarray(u_in, dtype=np.float64)
    cdef double[::1] A = np.ascontiguousarray(geom["A"], dtype=np.float64)
    cdef double[::1] L1 = np.ascontiguousarray(geom["L1"], dtype=np.float64)
    cdef double dx = geom["dx"]
    cdef bint periodic = bool(geom["periodic"])
    cdef double gamma = params["gamma"], a = params["a"], kappa = params["kappa"]
    cdef double c_uxx = params["c_uxx"], c_t = params["c_t"]
    cdef double c_lux = params["c_lux"], c_ul2 = params["c_ul2"]
    cdef Py_ssize_t n = w.shape[0], i, im, ip, ip2, lo, hi, nf
    cdef double[::1] rho = np.empty(n)
    cdef double[::1] p = np.empty(n)
    cdef double[::1] ul = np.empty(n)
    cdef double[::1] fw = np.empty(n)
    cdef double[::1] fu = np.empty(n)
    dw_arr = np.zeros(n)
    du_arr = np.zeros(n)
    cdef double[::1] dw = dw_arr, du = du_arr
    cdef double speed = 0.0, val, ux, uxx, tx, px, force, inv2dx = 0.5 / dx, idx2 = 1.0 / (dx * dx)

    with nogil:
        for i in range(n):
            rho[i] = w[i] / A[i]
            p[i] = a * rho[i] * rho[i] if gamma == 2.0 else a * pow(rho[i], gamma)
            val = fabs(u[i]) + sqrt(gamma * p[i] / rho[i])
            if val > speed:
                speed = val
            ul[i] = u[i] * L1[i]
        for i in range(n):
            if periodic:
                ip = i + 1 if i + 1 < n else 0
                im = i - 1 if i > 0 else n - 1
            elif i == 0 or i == n - 1:
                continue
            else:
                ip = i + 1
                im = i - 1
            dw[i] = -(w[ip] * u[ip] - w[im] * u[im]) * inv2dx
            ux = (u[ip] - u[im]) * inv2dx
            uxx = (u[ip] - 2.0 * u[i] + u[im]) * idx2
            tx = (ul[ip] - ul[im]) * inv2dx
            px = (p[ip] - p[im]) * inv2dx
            force = c_uxx * uxx + c_t * tx + c_lux * L1[i] * ux + c_ul2 * u[i] * L1[i] * L1[i]
            du[i] = -u[i] * ux - px / rho[i] + force / rho[i]
        if not periodic:
            dw[0] = -(w[1] * u[1] - w[0] * u[0]) / dx
            dw[n - 1] = -(w[n - 1] * u[n - 1] - w[n - 2] * u[n - 2]) / dx
        if kappa > 0.0:
            # flux at face i + 1/2 stored at index i
            nf = n if periodic else n - 1
            for i in range(nf):
                fw[i] = 0.0
                fu[i] = 0.0
                if periodic:
                    im = i - 1 if i > 0 else n - 1
                    ip = i + 1 if i + 1 < n else i + 1 - n
                    ip2 = i + 2 if i + 2 < n else i + 2 - n
                elif i < 1 or i > nf - 2:
                    continue
                else:
                    im = i - 1
                    ip = i + 1
                    ip2 = i + 2
                fw[i] = kappa * speed * 0.5 * (A[i] + A[ip]) * (rho[ip2] - 3.0 * rho[ip] + 3.0 * rho[i] - rho[im])
                fu[i] = kappa * speed * (u[ip2] - 3.0 * u[ip] + 3.0 * u[i] - u[im])
            if periodic:
                for i in range(n):
                    im = i - 1 if i > 0 else n - 1
                    dw[i] -= (fw[i] - fw[im]) / dx
                    du[i] -= (fu[i] - fu[im]) / dx
            else:
                for i in range(1, n - 1):
                    dw[i] -= (fw[i] - fw[i - 1]) / dx
                    du[i] -= (fu[i] - fu[i - 1]) / dx
        if not periodic:
            du[0] = 0.0
            du[n - 1] = 0.0
    return dw_arr, du_arr
