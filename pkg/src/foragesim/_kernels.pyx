# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled right-hand side of the forager-exploiter system on a 2D array.

1D problems are passed as ``(nx, 1)`` arrays; the degenerate axis then has
only boundary faces and contributes exact zeros. Arithmetic order mirrors
``_kernels_py`` term by term. Every face is evaluated once: axis-1 faces are
carried in scalars along a row, axis-0 faces in per-row buffers.
"""

import numpy as np

from libc.math cimport pow, fabs


cdef inline double _power(double x, double e) nogil:
    if x > 0.0:
        if e == 2.0:
            return x * x
        return pow(x, e)
    return 0.0


def explicit_rhs(const double[:, ::1] u, const double[:, ::1] v,
                 const double[:, ::1] w, const double[:, ::1] r,
                 double hx, double hy,
                 double chi, double xi, double lam, double mu,
                 double eta1, double eta2, double m, double l,
                 bint diffusion,
                 double[:, ::1] du, double[:, ::1] dv, double[:, ::1] dw):
    """Fill ``du, dv, dw``; return the largest taxis face speed per axis."""
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1]
    cdef Py_ssize_t i, j
    cdef double ihx = 1.0 / hx, ihy = 1.0 / hy
    cdef double sx = 0.0, sy = 0.0
    cdef double ux, vx, wx, vel, s
    # axis-0 faces below the current row, and the ones above it
    cdef double[::1] gu0 = np.zeros(ny), gv0 = np.zeros(ny), gw0 = np.zeros(ny)
    cdef double[::1] fu0 = np.zeros(ny), fv0 = np.zeros(ny)
    cdef double gu_hi, gv_hi, gw_hi, fu_hi, fv_hi
    # axis-1 faces left of the current cell, and right of it
    cdef double gu_l, gv_l, gw_l, fu_l, fv_l
    cdef double gu_r, gv_r, gw_r, fu_r, fv_r
    cdef double lap_u, lap_v, lap_w, div_u, div_v, react_w

    with nogil:
        for i in range(nx):
            gu_l = 0.0
            gv_l = 0.0
            gw_l = 0.0
            fu_l = 0.0
            fv_l = 0.0
            for j in range(ny):
                ux = u[i, j]
                vx = v[i, j]
                wx = w[i, j]

                if i < nx - 1:
                    gu_hi = (u[i + 1, j] - ux) * ihx
                    gv_hi = (v[i + 1, j] - vx) * ihx
                    gw_hi = (w[i + 1, j] - wx) * ihx
                    vel = chi * gw_hi
                    fu_hi = vel * (ux if vel > 0.0 else u[i + 1, j])
                    s = fabs(vel)
                    if s > sx:
                        sx = s
                    vel = xi * gu_hi
                    fv_hi = vel * (vx if vel > 0.0 else v[i + 1, j])
                    s = fabs(vel)
                    if s > sx:
                        sx = s
                else:
                    gu_hi = 0.0
                    gv_hi = 0.0
                    gw_hi = 0.0
                    fu_hi = 0.0
                    fv_hi = 0.0

                if j < ny - 1:
                    gu_r = (u[i, j + 1] - ux) * ihy
                    gv_r = (v[i, j + 1] - vx) * ihy
                    gw_r = (w[i, j + 1] - wx) * ihy
                    vel = chi * gw_r
                    fu_r = vel * (ux if vel > 0.0 else u[i, j + 1])
                    s = fabs(vel)
                    if s > sy:
                        sy = s
                    vel = xi * gu_r
                    fv_r = vel * (vx if vel > 0.0 else v[i, j + 1])
                    s = fabs(vel)
                    if s > sy:
                        sy = s
                else:
                    gu_r = 0.0
                    gv_r = 0.0
                    gw_r = 0.0
                    fu_r = 0.0
                    fv_r = 0.0

                lap_u = (gu_hi - gu0[j]) * ihx
                lap_v = (gv_hi - gv0[j]) * ihx
                lap_w = (gw_hi - gw0[j]) * ihx
                div_u = (fu_hi - fu0[j]) * ihx
                div_v = (fv_hi - fv0[j]) * ihx
                lap_u = lap_u + (gu_r - gu_l) * ihy
                lap_v = lap_v + (gv_r - gv_l) * ihy
                lap_w = lap_w + (gw_r - gw_l) * ihy
                div_u = div_u + (fu_r - fu_l) * ihy
                div_v = div_v + (fv_r - fv_l) * ihy

                react_w = -lam * (ux + vx) * wx - mu * wx + r[i, j]
                if diffusion:
                    du[i, j] = lap_u - div_u + eta1 * (ux - _power(ux, m))
                    dv[i, j] = lap_v - div_v + eta2 * (vx - _power(vx, l))
                    dw[i, j] = lap_w + react_w
                else:
                    du[i, j] = -div_u + eta1 * (ux - _power(ux, m))
                    dv[i, j] = -div_v + eta2 * (vx - _power(vx, l))
                    dw[i, j] = react_w

                gu0[j] = gu_hi
                gv0[j] = gv_hi
                gw0[j] = gw_hi
                fu0[j] = fu_hi
                fv0[j] = fv_hi
                gu_l = gu_r
                gv_l = gv_r
                gw_l = gw_r
                fu_l = fu_r
                fv_l = fv_r
    return sx, sy
