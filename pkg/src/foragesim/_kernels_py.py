"""Pure numpy twin of the compiled kernel in ``_kernels.pyx``."""

import numpy as np


def _faces(f, axis, h):
    """Interior-face difference quotients plus zero boundary faces."""
    d = np.diff(f, axis=axis) * (1.0 / h)
    pad = [(0, 0), (0, 0)]
    pad[axis] = (1, 1)
    return np.pad(d, pad)


def _upwind_flux(carrier, potential_faces, coeff, axis):
    vel = coeff * potential_faces
    n = carrier.shape[axis]
    lo = np.take(carrier, np.arange(n - 1), axis=axis)
    hi = np.take(carrier, np.arange(1, n), axis=axis)
    inner = [slice(None), slice(None)]
    inner[axis] = slice(1, -1)
    inner = tuple(inner)
    flux = np.zeros_like(vel)
    flux[inner] = vel[inner] * np.where(vel[inner] > 0.0, lo, hi)
    return flux, vel


def _power(x, e):
    return np.where(x > 0.0, np.maximum(x, 0.0) ** e, 0.0)


def explicit_rhs(u, v, w, r, hx, hy, chi, xi, lam, mu, eta1, eta2, m, l,
                 diffusion, du, dv, dw):
    lap_u = lap_v = lap_w = div_u = div_v = None
    speeds = []
    for axis, h in ((0, hx), (1, hy)):
        gu = _faces(u, axis, h)
        gv = _faces(v, axis, h)
        gw = _faces(w, axis, h)
        fu, vel_u = _upwind_flux(u, gw, chi, axis)
        fv, vel_v = _upwind_flux(v, gu, xi, axis)
        speeds.append(max(float(np.max(np.abs(vel_u), initial=0.0)),
                          float(np.max(np.abs(vel_v), initial=0.0))))
        terms = [np.diff(g, axis=axis) * (1.0 / h) for g in (gu, gv, gw, fu, fv)]
        if lap_u is None:
            lap_u, lap_v, lap_w, div_u, div_v = terms
        else:
            lap_u = lap_u + terms[0]
            lap_v = lap_v + terms[1]
            lap_w = lap_w + terms[2]
            div_u = div_u + terms[3]
            div_v = div_v + terms[4]
    react_u = eta1 * (u - _power(u, m))
    react_v = eta2 * (v - _power(v, l))
    react_w = -lam * (u + v) * w - mu * w + r
    if diffusion:
        du[...] = lap_u - div_u + react_u
        dv[...] = lap_v - div_v + react_v
        dw[...] = lap_w + react_w
    else:
        du[...] = -div_u + react_u
        dv[...] = -div_v + react_v
        dw[...] = react_w
    return speeds[0], speeds[1]
