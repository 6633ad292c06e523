"""Time stepping for the forager-exploiter system.

Spatial terms are finite-volume: diffusion through face gradients, taxis
through donor-cell (upwind) face fluxes, both zero on the boundary, so the
discrete masses of ``u`` and ``v`` only change through the logistic terms.
All three fields are updated together from the old state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.fft

from . import kernels
from .grid import Grid, cell_integral, divergence_faces, gradient_faces
from .model import ModelParams, NutrientSource, State

NEGATIVE_TOLERANCE = -1e-13
DT_SLACK = 1e-9
MODES = ("explicit", "imex-diffusion")


class BlowUp(RuntimeError):
    """Raised by ``step`` when a field becomes non-finite or exceeds the threshold."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True)
class StepControl:
    """Time-step policy.

    ``positivity_floor`` > 0 zeroes entries in ``(-floor, 0)`` after each
    step (roundoff cleanup); the default 0 leaves values untouched.
    ``blowup_threshold`` of ``None`` only checks finiteness.
    """

    dt_max: float = 1e-2
    cfl_safety: float = 0.4
    positivity_floor: float = 0.0
    mode: str = "explicit"
    blowup_threshold: float | None = None
    backend: str | None = None

    def __post_init__(self):
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")
        if not 0 < self.cfl_safety < 1:
            raise ValueError("cfl_safety must lie in (0, 1)")
        if self.positivity_floor < 0:
            raise ValueError("positivity_floor must be >= 0")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


@dataclass(frozen=True)
class StepReport:
    dt_used: float
    max_face_speed: float
    any_negative: bool
    post_masses: tuple[float, float, float]
    min_value: float


# -- spatial operators -------------------------------------------------------

def taxis_divergence(grid: Grid, carrier, potential, coeff: float) -> np.ndarray:
    """``div(carrier * coeff * grad potential)`` with donor-cell face values."""
    carrier = grid.check(carrier)
    fluxes = []
    for axis, g in enumerate(gradient_faces(grid, potential)):
        vel = coeff * g
        n = carrier.shape[axis]
        lo = np.take(carrier, np.arange(n - 1), axis=axis)
        hi = np.take(carrier, np.arange(1, n), axis=axis)
        inner = [slice(None)] * carrier.ndim
        inner[axis] = slice(1, -1)
        inner = tuple(inner)
        flux = np.zeros_like(vel)
        flux[inner] = vel[inner] * np.where(vel[inner] > 0.0, lo, hi)
        fluxes.append(flux)
    return divergence_faces(grid, fluxes)


def reaction_terms(state: State, params: ModelParams, source_now):
    """Zero-order terms ``(R_u, R_v, R_w)`` evaluated cellwise."""
    u, v, w = state.fields()
    if np.any(u < 0) or np.any(v < 0):
        raise ValueError("reaction terms need nonnegative u and v")
    r_u = params.eta1 * (u - u ** params.m)
    r_v = params.eta2 * (v - v ** params.l)
    r_w = -params.lam * (u + v) * w - params.mu * w + state.grid.check(source_now)
    return r_u, r_v, r_w


def max_face_speeds(grid: Grid, state: State, params: ModelParams) -> list[float]:
    """Largest taxis velocity on each axis, over both taxis terms."""
    speeds = []
    for gw, gu in zip(gradient_faces(grid, state.w), gradient_faces(grid, state.u)):
        speeds.append(max(params.chi * float(np.max(np.abs(gw))),
                          params.xi * float(np.max(np.abs(gu)))))
    return speeds


def _rate_bound(grid: Grid, params: ModelParams, speeds, u_sup, v_sup, implicit_diffusion):
    """Largest per-step loss rate of any cell (diffusion + outflow + reaction)."""
    diffusion = 0.0 if implicit_diffusion else sum(2.0 / (h * h) for h in grid.h)
    advection = sum(2.0 * s / h for s, h in zip(speeds, grid.h))
    reaction = (params.eta1 * params.m * u_sup ** (params.m - 1.0)
                + params.eta2 * params.l * v_sup ** (params.l - 1.0)
                + params.lam * (u_sup + v_sup) + params.mu)
    return diffusion + advection + reaction


def _dt_from_rate(rate, ctrl: StepControl):
    if rate <= 0:
        return ctrl.dt_max
    return min(ctrl.dt_max, ctrl.cfl_safety / rate)


def stable_dt(state: State, params: ModelParams, ctrl: StepControl) -> float:
    """Time step that keeps every explicit cell update a nonnegative
    combination of old values: ``cfl_safety`` divided by the sum of the
    diffusion, outflow and reaction rates, capped at ``dt_max``.
    """
    speeds = max_face_speeds(state.grid, state, params)
    rate = _rate_bound(state.grid, params, speeds, float(np.max(state.u)), float(np.max(state.v)),
                       ctrl.mode == "imex-diffusion")
    return _dt_from_rate(rate, ctrl)


# -- implicit diffusion ------------------------------------------------------

class _NeumannHeatSolver:
    """Solves ``(I - dt * Lap) x = b`` exactly via the type-II DCT, which
    diagonalises the mirror-ghost Laplacian on a uniform grid."""

    def __init__(self, grid: Grid):
        eig = np.zeros(grid.shape)
        for axis, (n, h) in enumerate(zip(grid.cells, grid.h)):
            k = np.arange(n)
            lam = -(4.0 / (h * h)) * np.sin(np.pi * k / (2.0 * n)) ** 2
            shape = [1] * grid.dim
            shape[axis] = n
            eig = eig + lam.reshape(shape)
        self.eig = eig

    def solve(self, b: np.ndarray, dt: float) -> np.ndarray:
        # the mean is an exact eigenvector; splitting it off keeps constants exact
        mean = float(np.mean(b))
        coeffs = scipy.fft.dctn(b - mean, type=2, norm="ortho")
        coeffs /= 1.0 - dt * self.eig
        return mean + scipy.fft.idctn(coeffs, type=2, norm="ortho")


_heat_cache: dict[Grid, _NeumannHeatSolver] = {}


def _heat_solver(grid: Grid) -> _NeumannHeatSolver:
    solver = _heat_cache.get(grid)
    if solver is None:
        solver = _heat_cache[grid] = _NeumannHeatSolver(grid)
    return solver


# -- stepping ----------------------------------------------------------------

def _as2d(f):
    return f if f.ndim == 2 else f.reshape(f.shape[0], 1)


def step(state: State, params: ModelParams, source: NutrientSource,
         ctrl: StepControl, dt: float | None = None) -> tuple[State, StepReport]:
    """Advance one step. A requested ``dt`` is used only if it does not
    exceed the stable step (up to a relative ``DT_SLACK``)."""
    grid = state.grid
    imex = ctrl.mode == "imex-diffusion"
    rhs = kernels.get_rhs(ctrl.backend)
    hx = grid.h[0]
    hy = grid.h[1] if grid.dim == 2 else 1.0

    u, v, w = (np.ascontiguousarray(_as2d(f)) for f in state.fields())
    r = np.ascontiguousarray(_as2d(source.evaluate(grid, state.t)))
    du, dv, dw = np.empty_like(u), np.empty_like(v), np.empty_like(w)
    sx, sy = rhs(u, v, w, r, hx, hy, params.chi, params.xi, params.lam, params.mu,
                 params.eta1, params.eta2, params.m, params.l, not imex, du, dv, dw)
    speeds = [sx] if grid.dim == 1 else [sx, sy]

    rate = _rate_bound(grid, params, speeds, float(u.max()), float(v.max()), imex)
    dt_stable = _dt_from_rate(rate, ctrl)
    # a request within DT_SLACK of the stable step is honoured, so that
    # advance_to does not leave a roundoff-sized final step
    if dt is None or dt > dt_stable * (1.0 + DT_SLACK):
        dt = dt_stable
    if not dt > 0:
        raise ValueError("time step must be positive")

    new = [f + dt * df for f, df in ((u, du), (v, dv), (w, dw))]
    new = [x.reshape(grid.shape) for x in new]
    if imex:
        heat = _heat_solver(grid)
        new = [heat.solve(x, dt) for x in new]
    if ctrl.positivity_floor > 0:
        for x in new:
            x[(x < 0) & (x > -ctrl.positivity_floor)] = 0.0

    out = State(grid, state.t + dt, *new)
    lowest = min(float(x.min()) for x in new)
    finite = all(np.all(np.isfinite(x)) for x in new)
    if not finite:
        raise BlowUp(f"non-finite values at t={out.t:.6g}", out)
    peak = max(float(x.max()) for x in new)
    if ctrl.blowup_threshold is not None and peak > ctrl.blowup_threshold:
        raise BlowUp(f"sup norm {peak:.3e} exceeds threshold {ctrl.blowup_threshold:.3e} "
                     f"at t={out.t:.6g}", out)
    report = StepReport(
        dt_used=dt,
        max_face_speed=max(speeds),
        any_negative=lowest < NEGATIVE_TOLERANCE,
        post_masses=tuple(cell_integral(grid, x) for x in new),
        min_value=lowest,
    )
    return out, report


Observer = Callable[[State, StepReport, int], None]


@dataclass
class AdvanceResult:
    state: State
    reason: str  # "t_end" or "blow-up"
    steps: int
    min_dt: float
    message: str = ""


def advance_to(state: State, t_end: float, params: ModelParams, source: NutrientSource,
               ctrl: StepControl, observer: Observer | None = None,
               max_steps: int | None = None) -> AdvanceResult:
    """Step until ``t_end`` (last step truncated to land on it) or blow-up.

    ``observer(state, report, step_index)`` runs after every step.
    """
    if t_end < state.t:
        raise ValueError(f"t_end={t_end} precedes current time {state.t}")
    steps = 0
    min_dt = math.inf
    current = state
    while current.t < t_end:
        if max_steps is not None and steps >= max_steps:
            return AdvanceResult(current, "max-steps", steps, min_dt)
        remaining = t_end - current.t
        try:
            nxt, report = step(current, params, source, ctrl, dt=remaining)
        except BlowUp as exc:
            return AdvanceResult(exc.state if exc.state is not None else current,
                                 "blow-up", steps, min_dt, str(exc))
        steps += 1
        min_dt = min(min_dt, report.dt_used)
        if report.dt_used >= remaining or nxt.t >= t_end:
            nxt.t = t_end
        current = nxt
        if observer is not None:
            observer(current, report, steps)
    return AdvanceResult(current, "t_end", steps, min_dt)
