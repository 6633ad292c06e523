"""Parameters, nutrient source, state, and the regime constants of the
forager-exploiter system

    u_t = Lap u - chi div(u grad w) + eta1 (u - u^m)
    v_t = Lap v - xi  div(v grad u) + eta2 (v - v^l)
    w_t = Lap w - lambda (u + v) w - mu w + r(x, t)

with zero-flux boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import diagnostics
from .grid import Grid


@dataclass(frozen=True)
class ModelParams:
    """PDE coefficients.

    The theory needs ``chi, xi, lambda, mu > 0``. Zero is also accepted so
    that degenerate oracle problems (pure heat flow, decoupled nutrient) can
    be run through the same code path; ``in_theory_regime`` tells them apart.
    """

    chi: float = 1.0
    xi: float = 1.0
    lam: float = 1.0
    mu: float = 1.0
    eta1: float = 0.0
    eta2: float = 0.0
    m: float = 2.0
    l: float = 2.0

    def __post_init__(self):
        errors = []
        for name in ("chi", "xi", "lam", "mu", "eta1", "eta2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                errors.append(f"{name} must be finite and >= 0, got {value}")
        for name in ("m", "l"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 1):
                errors.append(f"{name} must be > 1, got {value}")
        if errors:
            raise ValueError("; ".join(errors))

    @property
    def in_theory_regime(self) -> bool:
        return min(self.chi, self.xi, self.lam, self.mu) > 0


SOURCE_KINDS = ("constant", "separable-decay")


@dataclass(frozen=True, eq=False)
class NutrientSource:
    """``r(x, t) = r0 * g(x)`` (constant) or ``r0 * exp(-delta t) * g(x)``.

    ``profile`` is the spatial factor ``g``; ``None`` means ``g == 1``.
    """

    kind: str = "constant"
    r0: float = 0.0
    delta: float = 0.0
    profile: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}; expected one of {SOURCE_KINDS}")
        if not (self.r0 >= 0 and self.delta >= 0):
            raise ValueError("source amplitude and decay rate must be nonnegative")
        if self.profile is not None:
            g = np.asarray(self.profile, dtype=float)
            if np.any(g < 0) or not np.all(np.isfinite(g)):
                raise ValueError("source profile must be finite and nonnegative")
            object.__setattr__(self, "profile", g)

    @property
    def r_star(self) -> float:
        """Supremum of r over space and time."""
        gmax = 1.0 if self.profile is None else float(np.max(self.profile))
        return self.r0 * gmax

    def evaluate(self, grid: Grid, t: float) -> np.ndarray:
        if t < 0:
            raise ValueError("source evaluated at negative time")
        g = grid.full(1.0) if self.profile is None else grid.check(self.profile)
        if self.kind == "constant":
            return self.r0 * g
        return (self.r0 * math.exp(-self.delta * t)) * g


def evaluate_source(source: NutrientSource, grid: Grid, t: float) -> np.ndarray:
    return source.evaluate(grid, t)


@dataclass
class State:
    grid: Grid
    t: float
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        self.u = self.grid.check(self.u)
        self.v = self.grid.check(self.v)
        self.w = self.grid.check(self.w)

    def copy(self) -> "State":
        return State(self.grid, self.t, self.u.copy(), self.v.copy(), self.w.copy())

    def fields(self):
        return self.u, self.v, self.w


def compute_p(n: int) -> int:
    """Smallest integer strictly larger than ``n / 2``."""
    if int(n) != n or n < 1:
        raise ValueError(f"dimension must be a positive integer, got {n}")
    return int(n) // 2 + 1


@dataclass(frozen=True)
class RegimeQuantities:
    """Bootstrap constants built from the initial data.

    ``u_cap = 2 |u0|_inf``, ``v_cap = 2 |v0|_inf``,
    ``w_cap = max(|w0|_inf, r_star / mu)``,
    ``gradient_scale = (u_cap + v_cap + 1)(|w0|_{W^{1,2(p+1)}} + r_star)``,
    ``laplacian_scale = (u_cap + v_cap + 1) w_cap + |w0|_{W^{2,p+1}} + r_star``.
    """

    p: int
    u_cap: float
    v_cap: float
    w_cap: float
    gradient_scale: float
    laplacian_scale: float
    r_star: float
    kappa: float
    u0_w1_norm: float  # |u0|_{W^{1,2p}}, needed by the taxis smallness test

    @property
    def blowup_threshold(self) -> float:
        return 1e6 * max(self.u_cap, self.v_cap, self.w_cap, 1.0)

    def as_dict(self) -> dict[str, float]:
        return {
            "p": self.p,
            "u_cap": self.u_cap,
            "v_cap": self.v_cap,
            "w_cap": self.w_cap,
            "gradient_scale": self.gradient_scale,
            "laplacian_scale": self.laplacian_scale,
            "r_star": self.r_star,
            "kappa": self.kappa,
            "u0_w1_norm": self.u0_w1_norm,
        }


def compute_regime_quantities(grid: Grid, params: ModelParams, source: NutrientSource,
                              u0, v0, w0, kappa: float = 1.0) -> RegimeQuantities:
    u0, v0, w0 = grid.check(u0), grid.check(v0), grid.check(w0)
    for name, f in (("u0", u0), ("v0", v0), ("w0", w0)):
        if np.any(f < 0):
            raise ValueError(f"{name} has negative entries")
    for name, f in (("u0", u0), ("v0", v0)):
        if not np.any(f > 0):
            raise ValueError(f"{name} is identically zero")
    if not kappa > 0:
        raise ValueError("kappa must be positive")

    p = compute_p(grid.dim)
    r_star = source.r_star
    u_cap = 2.0 * diagnostics.sup_norm(u0)
    v_cap = 2.0 * diagnostics.sup_norm(v0)
    w_sup = diagnostics.sup_norm(w0)
    if r_star == 0:
        w_cap = w_sup
    elif params.mu == 0:
        w_cap = math.inf
    else:
        w_cap = max(w_sup, r_star / params.mu)
    weight = u_cap + v_cap + 1.0
    gradient_scale = weight * (diagnostics.w1_norm(grid, w0, 2 * (p + 1)) + r_star)
    laplacian_scale = weight * w_cap + diagnostics.w2_norm(grid, w0, p + 1) + r_star
    return RegimeQuantities(
        p=p,
        u_cap=u_cap,
        v_cap=v_cap,
        w_cap=w_cap,
        gradient_scale=gradient_scale,
        laplacian_scale=laplacian_scale,
        r_star=r_star,
        kappa=float(kappa),
        u0_w1_norm=diagnostics.w1_norm(grid, u0, 2 * p),
    )


# -- closed-form regime conditions -----------------------------------------

def _damping_primary(m: float, l: float) -> bool:
    mt = min(m, l)
    return m >= 2 and l >= 2 and l >= max(3.0, 3.0 * mt / (2.0 * mt - 3.0))


def _damping_split(m: float, l: float) -> bool:
    return (2 <= m < 3 and l >= 3.0 * m / (2.0 * m - 3.0)) or (m >= 3 and l >= 3)


def check_damping_exponents(m: float, l: float) -> bool:
    """Whether the logistic exponents are strong enough for the 2D
    boundedness result with both damping terms active.

    Evaluated in both of its equivalent forms; a disagreement raises.
    """
    if not (m > 1 and l > 1):
        raise ValueError(f"exponents must exceed 1, got m={m}, l={l}")
    a = _damping_primary(m, l)
    b = _damping_split(m, l)
    if a != b:
        raise RuntimeError(f"equivalent exponent conditions disagree at m={m}, l={l}")
    return a


@dataclass(frozen=True)
class SmallnessCheck:
    chi: float
    xi: float
    chi_bound: float
    xi_bound: float

    @property
    def chi_ok(self) -> bool:
        return self.chi <= self.chi_bound

    @property
    def xi_ok(self) -> bool:
        return self.xi <= self.xi_bound

    @property
    def holds(self) -> bool:
        return self.chi_ok and self.xi_ok

    def __bool__(self):
        return self.holds


def taxis_bounds(q: RegimeQuantities, chi: float, u0_w1_norm: float | None = None):
    """``(chi_bound, xi_bound)`` for the small-taxis condition at a given chi.

    A zero ``gradient_scale`` (or zero ``u0`` norm) leaves the corresponding
    bound infinite, i.e. the inequality holds trivially.
    """
    norm = q.u0_w1_norm if u0_w1_norm is None else u0_w1_norm
    p = q.p
    chi_bound = math.inf if q.gradient_scale == 0 else q.kappa / q.gradient_scale
    bracket = (chi * q.gradient_scale) ** (2 * (p + 1)) + (chi * q.laplacian_scale) ** (p + 1) + 1.0
    denom = norm * bracket ** (1.0 / (2 * p))
    xi_bound = math.inf if denom == 0 else q.kappa / denom
    return chi_bound, xi_bound


def check_taxis_smallness(q: RegimeQuantities, chi: float, xi: float,
                          u0_w1_norm: float | None = None) -> SmallnessCheck:
    """Small-taxis condition under which the undamped system stays bounded."""
    chi_bound, xi_bound = taxis_bounds(q, chi, u0_w1_norm)
    return SmallnessCheck(chi=chi, xi=xi, chi_bound=chi_bound, xi_bound=xi_bound)
