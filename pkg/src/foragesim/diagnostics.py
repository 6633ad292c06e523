"""Norms, tracked functionals and run classification.

Discrete Sobolev norms use cell-centred gradients (mean of the two adjacent
face differences) and the Hessian convention documented in ``grid``::

    |f|_{W^{1,q}} = (|f|_q^q + | |grad f| |_q^q)^{1/q}
    |f|_{W^{2,q}} = (|f|_q^q + | |grad f| |_q^q + | |D^2 f| |_q^q)^{1/q}

Boundary cells are weighted like interior cells.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, gradient_magnitude, hessian_frobenius_sq, laplacian


def sup_norm(f) -> float:
    f = np.asarray(f)
    return float(np.max(np.abs(f))) if f.size else 0.0


def lp_norm(grid: Grid, f, p: float) -> float:
    if not p >= 1:
        raise ValueError(f"Lp norm needs p >= 1, got {p}")
    if math.isinf(p):
        return sup_norm(f)
    f = grid.check(f)
    return float((np.sum(np.abs(f) ** p) * grid.cell_volume) ** (1.0 / p))


def w1_norm(grid: Grid, f, p: float) -> float:
    if not p >= 1:
        raise ValueError(f"W1p norm needs p >= 1, got {p}")
    f = grid.check(f)
    total = np.sum(np.abs(f) ** p) + np.sum(gradient_magnitude(grid, f) ** p)
    return float((total * grid.cell_volume) ** (1.0 / p))


def w2_norm(grid: Grid, f, p: float) -> float:
    if not p >= 1:
        raise ValueError(f"W2p norm needs p >= 1, got {p}")
    f = grid.check(f)
    hess = np.sqrt(hessian_frobenius_sq(grid, f))
    total = np.sum(np.abs(f) ** p) + np.sum(gradient_magnitude(grid, f) ** p) + np.sum(hess ** p)
    return float((total * grid.cell_volume) ** (1.0 / p))


def integral_of_power(grid: Grid, f, q: float) -> float:
    """``int |f|^q dx``."""
    return float(np.sum(np.abs(grid.check(f)) ** q) * grid.cell_volume)


# -- comparison ODE --------------------------------------------------------

def ode_comparison_bound(y0: float, a: float, b: float) -> float:
    """Uniform bound ``y0 + 2b + b/a`` for nonnegative ``y`` with
    ``y' + a y <= f`` and every unit-window integral of ``f`` at most ``b``."""
    if not (a > 0 and b > 0):
        raise ValueError("a and b must be positive")
    if y0 < 0:
        raise ValueError("y0 must be nonnegative")
    return y0 + 2.0 * b + b / a


def comparison_trajectory(y0: float, a: float, forcing, piece: float) -> np.ndarray:
    """Exact solution of ``y' = -a y + f`` at the breakpoints of a
    piecewise-constant ``f`` (value ``forcing[k]`` on ``[k*piece, (k+1)*piece)``)."""
    decay = math.exp(-a * piece)
    gain = (1.0 - decay) / a
    y = np.empty(len(forcing) + 1)
    y[0] = y0
    for k, f in enumerate(forcing):
        y[k + 1] = y[k] * decay + f * gain
    return y


def max_window_integral(forcing, piece: float, window: float = 1.0) -> float:
    """Largest ``int_t^{t+window} f`` for piecewise-constant ``f``.

    The window integral is piecewise linear in ``t`` with kinks at
    breakpoints, so checking windows that start or end on a breakpoint is
    exact when ``window`` is a multiple of ``piece``.
    """
    k = int(round(window / piece))
    if not math.isclose(k * piece, window):
        raise ValueError("window must be a multiple of the piece length")
    f = np.asarray(forcing, dtype=float)
    padded = np.concatenate([f, np.zeros(k)])
    csum = np.concatenate([[0.0], np.cumsum(padded)])
    return float(np.max(csum[k:] - csum[:-k]) * piece)


# -- functional inequality for gradients -------------------------------------

@dataclass(frozen=True)
class InequalityCheck:
    lhs: float
    rhs: float
    ratio: float
    artifact: bool  # rhs == 0 < lhs: discretisation effect, not a violation


def check_gradient_inequality(grid: Grid, u, p: int, n: int | None = None) -> InequalityCheck:
    """Compare ``int |grad u|^{2(p+1)}`` with
    ``2(n + 4p^2) |u|_inf^2 int |grad u|^{2(p-1)} |D^2 u|^2``."""
    n = grid.dim if n is None else n
    u = grid.check(u)
    grad = gradient_magnitude(grid, u)
    hess = hessian_frobenius_sq(grid, u)
    vol = grid.cell_volume
    lhs = float(np.sum(grad ** (2 * (p + 1))) * vol)
    rhs = float(2.0 * (n + 4.0 * p * p) * sup_norm(u) ** 2
                * np.sum(grad ** (2 * (p - 1)) * hess) * vol)
    if rhs == 0.0:
        return InequalityCheck(lhs, rhs, 0.0, lhs > 0.0)
    return InequalityCheck(lhs, rhs, lhs / rhs, False)


# -- time series -------------------------------------------------------------

def series_columns(p: int, p_list) -> list[str]:
    cols = ["t", "step", "dt", "u_sup", "v_sup", "w_sup", "u_mass", "v_mass", "w_mass"]
    for q in p_list:
        tag = _tag(q)
        cols += [f"u_L{tag}", f"v_L{tag}", f"w_L{tag}"]
    q = 2 * p
    cols += [f"u_W1_{q}", f"v_W1_{q}", f"w_W1_{q}",
             f"int_grad_w_pow{2 * (p + 1)}", f"int_grad_u_pow{2 * p}",
             f"int_lap_w_pow{p + 1}", f"int_grad_u_pow{2 * (p + 1)}"]
    return cols


def _tag(q):
    return str(int(q)) if float(q).is_integer() else repr(float(q))


@dataclass
class NormSeries:
    """Column store of tracked functionals, one row per observation."""

    p: int
    p_list: tuple[float, ...] = (2.0, 4.0)
    rows: list[list[float]] = field(default_factory=list)
    terminated: str = ""  # empty while running; "t_end", "blow-up", ...

    @property
    def columns(self) -> list[str]:
        return series_columns(self.p, self.p_list)

    def record(self, grid: Grid, t: float, u, v, w, step: int = 0, dt: float = 0.0) -> None:
        p = self.p
        row = [float(t), float(step), float(dt),
               sup_norm(u), sup_norm(v), sup_norm(w),
               float(np.sum(u) * grid.cell_volume),
               float(np.sum(v) * grid.cell_volume),
               float(np.sum(w) * grid.cell_volume)]
        for q in self.p_list:
            row += [lp_norm(grid, u, q), lp_norm(grid, v, q), lp_norm(grid, w, q)]
        grad_u = gradient_magnitude(grid, u)
        grad_w = gradient_magnitude(grid, w)
        vol = grid.cell_volume
        row += [w1_norm(grid, u, 2 * p), w1_norm(grid, v, 2 * p), w1_norm(grid, w, 2 * p),
                float(np.sum(grad_w ** (2 * (p + 1))) * vol),
                float(np.sum(grad_u ** (2 * p)) * vol),
                float(np.sum(np.abs(laplacian(grid, w)) ** (p + 1)) * vol),
                float(np.sum(grad_u ** (2 * (p + 1))) * vol)]
        self.rows.append(row)

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        idx = self.columns.index(name)
        return np.array([r[idx] for r in self.rows])

    @property
    def times(self) -> np.ndarray:
        return self.column("t")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([repr(x) for x in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, p: int, p_list=(2.0, 4.0)) -> "NormSeries":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        series = cls(p, tuple(p_list))
        if header != series.columns:
            raise ValueError("CSV columns do not match the expected layout")
        series.rows = [[float(x) for x in row] for row in reader if row]
        return series


# -- windowed space-time integrals ------------------------------------------

@dataclass
class WindowIntegrals:
    tau: float
    starts: np.ndarray
    values: dict[str, np.ndarray]
    truncated: bool


def window_length(horizon: float) -> float:
    return min(1.0, horizon / 2.0)


def window_integrals(times, integrands: dict[str, np.ndarray], horizon: float,
                     window: float | None = None) -> WindowIntegrals:
    """Trapezoidal ``int_t^{t+tau} g(s) ds`` for every sample time ``t`` with
    ``t + tau`` inside the record. ``tau`` defaults to ``min(1, horizon/2)``;
    a window longer than the record gives one truncated window."""
    times = np.asarray(times, dtype=float)
    tau = window_length(horizon) if window is None else float(window)
    span = times[-1] - times[0] if len(times) else 0.0
    truncated = tau > span * (1 + 1e-12)
    values = {}
    if truncated:
        starts = times[:1].copy()
    else:
        starts = times[times + tau <= times[-1] * (1 + 1e-12) + 1e-15]
    for name, g in integrands.items():
        g = np.asarray(g, dtype=float)
        if len(times) < 2:
            values[name] = np.zeros(len(starts))
            continue
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * np.diff(times))])
        ends = np.minimum(starts + tau, times[-1])
        values[name] = np.interp(ends, times, cum) - np.interp(starts, times, cum)
    return WindowIntegrals(tau, starts, values, truncated)


def series_window_integrals(series: NormSeries, horizon: float) -> WindowIntegrals:
    p = series.p
    names = [f"int_lap_w_pow{p + 1}", f"int_grad_u_pow{2 * (p + 1)}"]
    return window_integrals(series.times, {n: series.column(n) for n in names}, horizon)


# -- verdicts ----------------------------------------------------------------

VERDICTS = ("bounded", "growing", "blow-up", "inconclusive")
SUP_COLUMNS = ("u_sup", "v_sup", "w_sup")
PLATEAU_FACTOR = 1.01
GROWTH_LOG = math.log(10.0)


@dataclass(frozen=True)
class Verdict:
    kind: str
    ceiling: float
    ceilings: dict[str, float]
    details: str


def classify_run(series: NormSeries, threshold: float = math.inf, horizon: float | None = None) -> Verdict:
    """Operational boundedness test on the sup norms of ``u, v, w``.

    * ``blow-up`` when the run was terminated by the solver;
    * ``bounded`` when no sup norm sets a new high in the final quarter of
      the record (more than 1% above its maximum over the rest) and all stay
      below ``threshold``;
    * ``growing`` when some sup norm ends more than tenfold above its start;
    * ``inconclusive`` otherwise.

    Only relative positions within the record are used, so the verdict does
    not change under a uniform shift or rescaling of time.
    """
    if len(series) == 0:
        return Verdict("inconclusive", 0.0, {}, "empty series")
    times = series.times
    ceilings = {c: float(np.max(series.column(c))) for c in SUP_COLUMNS}
    ceiling = max(ceilings.values())
    end_note = f"terminated={series.terminated or 'unknown'} at t={times[-1]:.6g}"
    if horizon is not None and series.terminated == "t_end" and times[-1] < horizon * (1 - 1e-12):
        end_note += f" (horizon {horizon:.6g} not reached)"
    if series.terminated == "blow-up":
        return Verdict("blow-up", ceiling, ceilings, end_note)

    t0, t1 = times[0], times[-1]
    span = t1 - t0
    if span > 0 and len(series) >= 4:
        frac = (times - t0) / span
        last = frac >= 0.75
        earlier = ~last
        plateau = True
        for c in SUP_COLUMNS:
            col = series.column(c)
            if np.max(col[last]) > PLATEAU_FACTOR * np.max(col[earlier]):
                plateau = False
        if plateau and ceiling < threshold:
            return Verdict("bounded", ceiling, ceilings, end_note)
    for c in SUP_COLUMNS:
        col = series.column(c)
        if col[0] > 0 and col[-1] > 0 and math.log(col[-1] / col[0]) > GROWTH_LOG:
            return Verdict("growing", ceiling, ceilings, f"{c} grew tenfold; {end_note}")
    return Verdict("inconclusive", ceiling, ceilings, end_note)
