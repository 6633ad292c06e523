"""Run orchestration: single runs, sweeps, kappa calibration, scenario suites.

A run directory holds::

    config.txt          the full configuration (every key)
    report.txt          regime constants, condition checks, verdict
    series.csv          tracked functionals, one row per observation
    windows.csv         unit-window space-time integrals
    snapshots/          <field>_t<time>.csv at run.snapshot_times
    plot/<column>.dat   two-column "t value" files for external plotting
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import diagnostics
from .config import NUMERIC_KINDS, SCHEMA, ConfigError, RunConfig
from .diagnostics import NormSeries, Verdict, classify_run, series_window_integrals
from .grid import Grid, write_field_csv
from .model import (RegimeQuantities, SmallnessCheck, State, check_damping_exponents,
                    check_taxis_smallness, compute_regime_quantities, taxis_bounds)
from .solver import advance_to

log = logging.getLogger(__name__)

SUITE_HORIZON = 50.0


@dataclass
class RunRecord:
    config: RunConfig
    quantities: RegimeQuantities
    series: NormSeries
    verdict: Verdict
    wall_time: float
    steps: int
    min_dt: float
    termination: str
    smallness: SmallnessCheck
    damping_ok: bool
    message: str = ""
    final_state: State | None = None

    def report(self) -> str:
        lines = []
        for k, val in self.quantities.as_dict().items():
            lines.append(f"regime.{k} = {_fmt(val)}")
        s = self.smallness
        lines += [
            f"taxis_smallness.chi_bound = {_fmt(s.chi_bound)}",
            f"taxis_smallness.xi_bound = {_fmt(s.xi_bound)}",
            f"taxis_smallness.chi_ok = {s.chi_ok}",
            f"taxis_smallness.xi_ok = {s.xi_ok}",
            f"taxis_smallness.holds = {s.holds}",
            f"damping_exponents.holds = {self.damping_ok}",
            f"verdict.kind = {self.verdict.kind}",
            f"verdict.ceiling = {_fmt(self.verdict.ceiling)}",
        ]
        for k, val in self.verdict.ceilings.items():
            lines.append(f"verdict.ceiling_{k} = {_fmt(val)}")
        lines += [
            f"verdict.details = {self.verdict.details}",
            f"run.termination = {self.termination}",
            f"run.steps = {self.steps}",
            f"run.min_dt = {_fmt(self.min_dt)}",
            f"run.wall_time = {self.wall_time:.3f}",
        ]
        if self.message:
            lines.append(f"run.message = {self.message}")
        return "\n".join(lines) + "\n"


def _fmt(x):
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def _initial_state(config: RunConfig):
    grid = config.grid()
    u0, v0, w0 = config.initial_fields(grid)
    return grid, State(grid, 0.0, u0, v0, w0)


def regime_summary(config: RunConfig):
    """``(quantities, smallness, damping_ok)`` for the configured initial data."""
    grid, state = _initial_state(config)
    params = config.params()
    source = config.source(grid)
    try:
        q = compute_regime_quantities(grid, params, source, state.u, state.v, state.w,
                                      config["run.kappa"])
    except ValueError as exc:
        raise ConfigError(f"initial data: {exc}") from exc
    return q, check_taxis_smallness(q, params.chi, params.xi), check_damping_exponents(params.m, params.l)


def run(config: RunConfig, out_dir=None, keep_state: bool = False) -> RunRecord:
    """Simulate ``config`` to its horizon, classify it, optionally persist."""
    started = time.perf_counter()
    grid, state = _initial_state(config)
    params = config.params()
    source = config.source(grid)
    q, smallness, damping_ok = regime_summary(config)
    ctrl = config.control(threshold=q.blowup_threshold)
    horizon = config.horizon
    stride = config["run.stride"]
    max_steps = config["run.max_steps"] or None

    series = NormSeries(p=q.p, p_list=config["run.p_list"])
    series.record(grid, 0.0, state.u, state.v, state.w)
    last = {"dt": 0.0}

    def observe(s, report, k):
        last["dt"] = report.dt_used
        if k % stride == 0:
            series.record(grid, s.t, s.u, s.v, s.w, step=k, dt=report.dt_used)

    snapshots = {}
    stops = sorted({t for t in config["run.snapshot_times"] if 0 < t < horizon} | {horizon})
    if 0.0 in config["run.snapshot_times"]:
        snapshots[0.0] = state.copy()
    steps, min_dt, termination, message = 0, math.inf, "t_end", ""
    for stop in stops:
        result = advance_to(state, stop, params, source, ctrl,
                            observer=lambda s, r, k: observe(s, r, k + steps),
                            max_steps=None if max_steps is None else max_steps - steps)
        steps += result.steps
        min_dt = min(min_dt, result.min_dt)
        state = result.state
        termination, message = result.reason, result.message
        if termination != "t_end":
            break
        if stop in config["run.snapshot_times"]:
            snapshots[stop] = state.copy()
    if series.rows[-1][1] != steps:
        series.record(grid, state.t, state.u, state.v, state.w, step=steps, dt=last["dt"])
    series.terminated = termination
    verdict = classify_run(series, threshold=ctrl.blowup_threshold or math.inf, horizon=horizon)
    record = RunRecord(config=config, quantities=q, series=series, verdict=verdict,
                       wall_time=time.perf_counter() - started, steps=steps,
                       min_dt=min_dt if steps else 0.0, termination=termination,
                       smallness=smallness, damping_ok=damping_ok, message=message,
                       final_state=state if keep_state else None)
    if out_dir is not None:
        persist(record, out_dir, grid, snapshots)
    return record


def persist(record: RunRecord, out_dir, grid: Grid, snapshots: dict | None = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(record.config.serialize())
    (out / "report.txt").write_text(record.report())
    (out / "series.csv").write_text(record.series.to_csv())
    windows = series_window_integrals(record.series, record.config.horizon)
    lines = ["t_start," + ",".join(windows.values)]
    for k, t in enumerate(windows.starts):
        lines.append(",".join([repr(float(t))] + [repr(float(windows.values[n][k])) for n in windows.values]))
    (out / "windows.csv").write_text("\n".join(lines) + "\n")
    plot = out / "plot"
    plot.mkdir(exist_ok=True)
    times = record.series.times
    for name in record.series.columns[3:]:
        col = record.series.column(name)
        (plot / f"{name}.dat").write_text("".join(f"{t!r} {x!r}\n" for t, x in zip(times.tolist(), col.tolist())))
    if snapshots:
        snap = out / "snapshots"
        snap.mkdir(exist_ok=True)
        for t, s in snapshots.items():
            for name, f in zip("uvw", s.fields()):
                write_field_csv(snap / f"{name}_t{t!r}.csv", grid, f)
    return out


# -- sweeps ------------------------------------------------------------------

@dataclass
class SweepResult:
    axis: str
    values: list
    records: list[RunRecord]

    def summary(self) -> str:
        lines = [f"{self.axis},verdict,ceiling,steps"]
        for val, rec in zip(self.values, self.records):
            lines.append(f"{val!r},{rec.verdict.kind},{rec.verdict.ceiling!r},{rec.steps}")
        return "\n".join(lines) + "\n"


def _check_axis(axis: str):
    if axis not in SCHEMA or SCHEMA[axis][0] not in NUMERIC_KINDS:
        raise ConfigError(f"unknown or non-numeric sweep axis {axis!r}")


def sweep(base: RunConfig, axis: str, values, workers: int = 1, out_dir=None) -> SweepResult:
    """Independent runs of ``base`` with ``axis`` set to each of ``values``."""
    _check_axis(axis)
    values = list(values)
    configs = [base.with_value(axis, v) for v in values]
    dirs = [None] * len(configs)
    if out_dir is not None:
        dirs = [Path(out_dir) / f"run_{i:03d}" for i in range(len(configs))]
    if workers > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run, configs, dirs))
    else:
        records = [run(c, d) for c, d in zip(configs, dirs)]
    result = SweepResult(axis, values, records)
    if out_dir is not None:
        (Path(out_dir) / "summary.csv").write_text(result.summary())
    return result


# -- kappa calibration ---------------------------------------------------------

class CalibrationError(RuntimeError):
    pass


@dataclass
class KappaCalibration:
    kappa: float
    bracket: tuple[float, float]
    history: list[tuple[float, float, float, str]] = field(default_factory=list)  # kappa, chi, xi, verdict
    upper_bounded: bool = False

    def summary(self) -> str:
        lines = [f"kappa = {self.kappa!r}", f"bracket = {self.bracket[0]!r},{self.bracket[1]!r}"]
        if self.upper_bounded:
            lines.append("note = upper end of the search range stayed bounded")
        for k, chi, xi, verdict in self.history:
            lines.append(f"trial kappa={k!r} chi={chi!r} xi={xi!r} verdict={verdict}")
        return "\n".join(lines) + "\n"


def taxis_at_threshold(base: RunConfig, kappa: float) -> tuple[float, float]:
    """Largest ``(chi, xi)`` allowed by the small-taxis condition at ``kappa``."""
    q, _, _ = regime_summary(base.with_value("run.kappa", kappa))
    if q.gradient_scale == 0:
        raise CalibrationError("gradient scale is zero (w0 = 0 and no source); chi is unconstrained")
    chi = kappa / q.gradient_scale
    _, xi = taxis_bounds(q, chi)
    return chi, xi


def calibrate_kappa(base: RunConfig, lo: float, hi: float, iterations: int = 6) -> KappaCalibration:
    """Largest kappa (within ``[lo, hi]``) whose threshold taxis strengths
    still give a bounded run, found by geometric bisection."""
    if not (0 < lo <= hi):
        raise ValueError("need 0 < lo <= hi")
    if base["params.eta1"] != 0 or base["params.eta2"] != 0:
        raise ConfigError("kappa calibration needs params.eta1 = params.eta2 = 0")
    history = []

    def bounded(kappa):
        chi, xi = taxis_at_threshold(base, kappa)
        rec = run(base.updated({"params.chi": chi, "params.xi": xi, "run.kappa": kappa}))
        history.append((kappa, chi, xi, rec.verdict.kind))
        log.info("kappa=%g chi=%g xi=%g -> %s", kappa, chi, xi, rec.verdict.kind)
        return rec.verdict.kind == "bounded"

    if not bounded(lo):
        raise CalibrationError(f"run at the lower end kappa={lo} is not bounded; "
                               "refine the grid, lengthen the horizon, or lower lo")
    if lo == hi:
        return KappaCalibration(lo, (lo, hi), history)
    if bounded(hi):
        return KappaCalibration(hi, (hi, hi), history, upper_bounded=True)
    a, b = lo, hi
    for _ in range(iterations):
        mid = math.sqrt(a * b)
        if bounded(mid):
            a = mid
        else:
            b = mid
    return KappaCalibration(a, (a, b), history)


# -- scenario suites -------------------------------------------------------------

@dataclass
class Check:
    label: str
    passed: bool
    detail: str = ""
    informational: bool = False


@dataclass
class SuiteReport:
    name: str
    checks: list[Check] = field(default_factory=list)
    records: dict[str, RunRecord] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if not c.informational)

    def add(self, label, passed, detail="", informational=False):
        self.checks.append(Check(label, bool(passed), detail, informational))

    def text(self) -> str:
        lines = [f"suite {self.name}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            tag = "INFO" if c.informational else ("PASS" if c.passed else "FAIL")
            lines.append(f"  [{tag}] {c.label}" + (f" ({c.detail})" if c.detail else ""))
        for name, rec in self.records.items():
            ceil = ", ".join(f"{k}={v:.6g}" for k, v in rec.verdict.ceilings.items())
            lines.append(f"  run {name}: verdict={rec.verdict.kind} steps={rec.steps} ceilings: {ceil}")
        return "\n".join(lines) + "\n"


def _base(**overrides) -> RunConfig:
    values = {
        "grid.dim": 2, "grid.cells": (32, 32), "grid.extent": (1.0, 1.0),
        "params.chi": 1.0, "params.xi": 1.0, "params.lambda": 1.0, "params.mu": 1.0,
        "source.kind": "constant", "source.r0": 1.0,
        "initial.u": "cosine-bump", "initial.u_level": 1.0, "initial.u_amplitude": 0.5,
        "initial.v": "gaussian-bump", "initial.v_level": 0.5, "initial.v_amplitude": 1.0,
        "initial.v_width": 0.15,
        "initial.w": "random-smooth", "initial.w_level": 1.0, "initial.w_amplitude": 0.5,
        "initial.seed": 11,
        "control.mode": "imex-diffusion", "control.dt_max": 0.05,
        "run.horizon": SUITE_HORIZON, "run.stride": 10,
    }
    values.update(overrides)
    return RunConfig.from_mapping(values)


def mass_identity_config() -> RunConfig:
    return _base(**{"control.mode": "explicit", "run.horizon": 1.0, "run.stride": 50,
                    "params.eta1": 0.0, "params.eta2": 0.0})


def steady_state_config() -> RunConfig:
    # u = v = 1 solve the logistic terms; w = r0 / (2 lambda + mu) = 1 exactly
    return _base(**{
        "params.eta1": 1.0, "params.eta2": 1.0, "params.lambda": 1.0, "params.mu": 1.0,
        "source.r0": 3.0,
        "initial.u": "constant", "initial.v": "constant", "initial.w": "constant",
        "initial.u_level": 1.0, "initial.v_level": 1.0, "initial.w_level": 1.0,
    })


def weak_exploiter_taxis_config(xi: float = 1e-3, cells: int = 64) -> RunConfig:
    return _base(**{"grid.cells": (cells, cells), "params.eta1": 1.0, "params.m": 2.0,
                    "params.eta2": 0.0, "params.chi": 2.0, "params.xi": xi,
                    "run.stride": 20})


def _mass_identities(report: SuiteReport, out_dir):
    cfg = mass_identity_config()
    rec = run(cfg, None if out_dir is None else Path(out_dir) / "conservative", keep_state=True)
    report.records["conservative"] = rec
    s = rec.series
    for f in ("u", "v"):
        mass = s.column(f"{f}_mass")
        drift = float(np.max(np.abs(mass - mass[0])))
        report.add(f"{f} mass conserved", drift <= min(1e-8, 1e-10 * (1 + rec.steps)), f"max drift {drift:.3e}")
    q = rec.quantities
    w_bound = max(float(np.max(cfg.initial_fields()[2])), q.r_star / cfg["params.mu"])
    w_peak = float(np.max(s.column("w_sup")))
    report.add("w below max(sup w0, r*/mu)", w_peak <= w_bound + 1e-10, f"peak {w_peak!r} bound {w_bound!r}")

    cfg2 = cfg.updated({"params.eta1": 1.0, "params.m": 2.0, "params.eta2": 1.0, "params.l": 3.0})
    rec2 = run(cfg2, None if out_dir is None else Path(out_dir) / "logistic")
    report.records["logistic"] = rec2
    grid = cfg2.grid()
    for f in ("u", "v"):
        mass = rec2.series.column(f"{f}_mass")
        bound = max(mass[0], grid.measure)
        report.add(f"{f} mass below max(mass0, |Omega|)", float(np.max(mass)) <= bound + 1e-8,
                   f"max {float(np.max(mass))!r} bound {bound!r}")
    for name, r in (("conservative", rec), ("logistic", rec2)):
        report.add(f"{name}: run completed", r.termination == "t_end", r.termination)
    final = rec.final_state
    lowest = min(float(f.min()) for f in final.fields())
    report.add("final fields nonnegative", lowest >= -1e-13, f"min {lowest:.3e}")


def _steady_state(report: SuiteReport, out_dir):
    cfg = steady_state_config()
    rec = run(cfg, None if out_dir is None else Path(out_dir) / "steady")
    report.records["steady"] = rec
    report.add("verdict bounded", rec.verdict.kind == "bounded", rec.verdict.kind)
    exact = all(rec.verdict.ceilings[f"{f}_sup"] == 1.0 for f in "uvw")
    report.add("ceilings equal initial sup norms exactly", exact, str(rec.verdict.ceilings))


def _small_data(report: SuiteReport, out_dir):
    # initial u, w and the source scaled jointly by eps
    for eps in (0.1, 0.01):
        cfg = _base(**{"params.eta1": 0.0, "params.eta2": 0.0,
                       "initial.u_level": eps, "initial.u_amplitude": 0.5 * eps,
                       "initial.w_level": eps, "initial.w_amplitude": 0.5 * eps,
                       "source.r0": eps})
        name = f"eps={eps!r}"
        rec = run(cfg, None if out_dir is None else Path(out_dir) / f"eps_{eps!r}")
        report.records[name] = rec
        report.add(f"{name}: bounded", rec.verdict.kind == "bounded", rec.verdict.kind)
        report.add(f"{name}: small-taxis condition at kappa={cfg['run.kappa']!r}",
                   rec.smallness.holds,
                   f"chi<= {rec.smallness.chi_bound:.4g}, xi<= {rec.smallness.xi_bound:.4g}",
                   informational=True)


def _weak_exploiter_taxis(report: SuiteReport, out_dir):
    cfg = weak_exploiter_taxis_config()
    rec = run(cfg, None if out_dir is None else Path(out_dir) / "xi_small")
    report.records["xi=1e-3"] = rec
    report.add("verdict bounded", rec.verdict.kind == "bounded", rec.verdict.kind)
    finite = all(math.isfinite(rec.verdict.ceilings[c]) for c in ("u_sup", "v_sup"))
    report.add("u, v sup ceilings finite", finite, str(rec.verdict.ceilings))
    p = rec.quantities.p
    w1 = max(float(np.max(rec.series.column(f"{f}_W1_{2 * p}"))) for f in "uvw")
    report.add(f"W1,{2 * p} norms finite", math.isfinite(w1), f"max {w1:.6g}")


def _strong_damping(report: SuiteReport, out_dir):
    for m, l in ((2.0, 6.0), (3.0, 3.0), (2.0, 5.0)):
        cfg = _base(**{"params.eta1": 1.0, "params.eta2": 1.0, "params.m": m, "params.l": l})
        name = f"m={m:g},l={l:g}"
        rec = run(cfg, None if out_dir is None else Path(out_dir) / name.replace(",", "_"))
        report.records[name] = rec
        if rec.damping_ok:
            report.add(f"{name}: exponent condition true", True)
            report.add(f"{name}: bounded", rec.verdict.kind == "bounded", rec.verdict.kind)
        else:
            report.add(f"{name}: exponent condition false, outside regime", True,
                       f"verdict {rec.verdict.kind}", informational=True)


def gradient_inequality_ratios(dim: int, cells: int, samples: int = 100, p: int = 2, seed: int = 0):
    """Ratios lhs/rhs of the gradient inequality over random smooth Neumann fields."""
    from .config import random_smooth

    grid = Grid(dim, (1.0,) * dim, (cells,) * dim)
    rng = np.random.default_rng([seed, dim])
    ratios = []
    for _ in range(samples):
        level = 1.0 + rng.random()
        f = level + 0.9 * level * random_smooth(grid, rng, modes=4)
        ratios.append(diagnostics.check_gradient_inequality(grid, f, p, dim).ratio)
    return np.array(ratios)


def _gradient_inequality(report: SuiteReport, out_dir):
    lines = ["dim,cells,max_ratio"]
    for dim in (1, 2):
        coarse = float(np.max(gradient_inequality_ratios(dim, 128)))
        fine = float(np.max(gradient_inequality_ratios(dim, 256)))
        lines += [f"{dim},128,{coarse!r}", f"{dim},256,{fine!r}"]
        report.add(f"n={dim}: max ratio <= 1.1 at 128 cells/axis", coarse <= 1.1, f"{coarse:.4g}")
        report.add(f"n={dim}: max ratio decreases under refinement", fine < coarse,
                   f"{coarse:.6g} -> {fine:.6g}")
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "ratios.csv").write_text("\n".join(lines) + "\n")


SUITES = {
    "mass-identities": _mass_identities,
    "steady-state": _steady_state,
    "small-data": _small_data,
    "weak-exploiter-taxis": _weak_exploiter_taxis,
    "strong-damping": _strong_damping,
    "gradient-inequality": _gradient_inequality,
}


def scenario_suite(name: str, out_dir=None) -> SuiteReport:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    report = SuiteReport(name)
    SUITES[name](report, out_dir)
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "suite_report.txt").write_text(report.text())
    return report
