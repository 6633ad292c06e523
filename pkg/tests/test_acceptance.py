"""Acceptance criteria, one test per criterion, each at its stated tolerance.

Every test records a PASS/FAIL line through the ``criterion`` fixture; the
lines are printed together at the end of the pytest run.
"""

import math
import time

import numpy as np
import pytest

from foragesim import harness
from foragesim.config import RunConfig
from foragesim.diagnostics import comparison_trajectory, max_window_integral, ode_comparison_bound
from foragesim.grid import Grid, cell_integral, laplacian
from foragesim.model import (ModelParams, NutrientSource, RegimeQuantities, State,
                             check_damping_exponents, check_taxis_smallness, compute_p,
                             compute_regime_quantities)
from foragesim.solver import StepControl, advance_to


def _timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


def test_01_mass_conservation(criterion):
    cfg = harness._base(**{"grid.cells": (64, 64), "run.horizon": 10.0,
                           "params.eta1": 0.0, "params.eta2": 0.0, "run.stride": 1})
    rec, seconds = _timed(lambda: harness.run(cfg))
    drift = {f: float(np.max(np.abs(rec.series.column(f"{f}_mass") - rec.series.column(f"{f}_mass")[0])))
             for f in "uv"}
    ok = rec.termination == "t_end" and max(drift.values()) <= 1e-8 and seconds <= 30
    criterion("1 mass conservation", ok,
              f"drift u={drift['u']:.2e} v={drift['v']:.2e}, {len(rec.series)} samples, {seconds:.1f}s")
    assert ok


def _max_mass_defect(dt):
    cfg = harness._base(**{"grid.cells": (32, 32), "params.eta1": 1.0, "params.m": 2.0,
                           "params.eta2": 0.0, "params.chi": 0.2, "params.xi": 0.2})
    grid, params, src = cfg.grid(), cfg.params(), cfg.source()
    state = State(grid, 0.0, *cfg.initial_fields(grid))
    defects = []
    prev = [cell_integral(grid, state.u)]

    def observe(s, report, k):
        mass = cell_integral(grid, s.u)
        rate = (mass - prev[0]) / report.dt_used
        expected = params.eta1 * (mass - cell_integral(grid, s.u ** params.m))
        defects.append(abs(rate - expected))
        prev[0] = mass

    res = advance_to(state, 2.0, params, src, StepControl(dt_max=dt, mode="imex-diffusion"),
                     observer=observe)
    assert res.min_dt == pytest.approx(dt)  # dt_max, not stability, sets the step
    return max(defects)


def test_02_mass_ode_defect_halves(criterion):
    (coarse, fine), seconds = _timed(lambda: (_max_mass_defect(2e-3), _max_mass_defect(1e-3)))
    ratio = coarse / fine
    ok = 1.6 <= ratio <= 2.4 and seconds <= 60
    criterion("2 mass ODE defect halves with dt", ok,
              f"defect {coarse:.3e} -> {fine:.3e}, ratio {ratio:.3f}, {seconds:.1f}s")
    assert ok


def _random_runs():
    out = []
    for seed, r0, mu in ((1, 0.5, 1.0), (2, 4.0, 1.5), (3, 1.0, 0.2)):
        cfg = RunConfig.from_mapping({
            "grid.cells": (32, 32), "params.chi": 2.0, "params.xi": 1.0,
            "params.lambda": 1.0, "params.mu": mu, "params.eta1": 1.0, "params.eta2": 0.5,
            "params.l": 3.0, "source.r0": r0,
            # u sits on a zero background, so positivity is tested near zero
            "initial.u": "gaussian-bump", "initial.u_level": 0.0, "initial.u_amplitude": 2.0,
            "initial.v": "random-smooth", "initial.w": "random-smooth",
            "initial.v_amplitude": 1.0, "initial.w_amplitude": 1.0,
            "initial.seed": seed, "control.mode": "explicit", "control.dt_max": 1.0,
        })
        grid, params, src = cfg.grid(), cfg.params(), cfg.source()
        u0, v0, w0 = cfg.initial_fields(grid)
        bound = max(float(w0.max()), src.r_star / mu)
        peak, low = [float(w0.max())], [min(float(f.min()) for f in (u0, v0, w0))]

        def observe(s, report, k):
            peak[0] = max(peak[0], float(s.w.max()))
            low[0] = min(low[0], report.min_value)

        res = advance_to(State(grid, 0.0, u0, v0, w0), math.inf, params, src, cfg.control(),
                         observer=observe, max_steps=10_000)
        out.append((seed, res.steps, peak[0], bound, low[0]))
    return out


_RANDOM = {}


def _random_results():
    if "runs" not in _RANDOM:
        _RANDOM["runs"] = _timed(_random_runs)
    return _RANDOM["runs"]


def test_03_nutrient_sup_bound(criterion):
    runs, seconds = _random_results()
    excess = max(peak - bound for _, _, peak, bound, _ in runs)
    ok = all(steps == 10_000 for _, steps, *_ in runs) and excess <= 1e-10 and seconds <= 60
    criterion("3 nutrient sup bound", ok,
              f"{len(runs)} runs x 10^4 steps, max(w - bound) = {excess:.3e}, {seconds:.1f}s")
    assert ok


def test_04_positivity(criterion):
    runs, _ = _random_results()
    lowest = min(low for *_, low in runs)
    ok = lowest >= -1e-13
    criterion("4 positivity", ok, f"lowest entry {lowest:.3e}")
    assert ok


def test_05_analytic_oracles(criterion):
    def heat():
        grid = Grid.unit(128)
        cos = np.cos(np.pi * grid.centers()[0])
        state = State(grid, 0.0, 1.0 + cos, grid.full(1.0), grid.full(1.0))
        quiet = ModelParams(chi=0.0, xi=0.0, lam=0.0, mu=0.0)
        res = advance_to(state, 0.1, quiet, NutrientSource(), StepControl(dt_max=1.0, cfl_safety=0.5))
        amp = 2 * cell_integral(grid, (res.state.u - 1.0) * cos)
        return abs(amp / math.exp(-math.pi ** 2 * 0.1) - 1.0)

    def relax():
        grid = Grid.unit(16, 16)
        params = ModelParams(chi=0.0, xi=0.0, lam=0.0, mu=1.5)
        src = NutrientSource("constant", r0=2.0)
        state = State(grid, 0.0, grid.zeros(), grid.zeros(), grid.full(3.0))
        dt, t_end = 0.01, 2.0
        res = advance_to(state, t_end, params, src, StepControl(dt_max=dt, cfl_safety=0.9,
                                                                  mode="imex-diffusion"))
        exact = 2.0 / 1.5 + (3.0 - 2.0 / 1.5) * math.exp(-1.5 * t_end)
        return float(np.max(np.abs(res.state.w - exact))), 2 * dt * t_end

    (heat_err, (w_err, w_tol)), seconds = _timed(lambda: (heat(), relax()))
    ok = heat_err <= 0.01 and w_err <= w_tol and seconds <= 60
    criterion("5 analytic oracles", ok,
              f"heat decay rel err {heat_err:.2e}; w relaxation err {w_err:.2e} <= {w_tol:.2e}")
    assert ok


def _orders(errors):
    e = np.asarray(errors)
    return np.log2(e[:-1] / e[1:])


def test_06_convergence_order(criterion):
    lap_err = []
    for n in (32, 64, 128, 256):
        grid = Grid.unit(n)
        x = grid.centers()[0]
        lap_err.append(np.max(np.abs(laplacian(grid, np.cos(np.pi * x)) + np.pi ** 2 * np.cos(np.pi * x))))
    step_err = []
    quiet = ModelParams(chi=0.0, xi=0.0, lam=0.0, mu=0.0)
    t_end = 0.05
    for n in (16, 32, 64, 128):
        grid = Grid.unit(n)
        cos = np.cos(np.pi * grid.centers()[0])
        state = State(grid, 0.0, 1.0 + cos, grid.full(1.0), grid.full(1.0))
        res = advance_to(state, t_end, quiet, NutrientSource(), StepControl(dt_max=1.0, cfl_safety=0.05))
        step_err.append(np.max(np.abs(res.state.u - 1.0 - math.exp(-math.pi ** 2 * t_end) * cos)))
    lap_o, step_o = _orders(lap_err), _orders(step_err)
    ok = np.all(lap_o >= 1.9) and np.all(step_o >= 1.9)
    criterion("6 convergence order", ok,
              f"laplacian {np.round(lap_o, 3).tolist()}, diffusion stepping {np.round(step_o, 3).tolist()}")
    assert ok


def test_07_comparison_ode(criterion):
    rng = np.random.default_rng(20261016)
    piece = 0.02
    worst = -math.inf
    for _ in range(50):
        y0 = 10 * rng.random()
        a = 10 ** rng.uniform(-1.5, 1.0)
        forcing = rng.exponential(2.0, size=rng.integers(100, 3000))
        spikes = rng.random(forcing.size) < 0.01
        forcing[spikes] *= 40
        # strictly below the forcing: y' + a y <= f
        slack = forcing * rng.random(forcing.size) * 0.2
        y = comparison_trajectory(y0, a, forcing - slack, piece)
        b = max_window_integral(forcing, piece)
        worst = max(worst, float(np.max(y)) - ode_comparison_bound(y0, a, b))
    ok = worst <= 1e-6
    criterion("7 comparison ODE bound", ok, f"50 instances, max(y - bound) = {worst:.3g}")
    assert ok


_RATIOS = {}


def _ratios(dim, cells):
    key = (dim, cells)
    if key not in _RATIOS:
        _RATIOS[key] = float(np.max(harness.gradient_inequality_ratios(dim, cells, samples=100, p=2)))
    return _RATIOS[key]


@pytest.mark.parametrize("dim", [1, 2])
def test_08a_gradient_inequality_ratio(criterion, dim):
    ratio = _ratios(dim, 128)
    ok = ratio <= 1.1
    criterion(f"8 gradient inequality n={dim}: max ratio <= 1.1", ok, f"max ratio {ratio:.6g}")
    assert ok


@pytest.mark.parametrize("dim", [1, 2])
def test_08b_gradient_inequality_refinement(criterion, dim):
    coarse, fine = _ratios(dim, 128), _ratios(dim, 256)
    ok = fine < coarse
    criterion(f"8 gradient inequality n={dim}: max ratio decreases under refinement", ok,
              f"{coarse:.6g} -> {fine:.6g}")
    assert ok


def test_09_condition_checkers(criterion):
    results = {
        "p(2)=2": compute_p(2) == 2, "p(3)=2": compute_p(3) == 2, "p(4)=3": compute_p(4) == 3,
        "(2,6) true": check_damping_exponents(2, 6) is True,
        "(3,3) true": check_damping_exponents(3, 3) is True,
        "(2,5) false": check_damping_exponents(2, 5) is False,
    }
    q = RegimeQuantities(2, 2.0, 2.0, 1.0, 2.0, 1.0, 0.0, 1.0, 1.0)
    results["chi=0.4 ok"] = check_taxis_smallness(q, 0.4, 0.0).chi_ok
    results["chi=0.6 fails"] = not check_taxis_smallness(q, 0.6, 0.0).chi_ok
    results["chi=xi=0 ok"] = check_taxis_smallness(q, 0.0, 0.0).holds
    grid = Grid.unit(8, 8)
    one = grid.full(1.0)
    for w_level, r0, cap in ((2.0, 3.0, 3.0), (2.0, 1.0, 2.0)):
        qq = compute_regime_quantities(grid, ModelParams(), NutrientSource(r0=r0), one, one,
                                       grid.full(w_level))
        results[f"w cap {cap:g}"] = qq.w_cap == cap
    qz = compute_regime_quantities(grid, ModelParams(), NutrientSource(r0=0.0), one, one, grid.zeros())
    results["zero nutrient"] = (qz.u_cap, qz.v_cap, qz.w_cap, qz.gradient_scale, qz.laplacian_scale) == (2, 2, 0, 0, 0)
    failed = [k for k, v in results.items() if not v]
    criterion("9 condition checkers", not failed,
              f"{len(results) - len(failed)}/{len(results)} examples" + (f", failed {failed}" if failed else ""))
    assert not failed


def test_10_regime_evidence(criterion, tmp_path):
    (weak, steady), seconds = _timed(lambda: (harness.scenario_suite("weak-exploiter-taxis", tmp_path / "a"),
                                              harness.scenario_suite("steady-state", tmp_path / "b")))
    rec = weak.records["xi=1e-3"]
    ceilings = rec.verdict.ceilings
    ok = weak.passed and steady.passed and seconds <= 600
    criterion("10 regime evidence", ok,
              f"weak exploiter taxis: {rec.verdict.kind}, u_sup<={ceilings['u_sup']:.4g}, "
              f"v_sup<={ceilings['v_sup']:.4g}; steady state: "
              f"{steady.records['steady'].verdict.kind} at {steady.records['steady'].verdict.ceiling!r}; "
              f"{seconds:.1f}s")
    assert ok


def test_11_determinism(criterion, tmp_path):
    harness.scenario_suite("mass-identities", tmp_path / "first")
    harness.scenario_suite("mass-identities", tmp_path / "second")
    files = sorted(p.relative_to(tmp_path / "first") for p in (tmp_path / "first").rglob("*.csv"))
    same = all((tmp_path / "first" / f).read_bytes() == (tmp_path / "second" / f).read_bytes() for f in files)
    ok = bool(files) and same
    criterion("11 determinism", ok, f"{len(files)} CSV files compared byte for byte")
    assert ok
