import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foragesim.config import SCHEMA, ConfigError, RunConfig, random_smooth
from foragesim.grid import Grid, gradient_faces


def test_defaults_are_valid_and_complete():
    cfg = RunConfig.from_mapping()
    assert set(cfg.values) == set(SCHEMA)
    assert cfg.grid().shape == (32, 32)


def test_parse_serialize_parse_is_idempotent():
    text = """
    # a comment
    grid.dim = 1
    grid.cells = 40
    grid.extent = 2.5   # trailing comment
    params.chi = 0.1
    run.p_list = 2, 3.5
    initial.w = random-smooth
    """
    cfg = RunConfig.parse(text)
    once = cfg.serialize()
    again = RunConfig.parse(once)
    assert again == cfg
    assert again.serialize() == once
    assert cfg["grid.extent"] == (2.5,)
    assert cfg["run.p_list"] == (2.0, 3.5)


@settings(max_examples=40)
@given(st.floats(0, 50, allow_nan=False), st.floats(1.0001, 8), st.integers(4, 200))
def test_roundtrip_preserves_floats_exactly(chi, m, cells):
    cfg = RunConfig.from_mapping({"params.chi": chi, "params.m": m, "grid.cells": (cells, 8)})
    assert RunConfig.parse(cfg.serialize()) == cfg


def test_errors_are_collected():
    text = "grid.dimension = 2\nparams.chi = abc\nnot a pair\ngrid.dim = 2\ngrid.dim = 1\n"
    with pytest.raises(ConfigError) as info:
        RunConfig.parse(text)
    assert len(info.value.errors) == 2  # line-level errors come first
    with pytest.raises(ConfigError) as info:
        RunConfig.parse("grid.dimension = 2\nparams.chi = abc\n")
    msgs = info.value.errors
    assert any("unknown key" in e for e in msgs) and any("params.chi" in e for e in msgs)


@pytest.mark.parametrize("key, value", [
    ("run.horizon", 0.0), ("grid.cells", (2, 32)), ("params.m", 1.0), ("control.mode", "rk4"),
    ("control.cfl_safety", 1.5), ("initial.u_amplitude", 2.0), ("run.stride", 0),
    ("grid.dim", 3), ("source.r0", -1.0),
])
def test_invalid_values(key, value):
    with pytest.raises(ConfigError):
        RunConfig.from_mapping({key: value})


def test_with_value_rejects_unknown_path():
    with pytest.raises(ConfigError):
        RunConfig.from_mapping().with_value("params.gamma", 1.0)


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.load(tmp_path / "absent.txt")


def test_initial_fields_are_seeded_and_bounded():
    cfg = RunConfig.from_mapping({"initial.u": "random-smooth", "initial.u_level": 2.0,
                                  "initial.u_amplitude": 1.5, "initial.seed": 4})
    a = cfg.initial_fields()
    b = cfg.initial_fields()
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    u = a[0]
    assert np.all(np.abs(u - 2.0) <= 1.5 + 1e-12)
    grid = cfg.grid()
    assert np.mean(u) == pytest.approx(2.0, abs=1e-12)
    other = cfg.with_value("initial.seed", 5).initial_fields()[0]
    assert not np.array_equal(u, other)


def test_random_smooth_is_neumann_compatible():
    firsts = []
    for n in (64, 128):
        grid = Grid.unit(n, n)
        f = random_smooth(grid, np.random.default_rng(0))
        assert np.max(np.abs(f)) <= 1.0 + 1e-12
        g = gradient_faces(grid, f)[0]
        firsts.append(np.max(np.abs(g[1])))
    # zero slope at the wall: the first interior difference shrinks like h
    assert firsts[0] / firsts[1] == pytest.approx(2.0, rel=0.05)


def test_presets_build_domain_objects():
    cfg = RunConfig.from_mapping({"source.profile": "cosine-bump", "source.kind": "separable-decay",
                                  "source.delta": 0.5, "control.blowup_threshold": 7.0})
    src = cfg.source()
    assert src.r_star == pytest.approx(1.0, abs=1e-2)
    assert cfg.control(threshold=99.0).blowup_threshold == 7.0
    assert RunConfig.from_mapping().control(threshold=99.0).blowup_threshold == 99.0
