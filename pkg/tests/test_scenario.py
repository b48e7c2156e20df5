from dataclasses import replace
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cocarry.config import PRESET_NAMES, preset
from cocarry.errors import ConfigurationError
from cocarry.human import PathScript, Segment
from cocarry.scenario import dumps, load, loads

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def test_minimal_preset_file_gives_defaults():
    cfg = loads('preset = "experiment_object"\n')
    assert cfg == preset("experiment_object")
    assert cfg.aci.M_adm == (6.0, 6.0, 6.0)
    assert cfg.aci.D_adm == (30.0, 30.0, 30.0)
    assert cfg.aci.window == 0.25
    assert cfg.weights.K == (1.0, 1.0, 1.0, 0.1, 0.1, 0.1)
    assert cfg.weights.W1 == (1000.0, 1000.0, 1000.0, 500.0, 500.0, 500.0)
    assert cfg.weights.W2 == (3.0,) * 9
    assert cfg.weights.W3 == (0.0,) * 3 + (1.0,) * 6


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_round_trip(name):
    cfg = preset(name, controller="admittance_only").with_seed(42)
    assert loads(dumps(cfg)) == cfg


@given(
    st.floats(1e-4, 1e-2),
    st.floats(0.05, 1.0),
    st.lists(
        st.tuples(
            st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)),
            st.floats(0.1, 5),
            st.sampled_from(["pulling", "pushing", "custom"]),
        ),
        min_size=1,
        max_size=5,
    ),
)
def test_round_trip_custom_paths(dt, window, rows):
    base = preset("rope")
    cfg = replace(
        base,
        dt=dt,
        aci=replace(base.aci, window=window),
        path=PathScript(tuple(Segment(*r) for r in rows), 0.3),
    )
    assert loads(dumps(cfg)) == cfg


def test_preset_coupling_overridden_per_field():
    cfg = loads('preset = "experiment_object"\n[coupling]\nstiffness_compression = 400.0\n')
    assert cfg.coupling.stiffness_compression == 400.0
    assert cfg.coupling.stiffness_tension == preset("experiment_object").coupling.stiffness_tension


def test_dt_zero_names_dt_with_line():
    with pytest.raises(ConfigurationError, match=r"f\.toml:2: dt"):
        loads('preset = "rope"\ndt = 0\n', "f.toml")


def test_unknown_keys_are_errors():
    with pytest.raises(ConfigurationError, match=r":3: \[aci\] gain"):
        loads('preset = "rope"\n[aci]\ngain = 2.0\n', "f.toml")
    with pytest.raises(ConfigurationError, match="unknown key 'colour'"):
        loads('preset = "rope"\ncolour = "red"\n')


def test_missing_required_keys():
    with pytest.raises(ConfigurationError, match="kind"):
        loads('[path]\nsegments = [[1, 0, 0, 3, "pulling"]]\n')
    with pytest.raises(ConfigurationError, match=r"\[path\]"):
        loads('[coupling]\nkind = "rope"\nstiffness_compression = 0.0\nstiffness_lateral = [0.0, 0.0]\n')


def test_out_of_range_values():
    with pytest.raises(ConfigurationError, match="M_adm"):
        loads('preset = "rope"\n[aci]\nM_adm = [6, -1, 6]\n', "f.toml")
    with pytest.raises(ConfigurationError, match="segment 0"):
        loads('preset = "rope"\n[path]\nsegments = [[1, 0, 0, 0, "x"]]\n')
    with pytest.raises(ConfigurationError, match="max_duration"):
        loads('preset = "rope"\nmax_duration = -3\n')
    with pytest.raises(ConfigurationError, match="preset"):
        loads('preset = "glass"\n')


def test_malformed_file():
    with pytest.raises(ConfigurationError, match="malformed"):
        loads("dt = = 1\n")


def test_shipped_scenarios_parse(tmp_path):
    files = sorted(SCENARIOS.glob("*.toml"))
    assert len(files) >= 4
    for f in files:
        before = f.read_bytes()
        cfg = load(f)
        assert f.read_bytes() == before
        out = tmp_path / f.name
        out.write_text(dumps(cfg))
        assert load(out) == cfg


def test_unreadable_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_bytes(b"name = \"\xff\"\n")
    with pytest.raises(ConfigurationError):
        load(bad)
