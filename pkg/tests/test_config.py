import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gwpwigner.config import ExperimentConfig, load_config, parse_config, serialize_config, torsional_config
from gwpwigner.errors import ConfigError

BASE = """\
[system]
potential = torsional
mass = 1.0
hbar = 0.1

[initial]
q0 = [1.0, 0.0]
p0 = [-1.0, 1.0]
A0 = [1.0, 0.5, 0.5, 1.0]
B0 = [[1.0, 0.5], [0.5, 1.0]]

[integrator]
dt = 0.01
t_final = 5.0
record_stride = 1

[egorov]
n_samples = 10000
seed = 7
"""


def test_parse_reference_config():
    cfg = parse_config(BASE)
    assert cfg == torsional_config(record_stride=1, seed=7)
    assert cfg.dim == 2 and cfg.hbar == (0.1,) and cfg.mode == "propagate" and cfg.output is None
    assert np.array_equal(cfg.z0, [1.0, 0.0, -1.0, 1.0])
    assert np.array_equal(cfg.C0.B, [[1.0, 0.5], [0.5, 1.0]])


def test_hbar_list_and_comments():
    cfg = parse_config(BASE.replace("hbar = 0.1", "hbar = [0.2, 0.1, 0.05]  # sweep"))
    assert cfg.hbar == (0.2, 0.1, 0.05)


def test_round_trip_reference():
    cfg = parse_config(BASE)
    assert parse_config(serialize_config(cfg)) == cfg


finite = st.floats(-10, 10, allow_nan=False)
positive = st.floats(1e-3, 10, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(1, 3).flatmap(lambda d: st.tuples(
        st.just(d),
        st.lists(finite, min_size=d, max_size=d),
        st.lists(finite, min_size=d, max_size=d),
        st.lists(finite, min_size=d * d, max_size=d * d),
    )),
    st.lists(positive, min_size=1, max_size=4),
    positive, positive, positive,
    st.integers(1, 50), st.integers(1, 10**6), st.integers(0, 2**64 - 1),
    st.sampled_from(["propagate", "egorov", "convergence", "check"]),
)
def test_round_trip_property(shape, hbar, mass, dt, t_final, stride, n, seed, mode):
    d, q0, p0, a = shape
    A = np.array(a).reshape(d, d)
    A = 0.5 * (A + A.T)
    cfg = ExperimentConfig(
        potential="free", q0=tuple(q0), p0=tuple(p0), A0=tuple(A.ravel()), B0=tuple(np.eye(d).ravel()),
        hbar=tuple(hbar), mass=mass, dt=dt, t_final=t_final, record_stride=stride, n_samples=n, seed=seed,
        mode=mode, output="out.csv",
    )
    assert parse_config(serialize_config(cfg)) == cfg


def _error(text):
    with pytest.raises(ConfigError) as exc:
        parse_config(text, source="exp.ini")
    return str(exc.value)


@pytest.mark.parametrize(
    "old,new,line,field",
    [
        ("dt = 0.01", "dt = -0.01", 13, "dt"),
        ("dt = 0.01", "dt = abc", 13, "dt"),
        ("n_samples = 10000", "n_samples = 0", 18, "n_samples"),
        ("B0 = [[1.0, 0.5], [0.5, 1.0]]", "B0 = [[1.0, 2.0], [2.0, 1.0]]", 10, "B0"),
        ("A0 = [1.0, 0.5, 0.5, 1.0]", "A0 = [1.0, 0.5, 0.4, 1.0]", 9, "A0"),
        ("A0 = [1.0, 0.5, 0.5, 1.0]", "A0 = [1.0, 0.5, 0.5]", 9, "A0"),
        ("p0 = [-1.0, 1.0]", "p0 = [-1.0]", 8, "p0"),
        ("hbar = 0.1", "hbar = [0.1, -0.1]", 4, "hbar"),
        ("potential = torsional", "potential = morse", 2, "potential"),
        ("record_stride = 1", "record_stride = 1.5", 15, "record_stride"),
        ("seed = 7", "seed = -1", 19, "seed"),
    ],
)
def test_diagnostics_name_line_and_field(old, new, line, field):
    assert old in BASE
    msg = _error(BASE.replace(old, new))
    assert f"exp.ini:{line}" in msg and field in msg


def test_missing_and_unknown_fields():
    assert "q0" in _error(BASE.replace("q0 = [1.0, 0.0]\n", ""))
    assert "colour" in _error(BASE + "colour = red\n")
    assert "[extra]" in _error(BASE + "[extra]\nx = 1\n")
    assert "mode" in _error(BASE + "[run]\nmode = plot\n")
    assert "dim" in _error(BASE.replace("potential = torsional", "potential = torsional\ndim = 3"))


def test_syntax_error_reported():
    with pytest.raises(ConfigError):
        parse_config("no section header\n")


def test_load_config(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text(BASE)
    assert load_config(p) == parse_config(BASE)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")


def test_overrides():
    cfg = parse_config(BASE)
    assert cfg.with_overrides(seed=None) is cfg
    assert cfg.with_overrides(seed=3, output="x.csv").seed == 3
