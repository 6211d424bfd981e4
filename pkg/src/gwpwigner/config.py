"""Experiment configuration files.

INI-style text with sections; vectors and matrices are bracketed lists, and
matrices are read row-major with ``d`` inferred from the length::

    [system]
    potential = torsional
    mass = 1.0
    hbar = 0.1                 # or [0.2, 0.1, 0.05] for a sweep

    [initial]
    q0 = [1.0, 0.0]
    p0 = [-1.0, 1.0]
    A0 = [1.0, 0.5, 0.5, 1.0]
    B0 = [[1.0, 0.5], [0.5, 1.0]]

    [integrator]
    dt = 0.01
    t_final = 5.0
    record_stride = 10

    [egorov]
    n_samples = 10000
    seed = 1

    [run]
    mode = propagate
    output = out.csv
"""

from __future__ import annotations

import configparser
import math
import re
from ast import literal_eval
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .geometry import SiegelPoint
from .potentials import Potential, parse_potential

MODES = ("propagate", "egorov", "convergence", "check")

_SCHEMA = {
    "system": {"potential", "dim", "mass", "hbar"},
    "initial": {"q0", "p0", "A0", "B0"},
    "integrator": {"dt", "t_final", "record_stride"},
    "egorov": {"n_samples", "seed"},
    "run": {"mode", "output"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    potential: str
    q0: tuple
    p0: tuple
    A0: tuple  # row-major d*d
    B0: tuple
    hbar: tuple = (0.1,)
    mass: float = 1.0
    dt: float = 0.01
    t_final: float = 5.0
    record_stride: int = 10
    n_samples: int = 10_000
    seed: int = 0
    mode: str = "propagate"
    output: str | None = None
    dim: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "dim", len(self.q0))

    @property
    def z0(self) -> np.ndarray:
        return np.array(self.q0 + self.p0, dtype=float)

    @property
    def C0(self) -> SiegelPoint:
        d = self.dim
        return SiegelPoint(np.reshape(self.A0, (d, d)), np.reshape(self.B0, (d, d)))

    def build_potential(self) -> Potential:
        return parse_potential(self.potential, self.dim)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self


def _line_index(text: str) -> dict:
    """Map ``(section, key)`` to its 1-based line number."""
    where = {}
    section = None
    for n, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        m = re.match(r"^\[([^\]]+)\]$", s)
        if m:
            section = m.group(1).strip().lower()
            continue
        m = re.match(r"^([A-Za-z_][\w]*)\s*[=:]", s)
        if m and section is not None:
            where[(section, m.group(1))] = n
    return where


class _Reader:
    def __init__(self, cp, lines, source):
        self.cp = cp
        self.lines = lines
        self.source = source

    def fail(self, section, key, msg):
        line = self.lines.get((section, key))
        at = f"{self.source}:{line}" if line else self.source
        raise ConfigError(f"{at}: [{section}] {key}: {msg}")

    def has(self, section, key):
        return self.cp.has_option(section, key)

    def raw(self, section, key, default=None):
        if not self.has(section, key):
            if default is None:
                self.fail(section, key, "required field is missing")
            return default
        return self.cp.get(section, key)

    def literal(self, section, key, default=None):
        raw = self.raw(section, key, default)
        if not isinstance(raw, str):
            return raw
        try:
            return literal_eval(raw.strip())
        except (ValueError, SyntaxError):
            self.fail(section, key, f"cannot parse value {raw.strip()!r}")

    def number(self, section, key, default, kind=float):
        v = self.literal(section, key, default)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(section, key, f"expected a number, got {v!r}")
        if kind is int:
            if isinstance(v, float) and not v.is_integer():
                self.fail(section, key, f"expected an integer, got {v!r}")
            return int(v)
        v = float(v)
        if not math.isfinite(v):
            self.fail(section, key, "value must be finite")
        return v

    def vector(self, section, key, default=None):
        v = self.literal(section, key, default)
        try:
            arr = np.array(v, dtype=float).ravel()
        except (TypeError, ValueError):
            self.fail(section, key, f"expected a list of numbers, got {v!r}")
        if arr.size == 0 or not np.all(np.isfinite(arr)):
            self.fail(section, key, "expected a non-empty list of finite numbers")
        return tuple(float(x) for x in arr)


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse configuration text; raises :class:`ConfigError` naming the line and field."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    lines = _line_index(text)
    r = _Reader(cp, lines, source)

    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key in cp.options(section):
            if key not in _SCHEMA[section]:
                r.fail(section, key, "unknown field")

    q0 = r.vector("initial", "q0")
    d = len(q0)
    p0 = r.vector("initial", "p0")
    if len(p0) != d:
        r.fail("initial", "p0", f"expected {d} entries to match q0, got {len(p0)}")
    if r.has("system", "dim"):
        dim = r.number("system", "dim", None, int)
        if dim != d:
            r.fail("system", "dim", f"dim = {dim} but q0 has {d} entries")
    mats = {}
    for key in ("A0", "B0"):
        m = r.vector("initial", key)
        if len(m) != d * d:
            r.fail("initial", key, f"expected {d * d} entries (row-major {d}x{d}), got {len(m)}")
        M = np.reshape(m, (d, d))
        if np.max(np.abs(M - M.T)) > 1e-12 * max(1.0, np.max(np.abs(M))):
            r.fail("initial", key, "matrix must be symmetric")
        mats[key] = m
    B0 = np.reshape(mats["B0"], (d, d))
    if np.linalg.eigvalsh(0.5 * (B0 + B0.T))[0] <= 0:
        r.fail("initial", "B0", "matrix must be positive definite")

    hbar = r.vector("system", "hbar", "0.1")
    if any(h <= 0 for h in hbar):
        r.fail("system", "hbar", "hbar must be positive")
    mass = r.number("system", "mass", 1.0)
    if mass <= 0:
        r.fail("system", "mass", "mass must be positive")
    potential = r.raw("system", "potential").strip()
    try:
        parse_potential(potential, d)
    except (ValueError, SyntaxError, TypeError) as exc:
        r.fail("system", "potential", str(exc))

    dt = r.number("integrator", "dt", 0.01)
    if dt <= 0:
        r.fail("integrator", "dt", "dt must be positive")
    t_final = r.number("integrator", "t_final", 5.0)
    if t_final < 0:
        r.fail("integrator", "t_final", "t_final must be non-negative")
    stride = r.number("integrator", "record_stride", 10, int)
    if stride < 1:
        r.fail("integrator", "record_stride", "record_stride must be at least 1")

    n_samples = r.number("egorov", "n_samples", 10_000, int)
    if n_samples < 1:
        r.fail("egorov", "n_samples", "n_samples must be at least 1")
    seed = r.number("egorov", "seed", 0, int)
    if not 0 <= seed < 2**64:
        r.fail("egorov", "seed", "seed must be an unsigned 64-bit integer")

    mode = r.raw("run", "mode", "propagate").strip()
    if mode not in MODES:
        r.fail("run", "mode", f"expected one of {', '.join(MODES)}, got {mode!r}")
    output = r.raw("run", "output", "").strip() or None

    return ExperimentConfig(
        potential=potential, q0=q0, p0=p0, A0=mats["A0"], B0=mats["B0"], hbar=hbar, mass=mass,
        dt=dt, t_final=t_final, record_stride=stride, n_samples=n_samples, seed=seed,
        mode=mode, output=output,
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text, source=str(path))


def _list(values) -> str:
    return "[" + ", ".join(repr(float(v)) for v in values) + "]"


def serialize_config(cfg: ExperimentConfig) -> str:
    """Text that :func:`parse_config` maps back to an equal config."""
    out = [
        "[system]",
        f"potential = {cfg.potential}",
        f"dim = {cfg.dim}",
        f"mass = {cfg.mass!r}",
        f"hbar = {_list(cfg.hbar)}",
        "",
        "[initial]",
        f"q0 = {_list(cfg.q0)}",
        f"p0 = {_list(cfg.p0)}",
        f"A0 = {_list(cfg.A0)}",
        f"B0 = {_list(cfg.B0)}",
        "",
        "[integrator]",
        f"dt = {cfg.dt!r}",
        f"t_final = {cfg.t_final!r}",
        f"record_stride = {cfg.record_stride}",
        "",
        "[egorov]",
        f"n_samples = {cfg.n_samples}",
        f"seed = {cfg.seed}",
        "",
        "[run]",
        f"mode = {cfg.mode}",
    ]
    if cfg.output:
        out.append(f"output = {cfg.output}")
    return "\n".join(out) + "\n"


def torsional_config(hbar=(0.1,), **kw) -> ExperimentConfig:
    """The reference torsional setup (``m = 1``, ``dt = 0.01``, ``T = 5``)."""
    ab = (1.0, 0.5, 0.5, 1.0)
    base = dict(potential="torsional", q0=(1.0, 0.0), p0=(-1.0, 1.0), A0=ab, B0=ab, hbar=tuple(hbar))
    base.update(kw)
    return ExperimentConfig(**base)
