"""Egorov / initial-value-representation reference by phase-space Monte Carlo.

Samples are drawn from the Gaussian Wigner density, transported by the
classical flow (Stormer-Verlet), and averaged.  Random numbers come from a
Philox counter-based stream keyed by the seed: sample ``i`` always owns the
same counter blocks, so any subset of samples can be regenerated on its own
and the result does not depend on evaluation order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .dynamics import SimParams
from .geometry import sym
from .integrators import StepperConfig, verlet_step
from .potentials import Potential

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class GaussianState:
    """Gaussian Wigner function with mean ``z`` and statistical covariance ``(hbar/2) Sigma``."""

    z: np.ndarray
    Sigma: np.ndarray
    hbar: float

    def __post_init__(self):
        z = np.array(self.z, dtype=float).ravel()
        Sigma = sym(np.array(self.Sigma, dtype=float))
        if Sigma.shape != (z.size, z.size) or z.size % 2:
            raise ValueError(f"inconsistent shapes: z {z.shape}, Sigma {Sigma.shape}")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        if np.linalg.eigvalsh(Sigma)[0] <= 0:
            raise ValueError("Sigma must be positive definite")
        z.setflags(write=False)
        Sigma.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "Sigma", Sigma)

    @property
    def d(self) -> int:
        return self.z.size // 2

    @property
    def covariance(self) -> np.ndarray:
        return 0.5 * self.hbar * self.Sigma


@dataclass(frozen=True)
class Ensemble:
    """``N`` equally weighted phase-space samples, with the seed they came from."""

    samples: np.ndarray
    seed: int
    t: float = 0.0
    first_index: int = 0
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        samples = np.atleast_2d(np.asarray(self.samples, dtype=float))
        if samples.shape[0] < 1:
            raise ValueError("an ensemble needs at least one sample")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "weights", np.full(samples.shape[0], 1.0 / samples.shape[0]))

    def __len__(self):
        return self.samples.shape[0]


def wigner_density(state: GaussianState, zeta) -> np.ndarray | float:
    """Evaluate ``exp(-(zeta - z)^T Sigma^-1 (zeta - z)/hbar) / ((pi hbar)^d sqrt(det Sigma))``."""
    zeta = np.asarray(zeta, dtype=float)
    dz = zeta - state.z
    quad = np.einsum("...i,ij,...j->...", dz, np.linalg.inv(state.Sigma), dz)
    norm = (np.pi * state.hbar) ** state.d * np.sqrt(np.linalg.det(state.Sigma))
    return np.exp(-quad / state.hbar) / norm


def standard_normals(seed: int, start: int, count: int, dim: int) -> np.ndarray:
    """Standard normal rows ``start .. start+count-1`` of the stream keyed by ``seed``.

    Row ``i`` is built by Box-Muller from the Philox blocks
    ``[i * nb, (i + 1) * nb)`` where ``nb = ceil(dim / 4)``.
    """
    n_pairs = (dim + 1) // 2
    nb = (2 * n_pairs + 3) // 4
    gen = np.random.Philox(key=int(seed) & (2**64 - 1))
    gen.advance(start * nb)
    raw = gen.random_raw(count * nb * 4).reshape(count, nb * 4)[:, : 2 * n_pairs]
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    r = np.sqrt(-2.0 * np.log(u[:, 0::2]))
    theta = _TWO_PI * u[:, 1::2]
    out = np.empty((count, 2 * n_pairs))
    out[:, 0::2] = r * np.cos(theta)
    out[:, 1::2] = r * np.sin(theta)
    return out[:, :dim]


def sample(state: GaussianState, n: int, seed: int, start: int = 0) -> Ensemble:
    """Draw samples ``start .. start+n-1`` as ``z + L g_i`` with ``L L^T = (hbar/2) Sigma``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    L = np.linalg.cholesky(state.covariance)
    g = standard_normals(seed, start, n, 2 * state.d)
    return Ensemble(state.z + g @ L.T, seed=seed, first_index=start)


def propagate_ensemble(
    e: Ensemble, params: SimParams, potential: Potential, cfg: StepperConfig
) -> Iterator[Ensemble]:
    """Yield the ensemble at every recorded step, each sample moved by Stormer-Verlet.

    The update is applied row-wise, so samples never interact.
    """
    z = e.samples
    t0 = e.t
    for n in range(cfg.n_steps + 1):
        if n % cfg.record_stride == 0:
            yield Ensemble(z, seed=e.seed, t=t0 + n * cfg.dt, first_index=e.first_index)
        if n < cfg.n_steps:
            z = verlet_step(z, cfg.dt, params, potential)


def expect(e: Ensemble, observable: Callable[[np.ndarray], np.ndarray]):
    """Sample mean and standard error of a vectorized observable ``(N, 2d) -> (N,)``.

    With a single sample the standard error is undefined and returned as NaN.
    """
    n = len(e)
    if n == 0:
        raise ValueError("empty ensemble")
    values = np.broadcast_to(np.asarray(observable(e.samples), dtype=float), (n,))
    mean = float(np.mean(values))
    if n < 2:
        return mean, float("nan")
    return mean, float(np.std(values, ddof=1) / np.sqrt(n))


def write_snapshot(e: Ensemble, path) -> None:
    """Write the samples as CSV with columns ``i, q1..qd, p1..pd``."""
    d = e.samples.shape[1] // 2
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["i"] + [f"q{k + 1}" for k in range(d)] + [f"p{k + 1}" for k in range(d)])
        for i, row in enumerate(e.samples):
            writer.writerow([e.first_index + i] + [f"{x:.17g}" for x in row])
