"""Experiment drivers: side-by-side propagation and the Egorov comparison.

Three trajectories start from the same data: the classical flow of the center
(Stormer-Verlet), the wave packet ``(z, C)`` (splitting integrator) and the
Gaussian moments ``(z, Sigma)`` (image splitting).  They are compared against
expectation values from the Egorov ensemble at matching record times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dynamics
from .dynamics import SimParams
from .egorov import GaussianState, expect, propagate_ensemble, sample
from .geometry import SiegelPoint, sigma, symplectic_unit
from .integrators import StepperConfig, cayley_step, moment_splitting_step, splitting_step, verlet_step
from .potentials import Potential


# reference torsional setup: q(0) = (1, 0), p(0) = (-1, 1), A(0) = B(0) = [[1, 0.5], [0.5, 1]], m = 1
TORSIONAL_Z0 = np.array([1.0, 0.0, -1.0, 1.0])
TORSIONAL_AB0 = np.array([[1.0, 0.5], [0.5, 1.0]])
TORSIONAL_DT = 0.01
TORSIONAL_N = 10_000


def torsional_initial() -> tuple[np.ndarray, SiegelPoint]:
    return TORSIONAL_Z0.copy(), SiegelPoint(TORSIONAL_AB0, TORSIONAL_AB0)


@dataclass
class Trajectories:
    t: np.ndarray
    z: np.ndarray  # wave packet center, (n, 2d)
    A: np.ndarray
    B: np.ndarray
    z_moment: np.ndarray
    Sigma: np.ndarray
    z_cl: np.ndarray
    H: np.ndarray  # H_gwp along the wave packet
    h: np.ndarray  # h_moment along the moment trajectory
    V_hbar: np.ndarray  # corrected potential along the wave packet
    V_cl: np.ndarray  # V along the classical trajectory

    @property
    def d(self) -> int:
        return self.z.shape[1] // 2

    def sigma_mismatch(self) -> np.ndarray:
        """Per-record ``max |sigma(A, B) - Sigma|``."""
        return np.array([
            np.max(np.abs(sigma(SiegelPoint(A, B)) - S)) for A, B, S in zip(self.A, self.B, self.Sigma)
        ])

    def symplectic_drift(self) -> np.ndarray:
        """Per-record ``max |Sigma J Sigma - J|``."""
        J = symplectic_unit(self.d)
        return np.array([np.max(np.abs(S @ J @ S - J)) for S in self.Sigma])


def propagate_all(
    z0, C0: SiegelPoint, params: SimParams, potential: Potential, cfg: StepperConfig
) -> Trajectories:
    """Advance the classical, wave-packet and moment descriptions side by side."""
    z = np.asarray(z0, dtype=float).copy()
    zc, zm = z.copy(), z.copy()
    C = C0
    S = sigma(C0)
    d = C0.d
    rec = {k: [] for k in ("t", "z", "A", "B", "zm", "S", "zc", "H", "h", "Vh", "Vc")}
    for n in range(cfg.n_steps + 1):
        if n % cfg.record_stride == 0:
            q = z[:d]
            rec["t"].append(n * cfg.dt)
            rec["z"].append(z)
            rec["A"].append(np.array(C.A))
            rec["B"].append(np.array(C.B))
            rec["zm"].append(zm)
            rec["S"].append(S)
            rec["zc"].append(zc)
            rec["H"].append(dynamics.H_gwp(z, C, params, potential))
            rec["h"].append(dynamics.h_moment(zm, S, params, potential))
            rec["Vh"].append(dynamics.corrected_potential(q, np.linalg.inv(C.B), params, potential))
            rec["Vc"].append(float(potential.value(zc[:d])))
        if n < cfg.n_steps:
            z, C = splitting_step(z, C, cfg.dt, params, potential)
            zm, S = moment_splitting_step(zm, S, cfg.dt, params, potential)
            zc = verlet_step(zc, cfg.dt, params, potential)
    a = {k: np.array(v) for k, v in rec.items()}
    return Trajectories(a["t"], a["z"], a["A"], a["B"], a["zm"], a["S"], a["zc"], a["H"], a["h"], a["Vh"], a["Vc"])


@dataclass
class EgorovCurves:
    t: np.ndarray
    mean_z: np.ndarray  # (n, 2d)
    se_z: np.ndarray
    mean_V: np.ndarray
    se_V: np.ndarray
    n_samples: int
    seed: int


def egorov_curves(
    state: GaussianState, params: SimParams, potential: Potential, cfg: StepperConfig, n_samples: int, seed: int
) -> EgorovCurves:
    """Expectation values of ``z`` and ``V`` over the classically transported ensemble."""
    ens = sample(state, n_samples, seed)
    d = state.d
    t, mz, sz, mv, sv = [], [], [], [], []
    for snap in propagate_ensemble(ens, params, potential, cfg):
        t.append(snap.t)
        stats = [expect(snap, lambda X, k=k: X[:, k]) for k in range(2 * d)]
        mz.append([s[0] for s in stats])
        sz.append([s[1] for s in stats])
        m, s = expect(snap, lambda X: potential.value(X[:, :d]))
        mv.append(m)
        sv.append(s)
    return EgorovCurves(np.array(t), np.array(mz), np.array(sz), np.array(mv), np.array(sv), n_samples, seed)


@dataclass(frozen=True)
class ConvergencePoint:
    hbar: float
    t_final: float
    err_semi: float
    err_cl: float
    mc_se: float
    n_samples: int

    def resolved(self, factor: float = 3.0) -> bool:
        """Both errors exceed ``factor`` Monte-Carlo standard errors."""
        return self.err_semi > factor * self.mc_se and self.err_cl > factor * self.mc_se


def convergence_point(
    z0, C0: SiegelPoint, params: SimParams, potential: Potential, cfg: StepperConfig, n_samples: int, seed: int
) -> ConvergencePoint:
    """Euclidean errors of the semiclassical and classical centers against Egorov at ``t_final``."""
    end = StepperConfig(cfg.dt, cfg.t_final, max(cfg.n_steps, 1))
    traj = propagate_all(z0, C0, params, potential, end)
    state = GaussianState(z0, sigma(C0), params.hbar)
    eg = egorov_curves(state, params, potential, end, n_samples, seed)
    ref = eg.mean_z[-1]
    return ConvergencePoint(
        hbar=params.hbar,
        t_final=float(traj.t[-1]),
        err_semi=float(np.linalg.norm(traj.z[-1] - ref)),
        err_cl=float(np.linalg.norm(traj.z_cl[-1] - ref)),
        mc_se=float(np.linalg.norm(eg.se_z[-1])),
        n_samples=n_samples,
    )


def gated_convergence_point(
    z0, C0, params, potential, cfg, n_samples: int, seed: int, factor: float = 3.0, escalation: int = 4
) -> ConvergencePoint:
    """As :func:`convergence_point`, re-run once with ``escalation * n_samples`` if MC noise dominates."""
    pt = convergence_point(z0, C0, params, potential, cfg, n_samples, seed)
    if not pt.resolved(factor):
        pt = convergence_point(z0, C0, params, potential, cfg, escalation * n_samples, seed)
    return pt


def loglog_slope(h1: float, e1: float, h2: float, e2: float) -> float:
    return math.log(e1 / e2) / math.log(h1 / h2)


def energy_drift(traj: Trajectories) -> float:
    """``max |H(t) - H(0)| / |H(0)|`` along the wave packet."""
    return float(np.max(np.abs(traj.H - traj.H[0])) / abs(traj.H[0]))


def min_width_eigenvalue(traj: Trajectories) -> float:
    return float(min(np.linalg.eigvalsh(B)[0] for B in traj.B))


def hagedorn_trajectory(z_path, S0, dt: float, params: SimParams, potential: Potential) -> np.ndarray:
    """Cayley-propagate ``S`` along a given center path ``z_0, z_1, ...`` (one entry per step).

    The Hessian is taken at the step midpoint ``(z_n + z_{n+1})/2``.
    """
    S = np.asarray(S0, dtype=float)
    out = [S]
    for za, zb in zip(z_path[:-1], z_path[1:]):
        S = cayley_step(S, 0.5 * (np.asarray(za) + np.asarray(zb)), dt, params, potential)
        out.append(S)
    return np.array(out)
