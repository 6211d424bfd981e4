"""Time steppers.

The wave-packet Hamiltonian splits into a kinetic part (free flight plus the
Riccati flow ``Cdot = -C^2/m``) and a potential part (an affine kick of ``p`` and
``A`` with ``q`` and ``B`` frozen).  Both sub-flows are exact, so their Strang
composition is symplectic, reversible and second order.  Each sub-flow acts on
the width by a linear fractional transformation whose matrix is also the
congruence factor applied to ``Sigma`` by :func:`moment_splitting_step`; this
makes ``sigma(C_n) == Sigma_n`` hold step by step up to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dynamics import SimParams, corrected_force, hessian_H_cl, split
from .errors import DegenerateActionError, StepTooLargeError
from .geometry import SiegelPoint, blocks, moebius, spd_inverse, sym, symplectic_unit
from .potentials import Potential


@dataclass(frozen=True)
class StepperConfig:
    dt: float = 0.01
    t_final: float = 5.0
    record_stride: int = 10

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_final >= 0:
            raise ValueError(f"t_final must be non-negative, got {self.t_final}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError(f"record_stride must be a positive integer, got {self.record_stride}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    def record_steps(self) -> list[int]:
        """Step indices at which a state is recorded (always includes 0)."""
        return list(range(0, self.n_steps + 1, self.record_stride))


def verlet_step(z, dt: float, params: SimParams, potential: Potential) -> np.ndarray:
    """Kick-drift-kick Stormer-Verlet; ``z`` may be a batch of shape ``(n, 2d)``."""
    q, p = split(z)
    p = p - 0.5 * dt * potential.gradient(q)
    q = q + dt * p / params.mass
    p = p - 0.5 * dt * potential.gradient(q)
    return np.concatenate([q, p], axis=-1)


def kinetic_factor(dt: float, mass: float, d: int) -> np.ndarray:
    """Exact flow map ``[[I, dt I/m], [0, I]]`` of the kinetic linearization."""
    eye = np.eye(d)
    return np.block([[eye, dt / mass * eye], [np.zeros((d, d)), eye]])


def potential_factor(dt: float, hess) -> np.ndarray:
    """Exact flow map ``[[I, 0], [-dt D^2V, I]]`` of the frozen-Hessian kick."""
    d = hess.shape[0]
    eye = np.eye(d)
    return np.block([[eye, np.zeros((d, d))], [-dt * hess, eye]])


def riccati_drift(C: SiegelPoint, dt: float, mass: float) -> SiegelPoint:
    """Exact solution ``C (I + dt C/m)^-1`` of ``Cdot = -C^2/m``."""
    try:
        return moebius(kinetic_factor(dt, mass, C.d), C)
    except DegenerateActionError as exc:
        raise StepTooLargeError(f"Riccati drift is singular at dt={dt}; use a smaller step") from exc


def _gwp_kick(q, p, C, tau, params, potential):
    Binv = spd_inverse(C.B, "B")
    p = p + tau * corrected_force(q, Binv, params, potential)
    return p, SiegelPoint(C.A - tau * potential.hessian(q), C.B)


def splitting_step(z, C: SiegelPoint, dt: float, params: SimParams, potential: Potential):
    """One Strang step (half kick, drift, half kick) for the wave packet."""
    q, p = split(z)
    p, C = _gwp_kick(q, p, C, 0.5 * dt, params, potential)
    q = q + dt * p / params.mass
    C = riccati_drift(C, dt, params.mass)
    p, C = _gwp_kick(q, p, C, 0.5 * dt, params, potential)
    return np.concatenate([q, p]), C


def _moment_kick(q, p, Sigma, tau, params, potential):
    p = p + tau * corrected_force(q, blocks(Sigma)[0], params, potential)
    F = potential_factor(tau, potential.hessian(q))
    return p, sym(F @ Sigma @ F.T)


def moment_splitting_step(z, Sigma, dt: float, params: SimParams, potential: Potential):
    """Image of :func:`splitting_step` on the Gaussian moments ``(z, Sigma)``."""
    q, p = split(z)
    Sigma = np.asarray(Sigma, dtype=float)
    p, Sigma = _moment_kick(q, p, Sigma, 0.5 * dt, params, potential)
    q = q + dt * p / params.mass
    F = kinetic_factor(dt, params.mass, len(q))
    Sigma = sym(F @ Sigma @ F.T)
    p, Sigma = _moment_kick(q, p, Sigma, 0.5 * dt, params, potential)
    return np.concatenate([q, p]), Sigma


def cayley(X) -> np.ndarray:
    """``(I - X/2)^-1 (I + X/2)``; symplectic whenever ``X`` is Hamiltonian."""
    eye = np.eye(X.shape[0])
    lhs = eye - 0.5 * X
    if np.linalg.cond(lhs) > 1e12:
        raise StepTooLargeError("I - dt M / 2 is singular; use a smaller step")
    return np.linalg.solve(lhs, eye + 0.5 * X)


def cayley_step(S, z_mid, dt: float, params: SimParams, potential: Potential) -> np.ndarray:
    """Propagate ``S`` by ``cay(dt J D^2H_cl(z_mid))``."""
    q, _ = split(z_mid)
    M = symplectic_unit(len(q)) @ hessian_H_cl(q, params, potential)
    return cayley(dt * M) @ np.asarray(S, dtype=float)


def rk4_step(rhs: Callable[[np.ndarray], np.ndarray], state, dt: float) -> np.ndarray:
    """Classical fourth-order Runge-Kutta step for an autonomous ``rhs``."""
    y = np.asarray(state, dtype=float)
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * dt * k1)
    k3 = rhs(y + 0.5 * dt * k2)
    k4 = rhs(y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def pack_gwp(z, C: SiegelPoint) -> np.ndarray:
    """Flatten ``(z, A, B)`` for use with :func:`rk4_step`."""
    return np.concatenate([np.asarray(z, dtype=float), C.A.ravel(), C.B.ravel()])


def unpack_gwp(y, d: int):
    z = y[: 2 * d]
    A = y[2 * d : 2 * d + d * d].reshape(d, d)
    B = y[2 * d + d * d :].reshape(d, d)
    return z, SiegelPoint(A, B)
