"""Hamiltonians and vector fields.

Phase-space points ``z`` are 1-D arrays ``(q_1..q_d, p_1..p_d)``.  Three
descriptions of the same semiclassical motion live here: the wave packet on
``R^2d x H_d``, the Gaussian moments ``(z, Sigma)`` on ``R^2d x sym(2d)``, and the
linearized flow of a symplectic matrix ``S`` with ``Sigma = S S^T``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry
from .geometry import SiegelPoint, TangentHd, spd_inverse, symplectic_unit
from .potentials import Potential


@dataclass(frozen=True)
class SimParams:
    hbar: float
    mass: float = 1.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")


def split(z):
    z = np.asarray(z, dtype=float)
    d = z.shape[-1] // 2
    return z[..., :d], z[..., d:]


def hessian_H_cl(q, params: SimParams, potential: Potential) -> np.ndarray:
    """``D^2 H_cl = [[D^2V(q), 0], [0, I/m]]``."""
    d = len(q)
    return np.block([
        [potential.hessian(q), np.zeros((d, d))],
        [np.zeros((d, d)), np.eye(d) / params.mass],
    ])


def H_cl(z, params: SimParams, potential: Potential):
    q, p = split(z)
    return np.sum(p * p, axis=-1) / (2.0 * params.mass) + potential.value(q)


def corrected_potential(q, M, params: SimParams, potential: Potential) -> float:
    """``V(q) + hbar/4 tr(M D^2V(q))`` with ``M = B^-1`` or ``M = Sigma_11``."""
    return float(potential.value(q) + 0.25 * params.hbar * np.trace(M @ potential.hessian(q)))


def corrected_force(q, M, params: SimParams, potential: Potential) -> np.ndarray:
    return -(potential.gradient(q) + 0.25 * params.hbar * potential.hessian_contract_grad(M, q))


def H_gwp(z, C: SiegelPoint, params: SimParams, potential: Potential) -> float:
    """Wave-packet energy ``H_cl + hbar/4 tr[B^-1((A^2 + B^2)/m + D^2V)]``."""
    q, _ = split(z)
    A, B = C
    Binv = spd_inverse(B, "B")
    width = np.trace(Binv @ ((A @ A + B @ B) / params.mass + potential.hessian(q)))
    return float(H_cl(z, params, potential) + 0.25 * params.hbar * width)


def h_moment(z, Sigma, params: SimParams, potential: Potential) -> float:
    """Moment energy ``H_cl + hbar/4 tr(Sigma_22/m + Sigma_11 D^2V)``."""
    q, _ = split(z)
    S11, _, _, S22 = geometry.blocks(np.asarray(Sigma, dtype=float))
    width = np.trace(S22) / params.mass + np.sum(S11 * potential.hessian(q))
    return float(H_cl(z, params, potential) + 0.25 * params.hbar * width)


def h_sym(Sigma, potential: Potential, q, params: SimParams) -> float:
    """Collective Hamiltonian ``-tr(Sigma D^2H_cl)`` on sym(2d)."""
    return -geometry.pairing(Sigma, hessian_H_cl(q, params, potential))


def H_hd(C: SiegelPoint, potential: Potential, q, params: SimParams) -> float:
    """Width Hamiltonian ``-tr[B^-1((A^2 + B^2)/m + D^2V)]`` on the Siegel half space."""
    A, B = C
    Binv = spd_inverse(B, "B")
    return -float(np.trace(Binv @ ((A @ A + B @ B) / params.mass + potential.hessian(q))))


def classical_rhs(z, params: SimParams, potential: Potential) -> np.ndarray:
    q, p = split(z)
    return np.concatenate([p / params.mass, -potential.gradient(q)], axis=-1)


def gwp_rhs(z, C: SiegelPoint, params: SimParams, potential: Potential):
    """Returns ``(zdot, TangentHd(Adot, Bdot))`` for the wave-packet equations."""
    q, p = split(z)
    A, B = C
    m = params.mass
    Binv = spd_inverse(B, "B")
    zdot = np.concatenate([p / m, corrected_force(q, Binv, params, potential)])
    Adot = -(A @ A - B @ B) / m - potential.hessian(q)
    Bdot = -(A @ B + B @ A) / m
    return zdot, TangentHd(Adot, Bdot)


def moment_rhs(z, Sigma, params: SimParams, potential: Potential):
    """Returns ``(zdot, Sigmadot)`` with ``Sigmadot = J D^2H Sigma - Sigma D^2H J``."""
    q, p = split(z)
    Sigma = np.asarray(Sigma, dtype=float)
    S11 = geometry.blocks(Sigma)[0]
    zdot = np.concatenate([p / params.mass, corrected_force(q, S11, params, potential)])
    return zdot, geometry.ad_star(hessian_H_cl(q, params, potential), Sigma)


def hagedorn_rhs(z, S, params: SimParams, potential: Potential) -> np.ndarray:
    """Linearized flow ``Sdot = J D^2H_cl(z) S``."""
    q, _ = split(z)
    J = symplectic_unit(len(q))
    return J @ hessian_H_cl(q, params, potential) @ np.asarray(S, dtype=float)
