"""Randomized invariant suite.

Each check draws its own instances from a generator seeded by ``(seed, name)``,
so results are reproducible and independent of which checks are run.  A check
reports the worst residual over its instances and passes when that residual
is at most the tolerance.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

from . import brackets, dynamics, geometry
from .dynamics import SimParams
from .egorov import GaussianState
from .geometry import (
    SiegelPoint,
    TangentHd,
    random_siegel,
    random_sym,
    random_symplectic,
    sigma,
    symplectic_unit,
)
from .integrators import moment_splitting_step, splitting_step
from .potentials import QuadraticPotential, TorsionalPotential

FD_EPS = 1e-5


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.max_residual) and self.max_residual <= self.tol)


def _rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([int(seed), zlib.crc32(name.encode())])


def _dims(rng, n):
    return rng.integers(1, 4, size=n)


def _random_tangent(rng, d) -> TangentHd:
    return TangentHd(random_sym(rng, d), random_sym(rng, d))


def _unit_sym(rng, n) -> np.ndarray:
    xi = random_sym(rng, n)
    return xi / np.linalg.norm(xi)


def _random_potential(rng, d):
    if d == 2 and rng.random() < 0.5:
        return TorsionalPotential()
    return QuadraticPotential(random_sym(rng, d), rng.standard_normal(d))


def _shift(C: SiegelPoint, v: TangentHd, eps: float) -> SiegelPoint:
    return SiegelPoint(C.A + eps * v.dA, C.B + eps * v.dB)


# --- individual checks --------------------------------------------------------
# each takes (rng, n) and returns the worst residual


def check_equivariance(rng, n):
    worst = 0.0
    for d in _dims(rng, n):
        S, C = random_symplectic(rng, d), random_siegel(rng, d)
        lhs = sigma(geometry.moebius(S, C))
        worst = max(worst, np.max(np.abs(lhs - geometry.Ad_star_inv(S, sigma(C)))))
    return worst


def check_left_action(rng, n):
    worst = 0.0
    for d in _dims(rng, n):
        S1, S2, C = random_symplectic(rng, d), random_symplectic(rng, d), random_siegel(rng, d)
        a = geometry.moebius(S1 @ S2, C)
        b = geometry.moebius(S1, geometry.moebius(S2, C))
        worst = max(worst, np.max(np.abs(a.A - b.A)), np.max(np.abs(a.B - b.B)))
    return worst


def check_sigma_symplectic(rng, n):
    worst = 0.0
    for d in _dims(rng, n):
        Sig = sigma(random_siegel(rng, d))
        J = symplectic_unit(d)
        worst = max(worst, np.max(np.abs(Sig @ J @ Sig - J)))
    return worst


def check_factor(rng, n):
    worst = 0.0
    for d in _dims(rng, n):
        C = random_siegel(rng, d)
        X = geometry.xi_factor(C)
        img = geometry.pi_u(X)
        worst = max(
            worst,
            np.max(np.abs(geometry.jhat(X) - sigma(C))),
            np.max(np.abs(img.A - C.A)),
            np.max(np.abs(img.B - C.B)),
        )
    return worst


def check_tilde_homomorphism(rng, n):
    worst = 0.0
    for d in _dims(rng, n):
        xi, eta = random_sym(rng, 2 * d), random_sym(rng, 2 * d)
        X, Y = geometry.tilde(xi), geometry.tilde(eta)
        worst = max(worst, np.max(np.abs(geometry.tilde(geometry.bracket_sym(xi, eta)) - (X @ Y - Y @ X))))
    return worst


def check_ad_star_duality(rng, n):
    worst = 0.0
    for d in _dims(rng, n):
        xi, eta, mu = (random_sym(rng, 2 * d) for _ in range(3))
        lhs = geometry.pairing(geometry.ad_star(xi, mu), eta)
        rhs = geometry.pairing(mu, geometry.bracket_sym(xi, eta))
        worst = max(worst, abs(lhs - rhs))
    return worst


def check_generator(rng, n, eps=1e-4):
    """Generator formula against a central difference of the group orbit."""
    worst = 0.0
    for d in _dims(rng, n):
        xi, C = _unit_sym(rng, 2 * d), random_siegel(rng, d)
        X = geometry.tilde(xi)
        plus, minus = geometry.moebius(expm(eps * X), C), geometry.moebius(expm(-eps * X), C)
        v = geometry.infinitesimal_generator(xi, C)
        worst = max(
            worst,
            np.max(np.abs((plus.A - minus.A) / (2 * eps) - v.dA)),
            np.max(np.abs((plus.B - minus.B) / (2 * eps) - v.dB)),
        )
    return worst


def check_momentum_map(rng, n, eps=FD_EPS):
    """``Omega(xi_C, v) = d<sigma, xi>[v]`` with the right side by central differences."""
    worst = 0.0
    for d in _dims(rng, n):
        xi, C, v = random_sym(rng, 2 * d), random_siegel(rng, d), _random_tangent(rng, d)
        lhs = geometry.omega_hd(C, geometry.infinitesimal_generator(xi, C), v)
        fd = (geometry.pairing(sigma(_shift(C, v, eps)), xi) - geometry.pairing(sigma(_shift(C, v, -eps)), xi)) / (2 * eps)
        worst = max(worst, abs(lhs - fd))
    return worst


def check_kks_pullback(rng, n):
    worst = 0.0
    for d in _dims(rng, n):
        xi, eta, C = random_sym(rng, 2 * d), random_sym(rng, 2 * d), random_siegel(rng, d)
        lhs = geometry.kks_form(sigma(C), xi, eta)
        rhs = geometry.omega_hd(C, geometry.infinitesimal_generator(xi, C), geometry.infinitesimal_generator(eta, C))
        worst = max(worst, abs(lhs - rhs))
    return worst


def check_theta_exterior(rng, n, eps=1e-4):
    """``d theta = -Omega`` with constant vector fields, by central differences."""
    worst = 0.0
    for d in _dims(rng, n):
        C, u, v = random_siegel(rng, d), _random_tangent(rng, d), _random_tangent(rng, d)
        du = (geometry.theta_hd(_shift(C, u, eps), v) - geometry.theta_hd(_shift(C, u, -eps), v)) / (2 * eps)
        dv = (geometry.theta_hd(_shift(C, v, eps), u) - geometry.theta_hd(_shift(C, v, -eps), u)) / (2 * eps)
        worst = max(worst, abs((du - dv) + geometry.omega_hd(C, u, v)))
    return worst


def check_poisson_map(rng, n):
    worst = 0.0
    for d in _dims(rng, n):
        C, P, Q = random_siegel(rng, d), random_sym(rng, 2 * d), random_sym(rng, 2 * d)
        worst = max(worst, brackets.poisson_map_check(C, P, Q))
    return worst


def check_collective_width(rng, n):
    """``H_Hd(C) = h_sym(sigma(C))`` for the width Hamiltonian."""
    worst = 0.0
    for d in _dims(rng, n):
        C, pot = random_siegel(rng, d), _random_potential(rng, d)
        q, params = rng.standard_normal(d), SimParams(hbar=rng.uniform(0.05, 1.0), mass=rng.uniform(0.5, 2.0))
        worst = max(worst, abs(dynamics.H_hd(C, pot, q, params) - dynamics.h_sym(sigma(C), pot, q, params)))
    return worst


def check_collective_energy(rng, n):
    """``H_gwp(z, C) = h_moment(z, sigma(C))``."""
    worst = 0.0
    for d in _dims(rng, n):
        C, pot = random_siegel(rng, d), _random_potential(rng, d)
        z, params = rng.standard_normal(2 * d), SimParams(hbar=rng.uniform(0.05, 1.0), mass=rng.uniform(0.5, 2.0))
        worst = max(worst, abs(dynamics.H_gwp(z, C, params, pot) - dynamics.h_moment(z, sigma(C), params, pot)))
    return worst


def check_pushforward(rng, n, eps=FD_EPS):
    """``moment_rhs(z, sigma(C))`` is the image of ``gwp_rhs(z, C)`` under ``(z, C) -> (z, sigma(C))``."""
    worst = 0.0
    for d in _dims(rng, n):
        C, pot = random_siegel(rng, d), _random_potential(rng, d)
        z, params = rng.standard_normal(2 * d), SimParams(hbar=rng.uniform(0.05, 1.0))
        zdot, v = dynamics.gwp_rhs(z, C, params, pot)
        zdot_m, Sdot = dynamics.moment_rhs(z, sigma(C), params, pot)
        fd = (sigma(_shift(C, v, eps)) - sigma(_shift(C, v, -eps))) / (2 * eps)
        worst = max(worst, np.max(np.abs(fd - Sdot)), np.max(np.abs(zdot - zdot_m)))
    return worst


def check_coadjoint_tangent(rng, n):
    """``Sigma_dot`` is tangent to ``Sigma J Sigma = J``."""
    worst = 0.0
    for d in _dims(rng, n):
        Sig, pot = sigma(random_siegel(rng, d)), _random_potential(rng, d)
        z, params = rng.standard_normal(2 * d), SimParams(hbar=0.1)
        _, Sdot = dynamics.moment_rhs(z, Sig, params, pot)
        J = symplectic_unit(d)
        worst = max(worst, np.max(np.abs(Sdot @ J @ Sig + Sig @ J @ Sdot)), np.max(np.abs(Sdot - Sdot.T)))
    return worst


def check_hagedorn(rng, n):
    """``d/dt (S S^T)`` along the linearized flow equals the moment ``Sigma_dot``."""
    worst = 0.0
    for d in _dims(rng, n):
        S, pot = random_symplectic(rng, d), _random_potential(rng, d)
        z, params = rng.standard_normal(2 * d), SimParams(hbar=0.1)
        Sd = dynamics.hagedorn_rhs(z, S, params, pot)
        _, Sigdot = dynamics.moment_rhs(z, S @ S.T, params, pot)
        worst = max(worst, np.max(np.abs(Sd @ S.T + S @ Sd.T - Sigdot)))
    return worst


def check_intertwining(rng, n, steps=200):
    """Splitting on ``(z, C)`` and its image on ``(z, Sigma)`` agree step by step."""
    worst = 0.0
    pot = TorsionalPotential()
    for _ in range(max(1, n // 20)):
        C = random_siegel(rng, 2)
        z = rng.standard_normal(4)
        params = SimParams(hbar=rng.uniform(0.05, 0.5))
        zm, Sig = z.copy(), sigma(C)
        for _ in range(steps):
            z, C = splitting_step(z, C, 0.01, params, pot)
            zm, Sig = moment_splitting_step(zm, Sig, 0.01, params, pot)
            worst = max(worst, np.max(np.abs(sigma(C) - Sig)), np.max(np.abs(z - zm)))
    return worst


def check_symplecticity(rng, n, steps=1000):
    """``Sigma J Sigma - J`` along moment trajectories.

    Starts are perturbations of the reference torsional data.  Far from it the
    width can grow exponentially, and the absolute residual then only measures
    roundoff amplified by ``|Sigma|^2``.
    """
    worst = 0.0
    pot = TorsionalPotential()
    J = symplectic_unit(2)
    z0 = np.array([1.0, 0.0, -1.0, 1.0])
    AB = np.array([[1.0, 0.5], [0.5, 1.0]])
    for _ in range(max(1, n // 50)):
        z = z0 + 0.1 * rng.standard_normal(4)
        Sig = sigma(SiegelPoint(AB + 0.1 * random_sym(rng, 2), AB))
        params = SimParams(hbar=rng.uniform(0.05, 0.5))
        for _ in range(steps):
            z, Sig = moment_splitting_step(z, Sig, 0.01, params, pot)
            worst = max(worst, np.max(np.abs(Sig @ J @ Sig - J)))
    return worst


def check_untangle_composite(rng, n):
    """``iota(untangle(moment_map_gaussian(W))) = (1, z, hbar Sigma / 4)``."""
    worst = 0.0
    for d in _dims(rng, n):
        z, Sig = rng.standard_normal(2 * d), sigma(random_siegel(rng, d))
        hbar = rng.uniform(0.05, 1.0)
        alpha, mean, mu = brackets.iota(brackets.untangle(brackets.moment_map_gaussian(GaussianState(z, Sig, hbar))))
        worst = max(worst, abs(alpha - 1.0), np.max(np.abs(mean - z)), np.max(np.abs(mu - 0.25 * hbar * Sig)))
    return worst


CHECKS: dict[str, tuple[Callable, float]] = {
    "equivariance": (check_equivariance, 1e-10),
    "left_action": (check_left_action, 1e-10),
    "sigma_symplectic": (check_sigma_symplectic, 1e-10),
    "xi_factor": (check_factor, 1e-12),
    "tilde_homomorphism": (check_tilde_homomorphism, 1e-12),
    "ad_star_duality": (check_ad_star_duality, 1e-12),
    "generator_fd": (check_generator, 1e-6),
    "momentum_map_fd": (check_momentum_map, 1e-6),
    "kks_pullback": (check_kks_pullback, 1e-9),
    "theta_exterior_fd": (check_theta_exterior, 1e-5),
    "poisson_map_fd": (check_poisson_map, 1e-6),
    "collective_width": (check_collective_width, 1e-12),
    "collective_energy": (check_collective_energy, 1e-12),
    "pushforward_fd": (check_pushforward, 1e-6),
    "coadjoint_tangent": (check_coadjoint_tangent, 1e-12),
    "hagedorn_consistency": (check_hagedorn, 1e-12),
    "intertwining": (check_intertwining, 1e-10),
    "symplecticity": (check_symplecticity, 1e-9),
    "untangle_composite": (check_untangle_composite, 1e-12),
}


def run_checks(seed: int = 0, n_instances: int = 100, names=None) -> list[CheckResult]:
    out = []
    for name in names or CHECKS:
        fn, tol = CHECKS[name]
        out.append(CheckResult(name, float(fn(_rng(seed, name), n_instances)), tol))
    return out


def format_report(results) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  {'max residual':>12}  {'tol':>8}  result"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {r.max_residual:12.3e}  {r.tol:8.0e}  {'pass' if r.passed else 'FAIL'}")
    return "\n".join(lines)
