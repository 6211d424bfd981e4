"""Poisson brackets evaluated by central finite differences.

Gradients with respect to a symmetric matrix ``M`` follow the full-index
convention: the returned ``G`` is symmetric and satisfies
``df = sum_jk G_jk dM_jk = tr(G dM)`` for symmetric ``dM``.  Off-diagonal
entries are obtained by perturbing ``(j, k)`` and ``(k, j)`` together and halving.

Scalar fields are plain callables.  Their signature depends on the space:
``F(C)`` on the Siegel half space, ``F(z, C)`` on the wave-packet space,
``F(Sigma)`` on sym(2d), ``F(z, Sigma)`` on the moment space, ``F(z)`` on
phase space and ``F(m)`` on the dual of the Jacobi algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import geometry
from .egorov import Ensemble, GaussianState
from .errors import SingularUntangleError
from .geometry import SiegelPoint, bracket_sym, spd_inverse, sym, symplectic_unit

ScalarField = Callable[..., float]

FD_STEP = 1e-5


def _vec_gradient(f, x, step):
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = step * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2.0 * h)
    return g


def _sym_gradient(f, M, step):
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    G = np.empty_like(M)
    for j in range(n):
        for k in range(j, n):
            h = step * max(1.0, abs(M[j, k]))
            E = np.zeros_like(M)
            E[j, k] = E[k, j] = h
            dfd = (f(M + E) - f(M - E)) / (2.0 * h)
            G[j, k] = G[k, j] = dfd if j == k else 0.5 * dfd
    return G


def fd_gradient(f: ScalarField, point, step: float = FD_STEP):
    """Central-difference gradient of ``f`` at ``point``.

    ``point`` is a vector, a symmetric matrix, a :class:`SiegelPoint` (returns
    ``(dF/dA, dF/dB)``) or a tuple of those, in which case ``f`` takes the
    components as separate arguments and a tuple of partial gradients is returned.
    """
    if isinstance(point, SiegelPoint):
        gA, gB = fd_gradient(lambda A, B: f(SiegelPoint(A, B)), (point.A, point.B), step)
        return gA, gB
    if isinstance(point, tuple):
        parts = [np.asarray(c, dtype=float) for c in point]
        grads = []
        for i, c in enumerate(parts):
            def fi(x, i=i):
                args = list(parts)
                args[i] = x
                return f(*args)
            grads.append(_component_gradient(fi, c, step))
        return tuple(grads)
    return _component_gradient(f, np.asarray(point, dtype=float), step)


def _component_gradient(f, x, step):
    if x.ndim == 0:
        return float(_vec_gradient(lambda v: f(v[0]), x.reshape(1), step)[0])
    if x.ndim == 1:
        return _vec_gradient(f, x, step)
    return _sym_gradient(f, x, step)


def canonical_bracket(gradF, gradG) -> float:
    """``dF/dq . dG/dp - dG/dq . dF/dp`` from phase-space gradients."""
    gradF = np.asarray(gradF)
    return float(gradF @ symplectic_unit(gradF.size // 2) @ np.asarray(gradG))


def bracket_r2d(F: ScalarField, G: ScalarField, z, step: float = FD_STEP) -> float:
    return canonical_bracket(fd_gradient(F, z, step), fd_gradient(G, z, step))


def _aw_gradients(F, C, step):
    # coordinates (A, W) with W = B^-1
    W = spd_inverse(C.B, "B")
    return fd_gradient(lambda A, W: F(SiegelPoint(A, np.linalg.inv(W))), (C.A, W), step)


def bracket_hd(F: ScalarField, G: ScalarField, C: SiegelPoint, step: float = FD_STEP) -> float:
    """``-(dF/dW_jk dG/dA_jk - dG/dW_jk dF/dA_jk)`` with ``W = B^-1``."""
    FA, FW = _aw_gradients(F, C, step)
    GA, GW = _aw_gradients(G, C, step)
    return -float(np.sum(FW * GA) - np.sum(GW * FA))


def bracket_lp_sym(
    F: ScalarField, G: ScalarField, Sigma, sign: int = 1, grads=None, step: float = FD_STEP
) -> float:
    """Lie-Poisson bracket ``+-tr(Sigma [dF/dSigma, dG/dSigma])``.

    ``grads`` may supply the two variational derivatives analytically.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if grads is None:
        grads = (fd_gradient(F, Sigma, step), fd_gradient(G, Sigma, step))
    dF, dG = grads
    return sign * geometry.pairing(Sigma, bracket_sym(dF, dG))


def bracket_gwp(
    F: ScalarField, G: ScalarField, z, C: SiegelPoint, hbar: float, step: float = FD_STEP
) -> float:
    """Wave-packet bracket ``{F, G}_R2d - (4/hbar) {F, G}_Hd`` for fields ``F(z, C)``."""
    z = np.asarray(z, dtype=float)
    canon = canonical_bracket(fd_gradient(lambda x: F(x, C), z, step), fd_gradient(lambda x: G(x, C), z, step))
    width = bracket_hd(lambda c: F(z, c), lambda c: G(z, c), C, step)
    return canon - 4.0 / hbar * width


def bracket_moments(
    F: ScalarField, G: ScalarField, z, Sigma, hbar: float, step: float = FD_STEP
) -> float:
    """Moment bracket ``{F, G}_R2d - (4/hbar) tr(Sigma [dF/dSigma, dG/dSigma])``."""
    gzF, gSF = fd_gradient(F, (z, Sigma), step)
    gzG, gSG = fd_gradient(G, (z, Sigma), step)
    Sigma = np.asarray(Sigma, dtype=float)
    return canonical_bracket(gzF, gzG) - 4.0 / hbar * float(np.trace(Sigma @ bracket_sym(gSF, gSG)))


def bracket_moments_alpha(
    F: ScalarField, G: ScalarField, alpha: float, z, Sigma, hbar: float, step: float = FD_STEP
) -> float:
    """Bracket on ``{(alpha, z, Sigma)}``; fields take ``(alpha, z, Sigma)``.

    ``alpha {F, G}_R2d - (4/hbar) tr(Sigma [dF/dSigma, dG/dSigma])``.
    """
    z = np.asarray(z, dtype=float)
    Sigma = np.asarray(Sigma, dtype=float)
    gz = [fd_gradient(lambda x, H=H: H(alpha, x, Sigma), z, step) for H in (F, G)]
    gS = [fd_gradient(lambda S, H=H: H(alpha, z, S), Sigma, step) for H in (F, G)]
    return alpha * canonical_bracket(*gz) - (4.0 / hbar) * geometry.pairing(Sigma, bracket_sym(*gS))


def poisson_map_check(C: SiegelPoint, P, Q, step: float = FD_STEP) -> float:
    """``|{F o sigma, G o sigma}_Hd(C) - {F, G}^+_sym(sigma(C))|`` for ``F = tr(P .)``, ``G = tr(Q .)``."""
    P = sym(P)
    Q = sym(Q)
    lhs = bracket_hd(
        lambda c: geometry.pairing(P, geometry.sigma(c)),
        lambda c: geometry.pairing(Q, geometry.sigma(c)),
        C,
        step,
    )
    rhs = bracket_lp_sym(None, None, geometry.sigma(C), sign=1, grads=(P, Q))
    return abs(lhs - rhs)


# --- dual of the Jacobi algebra -------------------------------------------------

@dataclass(frozen=True)
class JacDual:
    """Element ``(Pi, lambda, alpha)`` of the dual of the Jacobi algebra.

    ``Pi`` is kept as the Hamiltonian matrix (an element of sp(2d)) obtained from
    its symmetric counterpart by :func:`geometry.tilde`; ``Pi_sym = J Pi``.
    """

    Pi: np.ndarray
    lam: np.ndarray
    alpha: float

    def __post_init__(self):
        Pi = np.array(self.Pi, dtype=float)
        lam = np.array(self.lam, dtype=float).ravel()
        if Pi.shape != (lam.size, lam.size):
            raise ValueError(f"inconsistent shapes: Pi {Pi.shape}, lambda {lam.shape}")
        object.__setattr__(self, "Pi", Pi)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "alpha", float(self.alpha))

    @classmethod
    def from_sym(cls, Pi_sym, lam, alpha) -> "JacDual":
        return cls(geometry.tilde(sym(Pi_sym)), lam, alpha)

    @property
    def Pi_sym(self) -> np.ndarray:
        return geometry.untilde(self.Pi)


def bracket_jac(f: ScalarField, g: ScalarField, m: JacDual, step: float = FD_STEP) -> float:
    """(-)-Lie-Poisson bracket on the dual of the Jacobi algebra.

    ``alpha {f, g}_R2d - lambda . (df/dPi dg/dlambda - dg/dPi df/dlambda)
    - tr(Pi^T [df/dPi, dg/dPi])``, where the canonical part acts on ``lambda`` and
    ``df/dPi`` is the sp(2d) element ``tilde(df/dPi_sym)``.
    """
    def grads(h):
        gl, gs = fd_gradient(lambda lam, S: h(JacDual.from_sym(S, lam, m.alpha)), (m.lam, m.Pi_sym), step)
        return gl, geometry.tilde(gs)

    fl, fP = grads(f)
    gl, gP = grads(g)
    comm = fP @ gP - gP @ fP
    return (
        m.alpha * canonical_bracket(fl, gl)
        - float(m.lam @ (fP @ gl - gP @ fl))
        - float(np.trace(m.Pi.T @ comm))
    )


def moment_map_gaussian(state: GaussianState) -> JacDual:
    """``(J^T <zeta zeta^T>/2, J^T <zeta>, 1)`` with ``<zeta zeta^T> = z z^T + (hbar/2) Sigma``."""
    J = symplectic_unit(state.d)
    second = np.outer(state.z, state.z) + state.covariance
    return JacDual(0.5 * J.T @ second, J.T @ state.z, 1.0)


def moment_map_ensemble(e: Ensemble) -> JacDual:
    """Same as :func:`moment_map_gaussian` with expectations replaced by sample means."""
    X = e.samples
    if X.shape[0] == 0:
        raise ValueError("empty ensemble")
    J = symplectic_unit(X.shape[1] // 2)
    second = X.T @ X / X.shape[0]
    return JacDual(0.5 * J.T @ sym(second), J.T @ X.mean(axis=0), float(np.sum(e.weights)))


def untangle(m: JacDual) -> JacDual:
    """``(Pi - (lambda lambda^T) J^T / (2 alpha), lambda, alpha)``."""
    if m.alpha == 0.0:
        raise SingularUntangleError("untangling requires alpha != 0")
    J = symplectic_unit(m.lam.size // 2)
    return JacDual(m.Pi - np.outer(m.lam, m.lam) @ J.T / (2.0 * m.alpha), m.lam, m.alpha)


def iota(m: JacDual):
    """``(alpha, J lambda, J Pi)``: total mass, mean, and the symmetric second-moment block."""
    J = symplectic_unit(m.lam.size // 2)
    return m.alpha, J @ m.lam, sym(J @ m.Pi)


def jacobi_action_gaussian(S, zshift, state: GaussianState) -> GaussianState:
    """Gaussian ``W'(zeta) = W(S zeta + zshift)``; the phase factor acts trivially."""
    S = np.asarray(S, dtype=float)
    Sinv = np.linalg.inv(S)
    mean = Sinv @ (state.z - np.asarray(zshift, dtype=float))
    return GaussianState(mean, Sinv @ state.Sigma @ Sinv.T, state.hbar)
