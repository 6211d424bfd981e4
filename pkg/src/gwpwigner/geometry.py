"""Geometry of the Siegel upper half space and of sym(2d, R).

Points of the Siegel upper half space are complex symmetric matrices
``C = A + iB`` with ``B`` positive definite.  They are stored as the real pair
``(A, B)``; all complex arithmetic is carried out on real and imaginary blocks.

Symmetric ``2d x 2d`` matrices play three roles here: Lie algebra elements
(with the bracket ``[xi, eta] = xi J^T eta - eta J^T xi``), their duals
(paired by the trace), and covariance matrices.  Symplectic matrices are plain
``ndarray`` objects; use :func:`symplectic_residual` to validate them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import DegenerateActionError, IllConditionedInputError, NotPureStateError

TOL_SP = 1e-10
COND_LIMIT = 1e12


def symplectic_unit(d: int) -> np.ndarray:
    """Return ``J = [[0, I], [-I, 0]]`` of size ``2d``."""
    eye = np.eye(d)
    zero = np.zeros((d, d))
    return np.block([[zero, eye], [-eye, zero]])


def sym(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + M.T)


def _as_square(M, name: str) -> np.ndarray:
    M = np.array(M, dtype=float)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {M.shape}")
    return M


def _frozen(M: np.ndarray) -> np.ndarray:
    M.setflags(write=False)
    return M


def blocks(M):
    """Split a ``2d x 2d`` matrix into its four ``d x d`` blocks."""
    n = M.shape[0] // 2
    return M[:n, :n], M[:n, n:], M[n:, :n], M[n:, n:]


def _check_conditioning(M: np.ndarray, name: str) -> np.ndarray:
    """Return the eigenvalues of the symmetric matrix ``M`` after checking it is SPD."""
    w = np.linalg.eigvalsh(M)
    if not np.all(np.isfinite(w)) or w[0] <= 0.0:
        raise IllConditionedInputError(f"{name} is not positive definite (min eigenvalue {w[0]:.3e})")
    if w[-1] / w[0] > COND_LIMIT:
        raise IllConditionedInputError(f"{name} has condition number {w[-1] / w[0]:.3e}")
    return w


def spd_inverse(M: np.ndarray, name: str = "matrix") -> np.ndarray:
    _check_conditioning(M, name)
    return sym(np.linalg.solve(M, np.eye(M.shape[0])))


class SiegelPoint:
    """A point ``A + iB`` of the Siegel upper half space.

    ``A`` and ``B`` are symmetrized on construction and stored read-only.
    ``B`` must be positive definite.
    """

    __slots__ = ("A", "B")

    def __init__(self, A, B):
        A = sym(_as_square(A, "A"))
        B = sym(_as_square(B, "B"))
        if A.shape != B.shape:
            raise ValueError(f"A and B shapes differ: {A.shape} vs {B.shape}")
        w = np.linalg.eigvalsh(B)
        if not w[0] > 0.0:
            raise IllConditionedInputError(f"B is not positive definite (min eigenvalue {w[0]:.3e})")
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "B", _frozen(B))

    def __setattr__(self, name, value):
        raise AttributeError("SiegelPoint is immutable")

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @classmethod
    def from_complex(cls, C) -> "SiegelPoint":
        C = np.asarray(C, dtype=complex)
        return cls(C.real, C.imag)

    @classmethod
    def identity(cls, d: int) -> "SiegelPoint":
        """The base point ``iI``."""
        return cls(np.zeros((d, d)), np.eye(d))

    def to_complex(self) -> np.ndarray:
        return self.A + 1j * self.B

    def __iter__(self):
        yield self.A
        yield self.B

    def __repr__(self):
        return f"SiegelPoint(A={self.A.tolist()}, B={self.B.tolist()})"


@dataclass(frozen=True)
class TangentHd:
    """Tangent vector ``(dA, dB)`` to the Siegel upper half space."""

    dA: np.ndarray
    dB: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dA", _frozen(sym(_as_square(self.dA, "dA"))))
        object.__setattr__(self, "dB", _frozen(sym(_as_square(self.dB, "dB"))))


def symplectic_residual(S) -> float:
    """``max |S^T J S - J|``."""
    S = np.asarray(S, dtype=float)
    J = symplectic_unit(S.shape[0] // 2)
    return float(np.max(np.abs(S.T @ J @ S - J)))


def is_symplectic(S, tol: float = TOL_SP) -> bool:
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
        return False
    return symplectic_residual(S) <= tol


def block_residual(S) -> float:
    """Largest violation of the block form of the symplectic condition."""
    S11, S12, S21, S22 = blocks(np.asarray(S, dtype=float))
    eye = np.eye(S11.shape[0])
    return float(max(
        np.max(np.abs(S11.T @ S21 - S21.T @ S11)),
        np.max(np.abs(S12.T @ S22 - S22.T @ S12)),
        np.max(np.abs(S11.T @ S22 - S21.T @ S12 - eye)),
    ))


def pairing(mu, xi) -> float:
    """Trace pairing ``tr(mu xi)``."""
    return float(np.sum(np.asarray(mu) * np.asarray(xi).T))


# --- covariance momentum map ---------------------------------------------------

def sigma(C: SiegelPoint) -> np.ndarray:
    """Covariance matrix ``[[B^-1, B^-1 A], [A B^-1, A B^-1 A + B]]`` of ``C``.

    This is also the momentum map of the symplectic group action on the Siegel
    upper half space.
    """
    A, B = C
    Binv = spd_inverse(B, "B")
    BinvA = Binv @ A
    return np.block([[Binv, BinvA], [BinvA.T, sym(A @ BinvA + B)]])


def sigma_inverse(Sigma, tol: float = TOL_SP) -> SiegelPoint:
    """Recover ``(A, B)`` from a symplectic positive-definite covariance matrix."""
    Sigma = _as_square(Sigma, "Sigma")
    if Sigma.shape[0] % 2:
        raise ValueError("Sigma must have even size")
    Sigma = sym(Sigma)
    _check_conditioning(Sigma, "Sigma")
    J = symplectic_unit(Sigma.shape[0] // 2)
    res = float(np.max(np.abs(Sigma @ J @ Sigma - J)))
    if res > tol:
        raise NotPureStateError(f"Sigma J Sigma differs from J by {res:.3e}")
    S11, S12, _, _ = blocks(Sigma)
    B = spd_inverse(S11, "Sigma_11")
    return SiegelPoint(B @ S12, B)


# --- group action ----------------------------------------------------------------

def moebius(S, C: SiegelPoint) -> SiegelPoint:
    """Linear fractional action ``(S21 + S22 C)(S11 + S12 C)^-1``."""
    S = np.asarray(S, dtype=float)
    S11, S12, S21, S22 = blocks(S)
    A, B = C
    d = A.shape[0]
    # X D = N with D = Dr + i Di, N = Nr + i Ni; solved as D^T X^T = N^T.
    Dr, Di = S11 + S12 @ A, S12 @ B
    Nr, Ni = S21 + S22 @ A, S22 @ B
    M = np.block([[Dr.T, -Di.T], [Di.T, Dr.T]])
    if np.linalg.cond(M) > COND_LIMIT:
        raise DegenerateActionError("S11 + S12 C is numerically singular")
    Y = np.linalg.solve(M, np.vstack([Nr.T, Ni.T]))
    return SiegelPoint(Y[:d].T, Y[d:].T)


def xi_factor(C: SiegelPoint) -> np.ndarray:
    """Symplectic matrix ``[[B^-1/2, 0], [A B^-1/2, B^1/2]]`` mapping ``iI`` to ``C``.

    Uses the symmetric positive-definite square root of ``B``.
    """
    A, B = C
    w = _check_conditioning(B, "B")
    _, U = np.linalg.eigh(B)
    root = sym(U @ np.diag(np.sqrt(w)) @ U.T)
    inv_root = sym(U @ np.diag(1.0 / np.sqrt(w)) @ U.T)
    return np.block([[inv_root, np.zeros_like(A)], [A @ inv_root, root]])


def pi_u(S) -> SiegelPoint:
    """Quotient map ``Sp(2d) -> Sp(2d)/U(d)``, i.e. the image of ``iI`` under ``S``."""
    S = np.asarray(S, dtype=float)
    return moebius(S, SiegelPoint.identity(S.shape[0] // 2))


def jhat(S) -> np.ndarray:
    """``S S^T``; equals ``sigma(pi_u(S))``."""
    S = np.asarray(S, dtype=float)
    return sym(S @ S.T)


# --- sym(2d) as a Lie algebra --------------------------------------------------

def tilde(xi) -> np.ndarray:
    """Identify a symmetric matrix with the Hamiltonian matrix ``J^T xi``."""
    xi = np.asarray(xi, dtype=float)
    return symplectic_unit(xi.shape[0] // 2).T @ xi


def untilde(X) -> np.ndarray:
    """Inverse of :func:`tilde`: ``J X``."""
    X = np.asarray(X, dtype=float)
    return sym(symplectic_unit(X.shape[0] // 2) @ X)


def bracket_sym(xi, eta) -> np.ndarray:
    """Lie bracket ``xi J^T eta - eta J^T xi``."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    Jt = symplectic_unit(xi.shape[0] // 2).T
    X = xi @ Jt @ eta
    # eta J^T xi = -(xi J^T eta)^T for symmetric arguments
    return X + X.T


def ad_star(xi, mu) -> np.ndarray:
    """Coadjoint generator ``J xi mu - mu xi J``."""
    xi = np.asarray(xi, dtype=float)
    mu = np.asarray(mu, dtype=float)
    J = symplectic_unit(xi.shape[0] // 2)
    Y = J @ xi @ mu
    return Y + Y.T


def Ad_star_inv(S, mu) -> np.ndarray:
    """Coadjoint action of ``S^-1`` on the dual: ``S mu S^T``."""
    S = np.asarray(S, dtype=float)
    return sym(S @ np.asarray(mu, dtype=float) @ S.T)


def infinitesimal_generator(xi, C: SiegelPoint) -> TangentHd:
    """Velocity of ``eps -> moebius(exp(eps * tilde(xi)), C)`` at ``eps = 0``."""
    xi = np.asarray(xi, dtype=float)
    A, B = C
    x11, x12, _, x22 = blocks(xi)
    dA = x11 + x12 @ A + A @ x12.T + A @ x22 @ A - B @ x22 @ B
    dB = B @ x12.T + x12 @ B + B @ x22 @ A + A @ x22 @ B
    return TangentHd(dA, dB)


# --- differential forms on H_d -------------------------------------------------

def omega_hd(C: SiegelPoint, v1: TangentHd, v2: TangentHd) -> float:
    """Symplectic form ``tr(B^-1 dB1 B^-1 dA2) - tr(B^-1 dB2 B^-1 dA1)``."""
    Binv = spd_inverse(C.B, "B")
    return float(np.trace(Binv @ v1.dB @ Binv @ v2.dA) - np.trace(Binv @ v2.dB @ Binv @ v1.dA))


def theta_hd(C: SiegelPoint, v: TangentHd) -> float:
    """Canonical one-form ``-tr(A d(B^-1)) = tr(A B^-1 dB B^-1)``."""
    Binv = spd_inverse(C.B, "B")
    return float(np.trace(C.A @ Binv @ v.dB @ Binv))


def kks_form(mu, xi, eta, sign: int = 1) -> float:
    """KKS form ``+-tr(mu [xi, eta])`` evaluated on the generators of ``xi`` and ``eta``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return sign * pairing(mu, bracket_sym(xi, eta))


# --- random instances ------------------------------------------------------------

def random_sym(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    return scale * sym(rng.standard_normal((n, n)))


def random_siegel(rng: np.random.Generator, d: int, spread: float = 0.5) -> SiegelPoint:
    """A point with ``B`` eigenvalues in ``[exp(-spread), exp(spread)]``."""
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    w = np.exp(rng.uniform(-spread, spread, size=d))
    return SiegelPoint(random_sym(rng, d, 0.5), Q @ np.diag(w) @ Q.T)


def random_symplectic(rng: np.random.Generator, d: int, n_factors: int = 3) -> np.ndarray:
    """Product of ``exp(t * tilde(xi))`` factors with ``||xi||_F <= 1`` and ``|t| <= 1``."""
    S = np.eye(2 * d)
    for _ in range(n_factors):
        xi = random_sym(rng, 2 * d)
        xi /= max(1.0, np.linalg.norm(xi))
        S = S @ expm(rng.uniform(-1.0, 1.0) * tilde(xi))
    return S
