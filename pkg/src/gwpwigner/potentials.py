"""Potential energies with the derivatives needed by the corrected force.

``value`` and ``gradient`` accept a single point of shape ``(d,)`` or a batch of
shape ``(n, d)``; ``hessian`` and ``hessian_contract_grad`` take a single point.
The third derivative only enters through ``grad_q tr(M D^2V(q))``.
"""

from __future__ import annotations

import re
from abc import ABC, abstractmethod
from ast import literal_eval
from typing import Callable

import numpy as np


class Potential(ABC):
    """Interface for a potential ``V: R^d -> R``."""

    dim: int

    @abstractmethod
    def value(self, q) -> np.ndarray | float: ...

    @abstractmethod
    def gradient(self, q) -> np.ndarray: ...

    @abstractmethod
    def hessian(self, q) -> np.ndarray: ...

    @abstractmethod
    def hessian_contract_grad(self, M, q) -> np.ndarray:
        """Gradient of ``q -> tr(M D^2V(q))`` for a fixed symmetric ``M``."""

    def _check(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if q.shape[-1] != self.dim:
            raise ValueError(f"expected points of dimension {self.dim}, got shape {q.shape}")
        return q


class TorsionalPotential(Potential):
    """``V(q) = 2 - cos q1 - cos q2``."""

    dim = 2

    def value(self, q):
        q = self._check(q)
        return 2.0 - np.cos(q).sum(axis=-1)

    def gradient(self, q):
        return np.sin(self._check(q))

    def hessian(self, q):
        return np.diag(np.cos(self._check(q)))

    def hessian_contract_grad(self, M, q):
        q = self._check(q)
        return -np.diagonal(np.asarray(M, dtype=float)) * np.sin(q)

    def __repr__(self):
        return "TorsionalPotential()"


class QuadraticPotential(Potential):
    """``V(q) = q^T K q / 2 + c . q``."""

    def __init__(self, K, c=None):
        K = np.array(K, dtype=float)
        if K.ndim == 0:
            K = K.reshape(1, 1)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValueError(f"K must be square, got shape {K.shape}")
        self.K = 0.5 * (K + K.T)
        self.dim = K.shape[0]
        self.c = np.zeros(self.dim) if c is None else np.array(c, dtype=float).reshape(self.dim)

    def value(self, q):
        q = self._check(q)
        return 0.5 * np.einsum("...i,ij,...j->...", q, self.K, q) + q @ self.c

    def gradient(self, q):
        return self._check(q) @ self.K + self.c

    def hessian(self, q):
        self._check(q)
        return self.K.copy()

    def hessian_contract_grad(self, M, q):
        return np.zeros_like(self._check(q))

    def __repr__(self):
        return f"QuadraticPotential(K={self.K.tolist()}, c={self.c.tolist()})"


def harmonic(omega: float, dim: int) -> QuadraticPotential:
    """Isotropic oscillator ``omega^2 |q|^2 / 2``."""
    return QuadraticPotential(omega**2 * np.eye(dim))


def free(dim: int) -> QuadraticPotential:
    return QuadraticPotential(np.zeros((dim, dim)))


class FiniteDifferencePotential(Potential):
    """Derivatives of a value-only potential by central differences.

    Gradients use steps ``1e-5 * max(1, |q_i|)`` and Hessians ``1e-4 * max(1, |q_i|)``.
    The third-order contraction uses second differences along the eigenvectors of
    ``M``, differentiated again with step ``2e-3 * max(1, |q_i|)``.
    """

    grad_step = 1e-5
    hess_step = 1e-4
    third_step = 2e-3

    def __init__(self, fn: Callable, dim: int):
        self.fn = fn
        self.dim = dim

    def value(self, q):
        return self.fn(self._check(q))

    def _steps(self, q, rel):
        return rel * np.maximum(1.0, np.abs(q))

    def gradient(self, q):
        q = self._check(q)
        h = self._steps(q, self.grad_step)
        g = np.empty_like(q)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = 1.0
            hi = h[..., i : i + 1]
            g[..., i] = (self.fn(q + hi * e) - self.fn(q - hi * e)) / (2.0 * h[..., i])
        return g

    def hessian(self, q):
        q = self._check(q)
        h = self._steps(q, self.hess_step)
        d = self.dim
        H = np.empty((d, d))
        f0 = self.fn(q)
        for i in range(d):
            ei = np.zeros(d)
            ei[i] = h[i]
            H[i, i] = (self.fn(q + ei) - 2.0 * f0 + self.fn(q - ei)) / h[i] ** 2
            for j in range(i + 1, d):
                ej = np.zeros(d)
                ej[j] = h[j]
                H[i, j] = H[j, i] = (
                    self.fn(q + ei + ej) - self.fn(q + ei - ej) - self.fn(q - ei + ej) + self.fn(q - ei - ej)
                ) / (4.0 * h[i] * h[j])
        return H

    def _trace_MH(self, M, q, h):
        # tr(M H) = sum_k w_k u_k^T H u_k over the eigenpairs of M
        w, U = np.linalg.eigh(M)
        f0 = self.fn(q)
        total = 0.0
        for wk, u in zip(w, U.T):
            total += wk * (self.fn(q + h * u) - 2.0 * f0 + self.fn(q - h * u)) / h**2
        return total

    def hessian_contract_grad(self, M, q):
        q = self._check(q)
        M = 0.5 * (np.asarray(M, dtype=float) + np.asarray(M, dtype=float).T)
        h = self._steps(q, self.third_step)
        inner = self.third_step * max(1.0, float(np.max(np.abs(q))))
        g = np.empty(self.dim)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = h[i]
            g[i] = (self._trace_MH(M, q + e, inner) - self._trace_MH(M, q - e, inner)) / (2.0 * h[i])
        return g


def fd_fallback(fn: Callable, dim: int) -> FiniteDifferencePotential:
    """Wrap a value-only function into a full :class:`Potential`."""
    return FiniteDifferencePotential(fn, dim)


_SPEC = re.compile(r"^\s*(\w+)\s*(?:\((.*)\))?\s*$", re.S)


def parse_potential(spec: str, dim: int) -> Potential:
    """Build a potential from ``torsional``, ``free``, ``harmonic(omega)`` or ``quadratic(K, c)``.

    ``K`` may be a nested or a flat row-major list; ``c`` is optional.
    """
    m = _SPEC.match(spec)
    if not m:
        raise ValueError(f"cannot parse potential {spec!r}")
    name, args = m.group(1).lower(), m.group(2)
    params = () if not args or not args.strip() else literal_eval("(" + args + ",)")
    if name == "torsional":
        if params:
            raise ValueError("torsional takes no parameters")
        if dim != 2:
            raise ValueError("the torsional potential is two-dimensional")
        return TorsionalPotential()
    if name == "free":
        return free(dim)
    if name == "harmonic":
        if len(params) != 1:
            raise ValueError("harmonic(omega) takes exactly one parameter")
        return harmonic(float(params[0]), dim)
    if name == "quadratic":
        if not 1 <= len(params) <= 2:
            raise ValueError("quadratic(K, c) takes one or two parameters")
        K = np.array(params[0], dtype=float).reshape(dim, dim)
        c = None if len(params) < 2 else np.array(params[1], dtype=float).reshape(dim)
        return QuadraticPotential(K, c)
    raise ValueError(f"unknown potential {name!r}")
