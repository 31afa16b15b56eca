"""Grids, discrete time/space operators, exact derivatives and error norms.

The quadrature routine at the bottom is a reference evaluator for the
weighted fractional derivative of arbitrary smooth functions; it exists so
tests can check the discrete operators against something that does not
share their code path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gamma, roots_jacobi

from .coeffs import WeightTable
from .errors import MeshMismatchError, OracleConvergenceError, ParameterError


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_n = n*tau on [0, T] with tau = T/N."""

    T: float
    N: int

    def __post_init__(self):
        if self.T <= 0 or self.N < 1:
            raise ParameterError(f"need T > 0 and N >= 1, got T={self.T}, N={self.N}")

    @property
    def tau(self) -> float:
        return self.T / self.N

    def nodes(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.tau


@dataclass(frozen=True)
class Mesh1D:
    """Uniform mesh x_i = a + i*h on [a, b] with h = (b-a)/M."""

    a: float
    b: float
    M: int

    def __post_init__(self):
        if self.M < 2 or self.b <= self.a:
            raise ParameterError(f"need M >= 2 and b > a, got M={self.M}, [{self.a}, {self.b}]")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.M

    def nodes(self) -> np.ndarray:
        return self.a + np.arange(self.M + 1) * self.h


@dataclass(frozen=True)
class Mesh2D:
    """Tensor mesh on [ax, bx] x [ay, by]; axis 0 is x, axis 1 is y."""

    ax: float
    bx: float
    ay: float
    by: float
    M1: int
    M2: int

    def __post_init__(self):
        if self.M1 < 2 or self.M2 < 2:
            raise ParameterError(f"need M1, M2 >= 2, got {self.M1}, {self.M2}")
        if self.bx <= self.ax or self.by <= self.ay:
            raise ParameterError("degenerate rectangle")

    @property
    def h1(self) -> float:
        return (self.bx - self.ax) / self.M1

    @property
    def h2(self) -> float:
        return (self.by - self.ay) / self.M2

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        x = self.ax + np.arange(self.M1 + 1) * self.h1
        y = self.ay + np.arange(self.M2 + 1) * self.h2
        return x, y

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        x, y = self.nodes()
        return np.meshgrid(x, y, indexing="ij")


def time_average(alpha: float, v_n: np.ndarray, v_nm1: np.ndarray) -> np.ndarray:
    """(1 - alpha/2) v^n + (alpha/2) v^{n-1}, pointwise."""
    v_n = np.asarray(v_n)
    v_nm1 = np.asarray(v_nm1)
    if v_n.shape != v_nm1.shape:
        raise MeshMismatchError(f"shapes differ: {v_n.shape} vs {v_nm1.shape}")
    return (1.0 - alpha / 2.0) * v_n + (alpha / 2.0) * v_nm1


def substantial_history_sum(weights: WeightTable, history: np.ndarray, n: int) -> np.ndarray:
    """(1/tau^alpha) sum_{k=0..n} g_lambda[k] v^{n-k} for constant lambda.

    `history` holds levels 0..n along its first axis.
    """
    history = np.asarray(history)
    if history.shape[0] < n + 1:
        raise MeshMismatchError(f"history holds {history.shape[0]} levels, need {n + 1}")
    if len(weights) < n + 1:
        raise ParameterError(f"weight table too short: {len(weights)} < {n + 1}")
    tau = weights.params.tau
    g = weights.g_lambda[: n + 1]
    acc = np.tensordot(g, history[n::-1], axes=(0, 0))
    return acc / tau ** weights.params.alpha


def exact_power_derivative(alpha: float, lam: complex, beta: float, t: float) -> complex:
    """Weighted derivative of exp(-lambda t) t^beta:
    exp(-lambda t) * Gamma(beta+1)/Gamma(beta+1-alpha) * t^(beta-alpha).
    """
    if beta < 0 or (beta == 0 and t <= 0):
        raise ParameterError(f"need beta > 0 or (beta = 0 with t > 0), got beta={beta}, t={t}")
    pole = beta + 1.0 - alpha
    if pole <= 0 and abs(pole - round(pole)) < 1e-12:
        raise ParameterError(f"gamma pole at beta+1-alpha = {pole}")
    ratio = gamma(beta + 1.0) / gamma(pole)
    if t == 0.0:
        power = 1.0 if abs(beta - alpha) < 1e-14 else (0.0 if beta > alpha else np.inf)
    else:
        power = t ** (beta - alpha)
    return np.exp(-lam * t) * ratio * power


def oracle_substantial_derivative(f: Callable[[float], complex], alpha: float,
                                  lam: complex, t: float, tol: float = 1e-10,
                                  dg: Callable[[float], complex] | None = None) -> complex:
    """Quadrature reference value of the weighted derivative of f at t.

    Requires f(0) = 0 and the analytic derivative dg of g(s) = exp(lambda s) f(s);
    then the derivative equals
    exp(-lambda t)/Gamma(1-alpha) * int_0^t dg(s) (t-s)^(-alpha) ds.
    The endpoint singularity is absorbed by Gauss-Jacobi nodes, refined until
    two consecutive levels agree to tol.
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    if not 0.0 < alpha <= 1.0:
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha}")
    if dg is None:
        raise ParameterError("supply dg, the derivative of exp(lambda s) f(s)")
    if abs(f(0.0)) > 1e-13:
        raise ParameterError("oracle requires f(0) = 0")
    if alpha == 1.0:
        return np.exp(-lam * t) * dg(t)
    prev = None
    for m in (8, 16, 32, 64, 128, 256, 512):
        nodes, w = roots_jacobi(m, -alpha, 0.0)
        s = t * (nodes + 1.0) / 2.0
        vals = np.array([dg(si) for si in s])
        integral = (t / 2.0) ** (1.0 - alpha) * np.dot(w, vals)
        value = np.exp(-lam * t) / gamma(1.0 - alpha) * integral
        if prev is not None and abs(value - prev) <= tol:
            return value
        prev = value
    raise OracleConvergenceError(
        f"quadrature did not reach tol={tol} at t={t} (last delta {abs(value - prev):.3e})")


def compact_average(v: np.ndarray, axis: int = 0) -> np.ndarray:
    """(1, 10, 1)/12 average along `axis`; end slices pass through unchanged."""
    v = np.asarray(v)
    out = np.copy(v)
    inner = [slice(None)] * v.ndim
    lo = [slice(None)] * v.ndim
    hi = [slice(None)] * v.ndim
    inner[axis] = slice(1, -1)
    lo[axis] = slice(None, -2)
    hi[axis] = slice(2, None)
    out[tuple(inner)] = (v[tuple(lo)] + 10.0 * v[tuple(inner)] + v[tuple(hi)]) / 12.0
    return out


def second_difference(v: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
    """(v_{i-1} - 2 v_i + v_{i+1})/h^2 along `axis`; end slices are zeroed.

    End values of a second difference are not defined by the stencil; the
    zeros are placeholders for callers that handle boundaries themselves.
    """
    v = np.asarray(v)
    out = np.zeros_like(v, dtype=np.result_type(v.dtype, float))
    inner = [slice(None)] * v.ndim
    lo = [slice(None)] * v.ndim
    hi = [slice(None)] * v.ndim
    inner[axis] = slice(1, -1)
    lo[axis] = slice(None, -2)
    hi[axis] = slice(2, None)
    out[tuple(inner)] = (v[tuple(lo)] - 2.0 * v[tuple(inner)] + v[tuple(hi)]) / h ** 2
    return out


def compact_average_1d(v: np.ndarray) -> np.ndarray:
    return compact_average(v, axis=0)


def second_difference_1d(v: np.ndarray, h: float) -> np.ndarray:
    return second_difference(v, h, axis=0)


def grid_norms(err, spacing) -> tuple[float, float]:
    """(max norm, discrete L2 norm) of a full-grid error field.

    Only interior nodes contribute; `spacing` is h in 1D or (h1, h2) in 2D.
    """
    err = np.asarray(err)
    if err.ndim == 1:
        interior = err[1:-1]
        weight = float(spacing)
    elif err.ndim == 2:
        interior = err[1:-1, 1:-1]
        h1, h2 = spacing
        weight = float(h1) * float(h2)
    else:
        raise ParameterError(f"expected a 1D or 2D field, got ndim={err.ndim}")
    mod = np.abs(interior)
    if mod.size == 0:
        return 0.0, 0.0
    return float(mod.max()), float(np.sqrt(weight * np.sum(mod ** 2)))
