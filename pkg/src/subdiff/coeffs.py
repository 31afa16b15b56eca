"""Discrete weight sequences for the substantial-derivative schemes.

Everything the time discretization needs is generated here: the binomial
coefficients of (1-z)^alpha, their tempered counterparts
g_k^{alpha,lambda} = exp(-(k - alpha/2) lambda tau) g_k, the cumulative
sums l_n = sum_{k<=n} g_k, the candidate singular exponents
{k + j*alpha <= 2 + alpha}, and the per-step starting weights that make
the corrected operator exact on the basis functions exp(-lambda t) t^beta.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.special import gamma

from .errors import ConditioningError, ParameterError

# Beyond this the scaled node system is considered meaningless.
CONDITION_LIMIT = 1e13
MAX_CORRECTION_TERMS = 6


@dataclass(frozen=True)
class FracParams:
    """Order alpha in (0, 1], tempering parameter lambda, time step tau."""

    alpha: float
    lam: complex = 0.0
    tau: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ParameterError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.tau > 0.0:
            raise ParameterError(f"tau must be positive, got {self.tau}")


@dataclass(frozen=True)
class WeightTable:
    """Weight sequences for a fixed (alpha, lambda, tau).

    g[k] are the plain binomial weights, g_lambda[k] the tempered ones,
    l[n] the partial sums of g. All arrays are read-only; a table can be
    shared freely between concurrent solves.
    """

    g: np.ndarray
    g_lambda: np.ndarray
    l: np.ndarray
    params: FracParams

    def __post_init__(self):
        for arr in (self.g, self.g_lambda, self.l):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.g)


def grunwald_coeffs(alpha: float, n_max: int) -> np.ndarray:
    """Coefficients g_k of (1-z)^alpha for k = 0..n_max.

    Uses the recursion g_0 = 1, g_k = (1 - (alpha+1)/k) g_{k-1}, which is
    algebraically identical to (-1)^k binom(alpha, k).
    """
    if not 0.0 < alpha <= 1.0:
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha}")
    if n_max < 0:
        raise ParameterError(f"n_max must be nonnegative, got {n_max}")
    g = np.empty(n_max + 1)
    g[0] = 1.0
    if n_max:
        k = np.arange(1, n_max + 1, dtype=float)
        g[1:] = np.cumprod(1.0 - (alpha + 1.0) / k)
    return g


def substantial_weights(params: FracParams, n_max: int) -> WeightTable:
    """Full weight table: g, g_lambda and l up to index n_max."""
    g = grunwald_coeffs(params.alpha, n_max)
    k = np.arange(n_max + 1, dtype=float)
    g_lambda = np.exp(-(k - params.alpha / 2.0) * params.lam * params.tau) * g
    return WeightTable(g=g, g_lambda=np.asarray(g_lambda, dtype=complex),
                       l=np.cumsum(g), params=params)


def cumulative_l(weights: WeightTable) -> np.ndarray:
    """Partial sums l_n = sum_{k=0..n} g_k (nonincreasing, nonnegative)."""
    return np.cumsum(weights.g)


def exponent_set(alpha: float, count: int) -> np.ndarray:
    """The `count` smallest positive elements of {k + j*alpha <= 2 + alpha}.

    Coinciding values (such as 2*alpha = 1 at alpha = 0.5) are collapsed.
    """
    if not 0.0 < alpha <= 1.0:
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha}")
    if count < 0:
        raise ParameterError(f"count must be nonnegative, got {count}")
    limit = 2.0 + alpha
    values = []
    j_max = int(np.floor(limit / alpha)) + 1
    for k in range(0, 3):
        for j in range(0, j_max + 1):
            beta = k + j * alpha
            if 0.0 < beta <= limit + 1e-12:
                values.append(beta)
    values.sort()
    distinct: list[float] = []
    for beta in values:
        if not distinct or beta - distinct[-1] > 1e-9:
            distinct.append(beta)
    if count > len(distinct):
        raise ParameterError(
            f"requested {count} exponents but only {len(distinct)} exist for alpha={alpha}")
    return np.asarray(distinct[:count])


class _NodeSystem:
    """Factored node system t_k^{beta_j}, shared by every step and lambda.

    The full matrix A_{jk} = t_k^{beta_j} exp(-lambda t_k) factors as
    V diag(exp(-lambda t_k)) with V lambda-independent, so V is LU-factored
    once (with unit-max column scaling and one step of iterative
    refinement) and reused for every step index and grid point.
    """

    def __init__(self, exponents: np.ndarray, tau: float):
        exponents = np.asarray(exponents, dtype=float)
        if exponents.size == 0:
            raise ParameterError("exponents must be nonempty")
        if exponents.size > MAX_CORRECTION_TERMS:
            raise ParameterError(
                f"at most {MAX_CORRECTION_TERMS} correction terms are supported, "
                f"got {exponents.size}")
        if np.any(exponents <= 0):
            raise ParameterError("exponents must be positive")
        if exponents.size > 1 and np.any(np.diff(np.sort(exponents)) < 1e-12):
            raise ParameterError("exponents must be distinct")
        self.exponents = exponents
        self.tau = tau
        self.s = exponents.size
        self.nodes = np.arange(1, self.s + 1, dtype=float) * tau
        self.v = self.nodes[None, :] ** exponents[:, None]
        self.col_scale = np.abs(self.v).max(axis=0)
        v_scaled = self.v / self.col_scale[None, :]
        self.condition = float(np.linalg.cond(v_scaled, 1))
        if not np.isfinite(self.condition) or self.condition > CONDITION_LIMIT:
            raise ConditioningError("starting-weight system is numerically singular",
                                    self.condition)
        self._lu = lu_factor(v_scaled.astype(complex))

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve V y = rhs for rhs of shape (S, P), with one refinement step."""
        z = lu_solve(self._lu, rhs)
        y = z / self.col_scale[:, None]
        residual = rhs - self.v @ y
        y += lu_solve(self._lu, residual) / self.col_scale[:, None]
        return y


@lru_cache(maxsize=256)
def _node_system(exponents_key: tuple, tau: float) -> _NodeSystem:
    return _NodeSystem(np.asarray(exponents_key), tau)


def _weighted_target(alpha: float, beta: np.ndarray, lam_flat: np.ndarray,
                     t_n: float, tau: float, sampling: str) -> np.ndarray:
    """Exact derivative of exp(-lambda t) t^beta at the scheme's temporal locus.

    Returns shape (S, P). The locus depends on how the scheme samples its
    right-hand side: "shifted" evaluates at t_n - alpha*tau/2, "averaged"
    takes the two-level weighted mean, "plain" evaluates at t_n.
    """
    ratio = gamma(beta + 1.0) / gamma(beta + 1.0 - alpha)
    if sampling == "shifted":
        coeffs = ((1.0, t_n - alpha / 2.0 * tau),)
    elif sampling == "averaged":
        coeffs = ((1.0 - alpha / 2.0, t_n), (alpha / 2.0, t_n - tau))
    elif sampling == "plain":
        coeffs = ((1.0, t_n),)
    else:
        raise ParameterError(f"unknown sampling {sampling!r}")
    out = np.zeros((beta.size, lam_flat.size), dtype=complex)
    for weight, t in coeffs:
        if t > 0.0:
            power = t ** (beta - alpha)
        else:
            # t = 0: derivative of t^beta is finite there only for beta = alpha
            power = np.where(np.abs(beta - alpha) < 1e-12, 1.0, 0.0)
        out += weight * (ratio * power)[:, None] * np.exp(-lam_flat * t)[None, :]
    return out


def starting_weight_grid(params: FracParams, lam_values, n: int,
                         exponents, sampling: str = "averaged") -> np.ndarray:
    """Starting weights w_{n,k} for one step and many lambda values at once.

    Returns shape (S+1,) + shape(lam_values); index k runs over correction
    levels 0..S, with w_{n,0} = 0 (it multiplies the vanishing level 0).
    """
    if n < 1:
        raise ParameterError(f"step index must be >= 1, got {n}")
    beta = np.asarray(exponents, dtype=float)
    lam_probe = np.asarray(lam_values, dtype=complex)
    if beta.size == 0:
        return np.zeros((1,) + lam_probe.shape, dtype=complex)
    system = _node_system(tuple(beta.tolist()), params.tau)
    lam = np.asarray(lam_values, dtype=complex)
    lam_flat = lam.ravel()
    tau, alpha = params.tau, params.alpha
    t_n = n * tau

    g = grunwald_coeffs(alpha, n)
    # sum_{k=0..n} g_k t_{n-k}^beta is lambda-independent (t_0^beta = 0)
    m_arr = np.arange(n, -1, -1, dtype=float) * tau
    hist = np.array([np.dot(g, m_arr ** b) for b in beta])

    target = _weighted_target(alpha, beta, lam_flat, t_n, tau, sampling)
    scale = np.exp(alpha / 2.0 * lam_flat * tau) * np.exp(-lam_flat * t_n) / tau ** alpha
    rhs = target - hist[:, None] * scale[None, :]

    y = system.solve(rhs)
    w = y * np.exp(lam_flat[None, :] * system.nodes[:, None])
    out = np.zeros((beta.size + 1, lam_flat.size), dtype=complex)
    out[1:] = w
    return out.reshape((beta.size + 1,) + lam.shape)


def starting_weights(params: FracParams, lambda_point: complex, n: int,
                     exponents, sampling: str = "averaged") -> np.ndarray:
    """Starting weights w_{n,0..S} for a single lambda value.

    w[k] multiplies the solution at level k in the corrected scheme; w[0]
    is zero by construction (level 0 vanishes after the initial transform).
    """
    lam = np.full(1, complex(lambda_point))
    return starting_weight_grid(params, lam, n, exponents, sampling)[:, 0]


@dataclass(frozen=True)
class StartingWeights:
    """Correction weights for every step of a march at a fixed lambda.

    weights[n, k] is the weight attached to level k at step n (row 0 and
    column 0 are zero). `condition` is the condition estimate of the
    column-scaled node system.
    """

    exponents: np.ndarray
    weights: np.ndarray
    condition: float
    params: FracParams

    def __post_init__(self):
        self.exponents.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def count(self) -> int:
        return int(self.exponents.size)


def starting_weight_table(params: FracParams, lambda_point: complex, n_max: int,
                          exponents, sampling: str = "averaged") -> StartingWeights:
    """StartingWeights for steps 1..n_max at one lambda value."""
    beta = np.asarray(exponents, dtype=float)
    system = _node_system(tuple(beta.tolist()), params.tau)
    rows = np.zeros((n_max + 1, beta.size + 1), dtype=complex)
    for n in range(1, n_max + 1):
        rows[n] = starting_weights(params, lambda_point, n, beta, sampling)
    return StartingWeights(exponents=beta, weights=rows,
                           condition=system.condition, params=params)


def weight_system_condition(exponents: Sequence[float], tau: float) -> float:
    """Condition estimate of the scaled node system for these exponents."""
    beta = np.asarray(exponents, dtype=float)
    return _node_system(tuple(beta.tolist()), tau).condition
