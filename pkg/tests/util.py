"""Shared helpers for the property checks used across the test suite."""

from __future__ import annotations

import numpy as np

from subdiff.coeffs import FracParams, grunwald_coeffs, substantial_weights


def delta_t_sequence(alpha: float, lam: float, tau: float, values: np.ndarray) -> np.ndarray:
    """delta_t^{alpha,lambda} applied to a scalar sequence, all levels."""
    n_max = len(values) - 1
    table = substantial_weights(FracParams(alpha, lam, tau), n_max)
    out = np.empty(n_max + 1, dtype=complex)
    for n in range(n_max + 1):
        out[n] = np.dot(table.g_lambda[: n + 1], values[n::-1]) / tau ** alpha
    return out


def lemma41_gap(alpha: float, lam: float, tau: float, values: np.ndarray) -> float:
    """Smallest margin of the quadratic history inequality over the sequence.

    For real sequences and real lambda the scheme theory gives
    v^n * d_t v^n >= (1/2) e^{-a lam tau/2} d_t^{(2 lam)} (v^n)^2
                     + (e^{-a lam tau/2}/2) tau^a (d_t v^n)^2.
    Returns min_n (lhs - rhs); nonnegative when the inequality holds.
    """
    d1 = delta_t_sequence(alpha, lam, tau, values).real
    d2 = delta_t_sequence(alpha, 2.0 * lam, tau, values.astype(float) ** 2).real
    factor = np.exp(-alpha / 2.0 * lam * tau)
    lhs = values * d1
    rhs = 0.5 * factor * d2 + 0.5 * factor * tau ** alpha * d1 ** 2
    return float((lhs - rhs).min())


def random_zero_boundary_field(rng: np.random.Generator, m: int) -> np.ndarray:
    v = rng.standard_normal(m + 1) + 1j * rng.standard_normal(m + 1)
    v[0] = v[-1] = 0.0
    return v


def discrete_inner(u: np.ndarray, v: np.ndarray, h: float) -> complex:
    return h * np.sum(u[1:-1] * np.conj(v[1:-1]))


def corrected_operator_residual(alpha: float, lam: complex, tau: float,
                                exponents, n: int, weights_row: np.ndarray,
                                beta: float, sampling: str) -> float:
    """|delta_t f(t_n) + sum_k w_{n,k} f(t_k) - target| for f = e^{-lam t} t^beta."""
    from scipy.special import gamma

    g = grunwald_coeffs(alpha, n)
    glam = np.exp(-(np.arange(n + 1) - alpha / 2.0) * lam * tau) * g
    t = np.arange(n + 1) * tau

    def f(tv):
        return np.exp(-lam * tv) * tv ** beta

    hist = np.dot(glam, f(t[n::-1])) / tau ** alpha
    s = len(weights_row) - 1
    corr = sum(weights_row[k] * f(k * tau) for k in range(1, s + 1))
    ratio = gamma(beta + 1.0) / gamma(beta + 1.0 - alpha)

    def target_at(tv):
        if tv == 0:
            power = 1.0 if beta == alpha else 0.0
        else:
            power = tv ** (beta - alpha)
        return ratio * power * np.exp(-lam * tv)

    if sampling == "shifted":
        target = target_at(t[n] - alpha / 2.0 * tau)
    elif sampling == "plain":
        target = target_at(t[n])
    else:
        target = ((1.0 - alpha / 2.0) * target_at(t[n])
                  + (alpha / 2.0) * target_at(t[n - 1]))
    return abs(hist + corr - target)
