"""Scalar time-stepper for the prototypical equation D_t^{alpha,lambda} u = f.

This is the bare second-order time discretization with no spatial part:
at each step the tempered history sum is equated to the source sampled at
the scheme's temporal locus. Starting corrections for nonsmooth solutions
plug in exactly as in the PDE solvers.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .coeffs import (FracParams, exponent_set, starting_weight_table,
                     substantial_weights)
from .errors import ParameterError, StepFailureError
from .operators import TimeGrid
from .report import ConvergenceReport, make_report


@dataclass(frozen=True)
class ScalarProblem:
    """D_t^{alpha,lambda} u = f on (0, T] with u(0) = 0.

    `source_sampling` picks the temporal locus of f: "shifted" evaluates at
    t_n - alpha*tau/2 (the natural point of the shifted history operator),
    "averaged" uses the two-level weighted mean. Both are second order.
    """

    alpha: float
    lam: complex
    grid: TimeGrid
    source: Callable[[float], complex]
    exact: Callable[[float], complex] | None = None
    source_sampling: str = "shifted"

    def __post_init__(self):
        if self.source_sampling not in ("shifted", "averaged"):
            raise ParameterError(f"unknown source_sampling {self.source_sampling!r}")


@dataclass(frozen=True)
class ScalarSolution:
    values: np.ndarray
    grid: TimeGrid
    max_error: float | None


def _finite(value: complex) -> complex:
    # sources with negative singular exponents blow up at t = 0; the level-0
    # sample only ever appears with weight alpha/2 and is dropped when infinite
    return value if np.isfinite(value) else 0.0


def _source_samples(prob: ScalarProblem, n: int) -> complex:
    tau = prob.grid.tau
    if prob.source_sampling == "shifted":
        return prob.source(n * tau - prob.alpha / 2.0 * tau)
    alpha = prob.alpha
    return ((1.0 - alpha / 2.0) * prob.source(n * tau)
            + (alpha / 2.0) * _finite(prob.source((n - 1) * tau)))


def solve_scalar(prob: ScalarProblem, corrections: int = 0,
                 exponents: Sequence[float] | None = None,
                 start: str = "auto") -> ScalarSolution:
    """March u^1..u^N; returns the trajectory and max_n |u^n - exact(t_n)|.

    With corrections, steps 1..S couple to later levels through the starting
    weights. `start` picks how those levels are obtained: "coupled" solves
    the S x S block system, "exact" seeds them from the known solution
    (reference-table reproduction), "auto" uses "exact" when an exact
    solution is attached and "coupled" otherwise.
    """
    grid = prob.grid
    n_steps = grid.N
    tau = grid.tau
    params = FracParams(prob.alpha, prob.lam, tau)
    table = substantial_weights(params, n_steps)
    g = table.g_lambda
    s_count = int(corrections)
    if s_count < 0:
        raise ParameterError("corrections must be nonnegative")
    if s_count >= n_steps + 1 and s_count > 0:
        raise ParameterError(f"corrections={s_count} requires more than {n_steps} steps")
    if start not in ("auto", "coupled", "exact"):
        raise ParameterError(f"unknown start policy {start!r}")
    if start == "auto":
        start = "exact" if prob.exact is not None else "coupled"
    if start == "exact" and prob.exact is None:
        raise ParameterError("start='exact' needs an exact solution on the problem")

    weights = None
    if s_count > 0:
        if exponents is None:
            exponents = exponent_set(prob.alpha, s_count)
        weights = starting_weight_table(
            params, prob.lam, n_steps, exponents,
            sampling=prob.source_sampling).weights

    u = np.zeros(n_steps + 1, dtype=complex)
    t = grid.nodes()
    tau_a = tau ** prob.alpha

    first = 1
    if s_count > 0:
        if start == "exact":
            for n in range(1, s_count + 1):
                u[n] = prob.exact(t[n])
        else:
            # steps 1..S coupled through the future-level correction weights
            block = np.zeros((s_count, s_count), dtype=complex)
            rhs = np.zeros(s_count, dtype=complex)
            for n in range(1, s_count + 1):
                rhs[n - 1] = _source_samples(prob, n)
                for m in range(1, s_count + 1):
                    coeff = weights[n][m]
                    if m <= n:
                        coeff += g[n - m] / tau_a
                    block[n - 1, m - 1] = coeff
            u[1: s_count + 1] = np.linalg.solve(block, rhs)
        first = s_count + 1

    for n in range(first, n_steps + 1):
        diag = g[0] / tau_a
        if abs(diag) < 1e-300:
            raise StepFailureError("vanishing effective diagonal", n)
        acc = _source_samples(prob, n)
        if n > 1:
            acc -= np.dot(g[n:0:-1], u[:n]) / tau_a
        elif n == 1:
            acc -= g[1] * u[0] / tau_a
        if s_count > 0:
            acc -= np.dot(weights[n][1: s_count + 1], u[1: s_count + 1])
        u[n] = acc / diag

    max_error = None
    if prob.exact is not None:
        exact_vals = np.array([prob.exact(tn) for tn in t[1:]])
        max_error = float(np.abs(u[1:] - exact_vals).max())
    return ScalarSolution(values=u, grid=grid, max_error=max_error)


def error_table_scalar(prob: ScalarProblem, taus: Sequence[float],
                       corrections: int = 0,
                       exponents: Sequence[float] | None = None,
                       start: str = "auto") -> ConvergenceReport:
    """Max-error column over a tau sweep with observed orders."""
    if prob.exact is None:
        raise ParameterError("error table needs an exact solution")
    labels, errors = [], []
    for tau in taus:
        n_steps = round(prob.grid.T / tau)
        if abs(n_steps * tau - prob.grid.T) > 1e-12 * prob.grid.T:
            raise ParameterError(f"tau={tau} does not divide T={prob.grid.T}")
        sub = replace(prob, grid=TimeGrid(prob.grid.T, n_steps))
        sol = solve_scalar(sub, corrections=corrections, exponents=exponents, start=start)
        labels.append(f"1/{n_steps}")
        errors.append(sol.max_error)
    return make_report(labels, list(taus), errors,
                       alpha=prob.alpha, lam=prob.lam, corrections=corrections)
