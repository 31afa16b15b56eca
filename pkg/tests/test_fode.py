import numpy as np
import pytest
from scipy.special import gamma

from subdiff.errors import ParameterError
from subdiff.fode import ScalarProblem, error_table_scalar, solve_scalar
from subdiff.harness import build_example
from subdiff.operators import TimeGrid, exact_power_derivative


def power_problem(alpha, lam, terms, n_steps, sampling="shifted", T=1.0):
    """Problem whose solution is exp(-lam t) * sum c * t^beta."""

    def source(t):
        if t == 0.0:
            vals = []
            for c, beta in terms:
                if beta == alpha:
                    vals.append(c * gamma(1.0 + alpha))
                elif beta > alpha:
                    vals.append(0.0)
                else:
                    return np.inf
            return sum(vals)
        return sum(c * exact_power_derivative(alpha, lam, beta, t)
                   for c, beta in terms)

    def exact(t):
        return np.exp(-lam * t) * sum(c * t ** beta for c, beta in terms)

    return ScalarProblem(alpha=alpha, lam=lam, grid=TimeGrid(T, n_steps),
                         source=source, exact=exact, source_sampling=sampling)


class TestSolveScalar:
    def test_reference_cell_alpha02(self):
        prob = build_example("example-6.1", 0.2, nu=2.5, n_steps=16)
        sol = solve_scalar(prob)
        assert sol.max_error == pytest.approx(1.9225e-4, rel=0.02)

    def test_reference_cell_alpha05_with_rate(self):
        errs = {}
        for n in (16, 32):
            prob = build_example("example-6.1", 0.5, nu=2.5, n_steps=n)
            errs[n] = solve_scalar(prob).max_error
        assert errs[32] == pytest.approx(1.2002e-4, rel=0.02)
        assert np.log2(errs[16] / errs[32]) == pytest.approx(1.99, abs=0.05)

    def test_zero_source_stays_zero(self):
        prob = ScalarProblem(alpha=0.5, lam=0.3, grid=TimeGrid(1.0, 20),
                             source=lambda t: 0.0)
        sol = solve_scalar(prob)
        assert np.allclose(sol.values, 0.0)
        assert sol.max_error is None

    @pytest.mark.parametrize("sampling", ["shifted", "averaged"])
    def test_second_order_for_smooth_solutions(self, sampling):
        for alpha in (0.2, 0.5, 0.8):
            errs = []
            for n in (32, 64):
                prob = power_problem(alpha, 0.5, [(1.0, 3.0), (1.0, 2.5)], n,
                                     sampling=sampling)
                errs.append(solve_scalar(prob).max_error)
            assert np.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.1)

    @pytest.mark.parametrize("sampling", ["shifted", "averaged"])
    @pytest.mark.parametrize("start", ["coupled", "exact"])
    def test_corrections_exact_on_basis_span(self, sampling, start):
        # solution assembled from corrected basis functions is reproduced
        # to solver tolerance at every step
        alpha, lam = 0.3, 0.4 + 0.2j
        exps = (alpha, 2.0 * alpha, 1.0)
        terms = [(0.7, alpha), (-0.4, 2.0 * alpha), (1.3, 1.0)]
        prob = power_problem(alpha, lam, terms, 24, sampling=sampling)
        sol = solve_scalar(prob, corrections=3, exponents=exps, start=start)
        assert sol.max_error <= 1e-9

    def test_corrections_restore_order_on_singular_solution(self):
        alpha = 0.4
        terms = [(1.0, alpha), (1.0, 2 * alpha), (1.0, 3.0)]
        errs_plain, errs_corr = [], []
        for n in (32, 64):
            prob = power_problem(alpha, 0.5, terms, n)
            errs_plain.append(solve_scalar(prob).max_error)
            errs_corr.append(
                solve_scalar(prob, corrections=2, start="coupled").max_error)
        rate_plain = np.log2(errs_plain[0] / errs_plain[1])
        rate_corr = np.log2(errs_corr[0] / errs_corr[1])
        assert rate_plain < 1.0
        assert rate_corr == pytest.approx(2.0, abs=0.25)
        assert errs_corr[1] < errs_plain[1] / 50.0

    def test_start_policy_validation(self):
        prob = ScalarProblem(alpha=0.5, lam=0.0, grid=TimeGrid(1.0, 8),
                             source=lambda t: 0.0)
        with pytest.raises(ParameterError):
            solve_scalar(prob, corrections=1, start="exact")
        with pytest.raises(ParameterError):
            solve_scalar(prob, corrections=-1)


class TestErrorTable:
    def test_degraded_rates_nu_half(self):
        prob = build_example("example-6.1", 0.8, nu=0.5)
        report = error_table_scalar(prob, [1 / 16, 1 / 32, 1 / 64, 1 / 128])
        rates = [r for r in report.rates if r is not None]
        assert rates == pytest.approx([0.48, 0.49, 0.49], abs=0.05)

    def test_first_order_rates_nu_one(self):
        prob = build_example("example-6.1", 0.5, nu=1.0)
        report = error_table_scalar(prob, [1 / 16, 1 / 32, 1 / 64, 1 / 128])
        rates = [r for r in report.rates if r is not None]
        assert rates == pytest.approx([1.00, 0.99, 1.00], abs=0.05)

    def test_smooth_cubic_keeps_order_two(self):
        prob = power_problem(0.5, 0.5, [(2.0, 3.0)], 16)
        report = error_table_scalar(prob, [1 / 16, 1 / 32, 1 / 64])
        assert all(r >= 1.95 for r in report.rates if r is not None)

    def test_bad_tau_rejected(self):
        prob = build_example("example-6.1", 0.5)
        with pytest.raises(ParameterError):
            error_table_scalar(prob, [0.3])
