import cmath

import numpy as np
import pytest
from scipy.special import binom, gamma

from subdiff.coeffs import (FracParams, cumulative_l, exponent_set,
                            grunwald_coeffs, starting_weight_grid,
                            starting_weight_table, starting_weights,
                            substantial_weights, weight_system_condition)
from subdiff.errors import ConditioningError, ParameterError

from util import corrected_operator_residual


class TestGrunwaldCoeffs:
    def test_integer_order_collapse(self):
        assert np.allclose(grunwald_coeffs(1.0, 3), [1.0, -1.0, 0.0, 0.0])

    def test_half_order_values(self):
        # oracle: (-1)^k binom(1/2, k) evaluated directly
        assert np.allclose(grunwald_coeffs(0.5, 2), [1.0, -0.5, -0.125])

    def test_first_coefficient_is_minus_alpha(self):
        assert np.allclose(grunwald_coeffs(0.2, 1), [1.0, -0.2])

    @pytest.mark.parametrize("alpha", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    def test_recursion_matches_binomial(self, alpha):
        g = grunwald_coeffs(alpha, 64)
        k = np.arange(65)
        oracle = (-1.0) ** k * binom(alpha, k)
        assert np.allclose(g, oracle, rtol=1e-12, atol=1e-300)

    def test_negative_and_all_later_terms(self):
        for alpha in (0.1, 0.5, 0.9):
            g = grunwald_coeffs(alpha, 200)
            assert np.all(g[1:] < 0)

    @pytest.mark.parametrize("alpha", [0.0, -0.5, 1.5])
    def test_invalid_alpha(self, alpha):
        with pytest.raises(ParameterError):
            grunwald_coeffs(alpha, 4)

    def test_negative_count(self):
        with pytest.raises(ParameterError):
            grunwald_coeffs(0.5, -1)


class TestSubstantialWeights:
    def test_zero_lambda_reduces_to_plain(self):
        table = substantial_weights(FracParams(0.5, 0.0, 0.1), 12)
        assert np.allclose(table.g_lambda.real, table.g)
        assert np.allclose(table.g_lambda.imag, 0.0)

    def test_leading_weight_carries_half_shift(self):
        # g_lambda[0] = exp(+alpha*lambda*tau/2)
        table = substantial_weights(FracParams(0.5, 0.5, 0.1), 4)
        assert table.g_lambda[0] == pytest.approx(np.exp(0.5 * 0.5 * 0.1 / 2.0))

    def test_complex_weight_value(self):
        table = substantial_weights(FracParams(0.2, 1.0 + 1.0j, 0.25), 4)
        g2 = (1.0 - 1.2 / 1.0) * (1.0 - 1.2 / 2.0)  # recursion by hand
        oracle = cmath.exp(-(2.0 - 0.1) * (1.0 + 1.0j) * 0.25) * g2
        assert table.g_lambda[2] == pytest.approx(oracle, rel=1e-14)

    def test_table_is_read_only(self):
        table = substantial_weights(FracParams(0.5, 0.0, 0.1), 4)
        with pytest.raises(ValueError):
            table.g[0] = 2.0

    def test_invalid_params(self):
        with pytest.raises(ParameterError):
            FracParams(0.5, 0.0, -1.0)
        with pytest.raises(ParameterError):
            FracParams(1.2, 0.0, 0.1)


class TestCumulativeL:
    def test_first_two_values(self):
        for alpha in (0.15, 0.5, 0.85):
            table = substantial_weights(FracParams(alpha, 0.0, 0.1), 8)
            l = cumulative_l(table)
            assert l[0] == pytest.approx(1.0)
            assert l[1] == pytest.approx(1.0 - alpha)

    def test_integer_order_telescopes(self):
        table = substantial_weights(FracParams(1.0, 0.0, 0.1), 6)
        assert np.allclose(cumulative_l(table)[1:], 0.0, atol=1e-15)

    def test_lower_bound_example(self):
        table = substantial_weights(FracParams(0.5, 0.0, 0.1), 4)
        l = cumulative_l(table)
        assert l[3] >= 1.0 / (4.0 ** 0.5 * gamma(0.5))

    @pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
    def test_monotone_nonnegative_and_bounded_below(self, alpha):
        n_max = 10_000
        table = substantial_weights(FracParams(alpha, 0.0, 0.1), n_max)
        l = table.l
        assert np.all(np.diff(l) <= 1e-16)
        assert np.all(l >= 0.0)
        n = np.arange(1, n_max + 1, dtype=float)
        assert np.all(l[:-1] >= 1.0 / (n ** alpha * gamma(1.0 - alpha)) - 1e-15)

    def test_partial_sums_vanish(self):
        table = substantial_weights(FracParams(0.3, 0.0, 0.1), 200_000)
        assert table.l[-1] < 2.5e-2  # slow monotone decay toward zero


class TestExponentSet:
    def test_small_alpha(self):
        assert np.allclose(exponent_set(0.2, 3), [0.2, 0.4, 0.6])

    def test_duplicate_collapse_at_half(self):
        assert np.allclose(exponent_set(0.5, 3), [0.5, 1.0, 1.5])

    def test_empty(self):
        assert exponent_set(0.3, 0).size == 0

    def test_too_many(self):
        with pytest.raises(ParameterError):
            exponent_set(0.9, 50)

    def test_all_elements_admissible(self):
        alpha = 0.3
        for beta in exponent_set(alpha, 8):
            assert beta <= 2.0 + alpha + 1e-12
            # representable as k + j*alpha
            found = any(abs(beta - (k + j * alpha)) < 1e-9
                        for k in range(0, 3) for j in range(0, 12))
            assert found


class TestStartingWeights:
    def test_empty_exponents_gives_zero_vector(self):
        w = starting_weights(FracParams(0.5, 0.0, 0.1), 0.0, 2, [])
        assert np.allclose(w, 0.0)

    def test_one_by_one_system_closed_form(self):
        # exactness demand on the single basis function t^0.2 at n = 8
        alpha, tau, n, beta = 0.2, 1.0 / 8.0, 8, 0.2
        params = FracParams(alpha, 0.0, tau)
        w = starting_weights(params, 0.0, n, [beta], sampling="averaged")
        g = grunwald_coeffs(alpha, n)
        t = np.arange(n + 1) * tau
        hist = np.dot(g, t[n::-1] ** beta) / tau ** alpha
        ratio = gamma(beta + 1.0) / gamma(beta + 1.0 - alpha)
        target = ((1.0 - alpha / 2.0) * ratio * t[n] ** (beta - alpha)
                  + (alpha / 2.0) * ratio * t[n - 1] ** (beta - alpha))
        oracle = (target - hist) / tau ** beta  # t_1 = tau, single node
        assert w[0] == 0.0
        assert w[1] == pytest.approx(oracle, rel=1e-12)

    @pytest.mark.parametrize("sampling", ["averaged", "shifted", "plain"])
    @pytest.mark.parametrize("lam", [0.0, 0.5, 0.3 + 0.7j])
    def test_basis_exactness(self, sampling, lam):
        alpha, tau = 0.4, 1.0 / 16.0
        exps = exponent_set(alpha, 3)
        params = FracParams(alpha, 0.0, tau)
        cond = weight_system_condition(exps, tau)
        for n in (1, 2, 5, 16):
            row = starting_weights(params, lam, n, exps, sampling=sampling)
            for beta in exps:
                res = corrected_operator_residual(alpha, lam, tau, exps, n, row,
                                                  beta, sampling)
                assert res <= 1e-9 * max(1.0, cond)

    def test_grid_matches_pointwise(self):
        params = FracParams(0.3, 0.0, 0.05)
        lam_grid = np.array([0.0, 0.2 + 0.1j, 1.0])
        exps = exponent_set(0.3, 2)
        grid = starting_weight_grid(params, lam_grid, 4, exps)
        for idx, lam in enumerate(lam_grid):
            single = starting_weights(params, lam, 4, exps)
            assert np.allclose(grid[:, idx], single, rtol=1e-12)

    def test_table_shape_and_condition(self):
        params = FracParams(0.25, 0.0, 0.1)
        table = starting_weight_table(params, 0.1, 6, exponent_set(0.25, 2))
        assert table.weights.shape == (7, 3)
        assert np.allclose(table.weights[0], 0.0)
        assert table.condition >= 1.0
        assert table.count == 2

    def test_near_singular_system_raises(self):
        with pytest.raises((ConditioningError, ParameterError)):
            starting_weights(FracParams(0.5, 0.0, 0.1), 0.0, 3,
                             [0.5, 0.5 + 1e-13])

    def test_step_index_validation(self):
        with pytest.raises(ParameterError):
            starting_weights(FracParams(0.5, 0.0, 0.1), 0.0, 0, [0.5])
