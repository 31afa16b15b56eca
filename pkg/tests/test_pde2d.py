import numpy as np
import pytest
import scipy.sparse as sp
from scipy.special import gamma

from subdiff.errors import ParameterError
from subdiff.harness import build_example
from subdiff.pde2d import Problem2D, Scheme2D, assemble_2d, solve_2d


def power_problem_2d(alpha, lam, beta, qx, qx_dd, n_steps, m,
                     boundary_shape=None, sampling="averaged"):
    """Solution e^{-lam t} t^beta qx(x) qx(y) with constant complex lambda."""
    ratio = gamma(beta + 1.0) / gamma(beta + 1.0 - alpha)

    def shape(x, y):
        return qx(x) * qx(y)

    def lap(x, y):
        return qx_dd(x) * qx(y) + qx(x) * qx_dd(y)

    def source(x, y, t):
        tp = t ** (beta - alpha) if t > 0 else (1.0 if beta == alpha else 0.0)
        return np.exp(-lam * t) * (ratio * tp * shape(x, y) - t ** beta * lap(x, y))

    def exact(x, y, t):
        return np.exp(-lam * t) * t ** beta * shape(x, y)

    boundary = None
    if boundary_shape is not None:
        def boundary(x, y, t):
            return np.exp(-lam * t) * t ** beta * shape(x, y)

    return Problem2D(ax=0.0, bx=1.0, ay=0.0, by=1.0, T=1.0,
                     lam=lambda x, y: np.full(np.shape(x), lam, dtype=complex),
                     source=source, boundary=boundary, exact=exact,
                     source_sampling=sampling)


class TestAssembly:
    def _dense_kron_oracle(self, m, tau, alpha, kappa, scale):
        h = 1.0 / m
        mi = m - 1
        tri = sp.diags([np.ones(mi - 1), 10 * np.ones(mi), np.ones(mi - 1)],
                       [-1, 0, 1]) / 12.0
        lap = sp.diags([np.ones(mi - 1), -2 * np.ones(mi), np.ones(mi - 1)],
                       [-1, 0, 1]) / h ** 2
        return (scale * sp.kron(tri, tri)
                - kappa * (1 - alpha / 2) * (sp.kron(lap, tri) + sp.kron(tri, lap))
                ).toarray()

    def test_integer_order_crank_nicolson_matrix(self):
        m, n_steps = 4, 4
        prob = power_problem_2d(1.0, 0.0, 1.0, lambda x: x * (1 - x),
                                lambda x: -2.0 * np.ones_like(x), n_steps, m)
        matrix, _ = assemble_2d(prob, Scheme2D(alpha=1.0, M1=m, M2=m, N=n_steps))
        tau = 1.0 / n_steps
        oracle = self._dense_kron_oracle(m, tau, 1.0, 1.0, 1.0 / tau)
        assert np.allclose(matrix.matrix.toarray(), oracle, atol=1e-13)

    def test_constant_lambda_matrix(self):
        m, n_steps, alpha, lam = 4, 5, 0.4, 0.3 + 0.1j
        prob = power_problem_2d(alpha, lam, 1.0, lambda x: x * (1 - x),
                                lambda x: -2.0 * np.ones_like(x), n_steps, m)
        matrix, _ = assemble_2d(prob, Scheme2D(alpha=alpha, M1=m, M2=m, N=n_steps))
        tau = 1.0 / n_steps
        scale = np.exp(alpha / 2 * lam * tau) / tau ** alpha
        oracle = self._dense_kron_oracle(m, tau, alpha, 1.0, scale)
        assert np.allclose(matrix.matrix.toarray(), oracle, atol=1e-13)
        assert matrix.bandwidth == m  # lexicographic 9-point coupling

    def test_tiny_grid_against_dense_solve(self):
        m = 4
        prob = build_example("example-6.3", 0.3)
        cfg = Scheme2D(alpha=0.3, M1=m, M2=m, N=3)
        matrix, rhs_base = assemble_2d(prob, cfg)
        rhs = rhs_base(1)[1:-1, 1:-1].ravel()
        from subdiff.linsolve import banded_solve
        ours = banded_solve(matrix, rhs)
        oracle = np.linalg.solve(matrix.matrix.toarray(), rhs)
        assert np.allclose(ours, oracle, rtol=1e-12)


class TestSolve2D:
    def test_reference_cells_without_corrections(self):
        prob = build_example("example-6.3", 0.2)
        for n_steps, ref in ((8, 8.68e-3), (16, 8.03e-3)):
            sol = solve_2d(prob, Scheme2D(alpha=0.2, M1=60, M2=60, N=n_steps))
            assert sol.e2 == pytest.approx(ref, rel=0.02)

    def test_corrections_restore_second_order(self):
        prob = build_example("example-6.3", 0.2)
        errs = []
        for n_steps in (8, 16):
            cfg = Scheme2D(alpha=0.2, M1=60, M2=60, N=n_steps, corrections=2)
            errs.append(solve_2d(prob, cfg).e2)
        assert np.log2(errs[0] / errs[1]) == pytest.approx(1.93, abs=0.15)

    def test_coupled_start_close_to_seeded_start(self):
        prob = build_example("example-6.3", 0.2)
        base = {}
        for start in ("exact", "coupled"):
            cfg = Scheme2D(alpha=0.2, M1=30, M2=30, N=8, corrections=2, start=start)
            base[start] = solve_2d(prob, cfg).e2
        assert base["coupled"] <= 5.0 * base["exact"] + 1e-6

    def test_solution_symmetry(self):
        prob = build_example("example-6.3", 0.3)
        sol = solve_2d(prob, Scheme2D(alpha=0.3, M1=24, M2=24, N=6, corrections=2))
        final = sol.history[-1]
        assert np.abs(final - final.T).max() <= 1e-11

    def test_final_only_error_variant(self):
        prob = build_example("example-6.3", 0.2)
        full = solve_2d(prob, Scheme2D(alpha=0.2, M1=20, M2=20, N=8))
        final = solve_2d(prob, Scheme2D(alpha=0.2, M1=20, M2=20, N=8,
                                        e2_final_only=True))
        assert final.e2 <= full.e2 + 1e-15

    def test_basis_exactness_with_correction(self):
        alpha, lam, beta = 0.3, 0.2 + 0.4j, 0.3

        def qx(x):
            return x ** 2 * (1 - x) ** 2

        def qx_dd(x):
            return 2.0 - 12.0 * x + 12.0 * x ** 2

        prob = power_problem_2d(alpha, lam, beta, qx, qx_dd, 8, 6)
        cfg = Scheme2D(alpha=alpha, M1=6, M2=6, N=8, corrections=1,
                       exponents=(beta,), start="coupled")
        sol = solve_2d(prob, cfg)
        assert sol.e2 <= 1e-9

    def test_nonzero_boundary_exact(self):
        alpha, lam, beta = 0.5, 0.1, 0.5

        def qx(x):
            return x ** 2 + 1.0

        def qx_dd(x):
            return 2.0 * np.ones_like(x)

        prob = power_problem_2d(alpha, lam, beta, qx, qx_dd, 6, 5,
                                boundary_shape=True)
        cfg = Scheme2D(alpha=alpha, M1=5, M2=5, N=6, corrections=1,
                       exponents=(beta,), start="coupled")
        sol = solve_2d(prob, cfg)
        assert sol.e2 <= 1e-8

    def test_rectangular_mesh(self):
        prob = build_example("example-6.3", 0.4)
        sol = solve_2d(prob, Scheme2D(alpha=0.4, M1=12, M2=18, N=4))
        assert sol.history.shape == (5, 13, 19)
        assert np.isfinite(sol.e2)

    def test_validation(self):
        with pytest.raises(ParameterError):
            Scheme2D(alpha=0.5, M1=8, M2=8, N=2, corrections=3)
