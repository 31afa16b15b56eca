"""2D compact scheme with starting-weight corrections on a rectangle.

Nine-point tensor stencils: the time operator (with its per-point tempered
weights and any correction terms) sits inside the x/y compact averages,
the two second differences each carry the other direction's average, and
the source gets both averages. The interior system matrix is fixed over
the march (the corrected early steps couple into one block system), so its
sparse factorization is built once and reused.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .coeffs import FracParams, exponent_set, grunwald_coeffs, starting_weight_grid
from .errors import ParameterError, StepFailureError, SubdiffError
from .linsolve import BandedMatrix, banded_factor, banded_from_sparse, banded_solve
from .operators import Mesh2D, TimeGrid, compact_average, second_difference
from .pde1d import check_history_scale


@dataclass(frozen=True)
class Problem2D:
    """Dirichlet problem D_t^{alpha,lambda(x,y)} [u - w] = kappa Lap(u) + F."""

    ax: float
    bx: float
    ay: float
    by: float
    T: float
    lam: Callable[[np.ndarray, np.ndarray], np.ndarray]
    source: Callable[[np.ndarray, np.ndarray, float], np.ndarray]
    u0: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    boundary: Callable[[np.ndarray, np.ndarray, float], np.ndarray] | None = None
    exact: Callable[[np.ndarray, np.ndarray, float], np.ndarray] | None = None
    kappa: complex = 1.0
    w_laplacian: Callable[[np.ndarray, np.ndarray, float], np.ndarray] | None = None
    source_sampling: str = "averaged"

    def __post_init__(self):
        if self.source_sampling not in ("shifted", "averaged"):
            raise ParameterError(f"unknown source_sampling {self.source_sampling!r}")


@dataclass(frozen=True)
class Scheme2D:
    """Resolutions and correction switches for the 2D march."""

    alpha: float
    M1: int
    M2: int
    N: int
    corrections: int = 0
    exponents: tuple[float, ...] | None = None
    start: str = "auto"
    e2_final_only: bool = False

    def __post_init__(self):
        if self.corrections < 0:
            raise ParameterError("corrections must be nonnegative")
        if self.N <= self.corrections:
            raise ParameterError(
                f"need N > corrections, got N={self.N}, S={self.corrections}")
        if self.start not in ("auto", "exact", "coupled"):
            raise ParameterError(f"unknown start policy {self.start!r}")


@dataclass(frozen=True)
class Solution2D:
    history: np.ndarray
    mesh: Mesh2D
    grid: TimeGrid
    e2: float | None
    wall_time: float


def _tri(m: int, lo: float, mid: float, hi: float) -> sp.csr_matrix:
    return sp.diags([np.full(m - 1, lo), np.full(m, mid), np.full(m - 1, hi)],
                    [-1, 0, 1], format="csr")


class _Stepper2D:
    def __init__(self, prob: Problem2D, cfg: Scheme2D):
        self.prob = prob
        self.cfg = cfg
        self.mesh = Mesh2D(prob.ax, prob.bx, prob.ay, prob.by, cfg.M1, cfg.M2)
        self.grid = TimeGrid(prob.T, cfg.N)
        self.X, self.Y = self.mesh.meshgrid()
        self.t = self.grid.nodes()
        self.h1, self.h2 = self.mesh.h1, self.mesh.h2
        self.tau = self.grid.tau
        self.alpha = cfg.alpha
        self.kappa = prob.kappa
        self.sampling = prob.source_sampling

        lam_vals = np.asarray(prob.lam(self.X, self.Y), dtype=complex)
        if lam_vals.shape != self.X.shape:
            lam_vals = np.full(self.X.shape, complex(lam_vals), dtype=complex)
        check_history_scale(lam_vals, prob.T)
        self.lam_vals = lam_vals

        if prob.u0 is not None:
            u0_grid = np.asarray(prob.u0(self.X, self.Y), dtype=complex)
            self.w = lambda t_val: np.exp(-lam_vals * t_val) * u0_grid
            self.trivial_w = bool(np.all(u0_grid == 0))
        else:
            self.w = lambda t_val: np.zeros_like(lam_vals)
            self.trivial_w = True

        self.g = grunwald_coeffs(self.alpha, cfg.N).astype(complex)
        self.shift = np.exp(self.alpha / 2.0 * lam_vals * self.tau)
        self.tau_a = self.tau ** self.alpha
        self.c0 = self.shift / self.tau_a
        self.theta_n = self.kappa * (1.0 - self.alpha / 2.0)
        self.theta_m = self.kappa * (self.alpha / 2.0)

        self.s_count = cfg.corrections
        self.exponents = None
        if self.s_count:
            self.exponents = (np.asarray(cfg.exponents, dtype=float)
                              if cfg.exponents is not None
                              else exponent_set(self.alpha, self.s_count))
            self.weight_params = FracParams(self.alpha, 0.0, self.tau)

        m1i, m2i = cfg.M1 - 1, cfg.M2 - 1
        ax1 = _tri(m1i, 1 / 12, 10 / 12, 1 / 12)
        ay1 = _tri(m2i, 1 / 12, 10 / 12, 1 / 12)
        dx1 = _tri(m1i, 1.0, -2.0, 1.0) / self.h1 ** 2
        dy1 = _tri(m2i, 1.0, -2.0, 1.0) / self.h2 ** 2
        # interior index p = (i-1)*m2i + (j-1): x varies in the first factor
        self.axay = sp.kron(ax1, ay1, format="csc")
        self.k_op = (sp.kron(dx1, ay1) + sp.kron(ax1, dy1)).tocsc()
        main = (self.axay @ sp.diags(self.c0[1:-1, 1:-1].ravel())
                - self.theta_n * self.k_op)
        self.matrix = banded_factor(banded_from_sparse(main))

        self.v = np.zeros((cfg.N + 1,) + self.X.shape, dtype=complex)
        self.v_scaled = np.zeros_like(self.v)

        bvals = self._boundary_values()
        self.v_bound = bvals  # list over levels, or None when identically zero

    # -- boundary -------------------------------------------------------------

    def _boundary_values(self):
        """Boundary grids of v per level (None when identically zero)."""
        prob = self.prob
        if prob.boundary is None and self.trivial_w:
            return None
        mask = np.zeros(self.X.shape, dtype=bool)
        mask[0, :] = mask[-1, :] = True
        mask[:, 0] = mask[:, -1] = True
        out = []
        for n in range(self.cfg.N + 1):
            grid = np.zeros(self.X.shape, dtype=complex)
            if prob.boundary is not None:
                vals = np.asarray(prob.boundary(self.X, self.Y, self.t[n]), dtype=complex)
                grid[mask] = vals[mask]
            if not self.trivial_w:
                grid[mask] -= self.w(self.t[n])[mask]
            out.append(grid)
        if all(np.all(g == 0) for g in out):
            return None
        return out

    def boundary_level(self, n: int) -> np.ndarray | None:
        return None if self.v_bound is None else self.v_bound[n]

    # -- grid operators --------------------------------------------------------

    def _axy(self, z: np.ndarray) -> np.ndarray:
        return compact_average(compact_average(z, axis=0), axis=1)

    def lhs_on_grid(self, z: np.ndarray, q: np.ndarray, theta_x: complex) -> np.ndarray:
        """[AxAy diag(q) - theta (Ay dxx + Ax dyy)] z on the full grid."""
        out = self._axy(q * z)
        if theta_x != 0:
            out = out - theta_x * (compact_average(second_difference(z, self.h1, 0), axis=1)
                                   + compact_average(second_difference(z, self.h2, 1), axis=0))
        return out

    def glam(self, k: int) -> np.ndarray:
        return self.shift * np.exp(-k * self.lam_vals * self.tau) * self.g[k]

    def history_term(self, n: int) -> np.ndarray:
        acc = np.tensordot(self.g[n:0:-1], self.v_scaled[:n], axes=(0, 0))
        return self.shift * np.exp(-self.lam_vals * self.t[n]) * acc / self.tau_a

    def _effective_source(self, t_val: float) -> np.ndarray:
        vals = np.asarray(self.prob.source(self.X, self.Y, t_val), dtype=complex)
        if not self.trivial_w and self.prob.w_laplacian is not None:
            vals = vals + self.kappa * np.asarray(
                self.prob.w_laplacian(self.X, self.Y, t_val), dtype=complex)
        return np.where(np.isfinite(vals), vals, 0.0)

    def _discrete_w_lap(self, t_val: float) -> np.ndarray:
        w = self.w(t_val)
        return second_difference(w, self.h1, 0) + second_difference(w, self.h2, 1)

    def _sampled(self, evaluate, n: int) -> np.ndarray:
        if self.sampling == "shifted":
            return evaluate(self.t[n] - self.alpha / 2.0 * self.tau)
        return ((1.0 - self.alpha / 2.0) * evaluate(self.t[n])
                + (self.alpha / 2.0) * evaluate(self.t[n - 1]))

    def rhs_base(self, n: int) -> np.ndarray:
        out = self._axy(self._sampled(self._effective_source, n))
        if not self.trivial_w and self.prob.w_laplacian is None:
            # the discrete layer Laplacian needs one cross average to mirror
            # Ay dxx + Ax dyy acting on the layer
            w_term = self._sampled(
                lambda tv: compact_average(
                    second_difference(self.w(tv), self.h1, 0), axis=1)
                + compact_average(second_difference(self.w(tv), self.h2, 1), axis=0), n)
            out = out + self.kappa * w_term
        return out

    def correction_row(self, n: int) -> np.ndarray:
        return starting_weight_grid(self.weight_params, self.lam_vals, n,
                                    self.exponents, self.sampling)

    def set_level(self, n: int, grid: np.ndarray) -> None:
        self.v[n] = grid
        self.v_scaled[n] = grid * np.exp(self.lam_vals * self.t[n])

    # -- the march --------------------------------------------------------------

    def run(self) -> np.ndarray:
        cfg = self.cfg
        start = cfg.start
        exact_v = self._exact_v()
        if start == "auto":
            start = "exact" if (self.s_count and exact_v is not None) else "coupled"
        if self.s_count and start == "exact" and exact_v is None:
            raise ParameterError("start='exact' needs an exact solution")

        first = 1
        if self.s_count:
            if start == "exact":
                for n in range(1, self.s_count + 1):
                    self.set_level(n, exact_v(self.t[n]))
            else:
                self._coupled_start()
            first = self.s_count + 1

        for n in range(first, cfg.N + 1):
            rhs_grid = self.rhs_base(n) - self._axy(self.history_term(n))
            z = self.v[n - 1]
            rhs_grid = rhs_grid + self.theta_m * (
                compact_average(second_difference(z, self.h1, 0), axis=1)
                + compact_average(second_difference(z, self.h2, 1), axis=0))
            if self.s_count:
                w_row = self.correction_row(n)
                corr = np.einsum("kij,kij->ij", w_row[1:], self.v[1: self.s_count + 1])
                rhs_grid = rhs_grid - self._axy(corr)
            rhs = rhs_grid[1:-1, 1:-1].ravel()
            bnd = self.boundary_level(n)
            full = np.zeros(self.X.shape, dtype=complex)
            if bnd is not None:
                rhs = rhs - self.lhs_on_grid(bnd, self.c0, self.theta_n)[1:-1, 1:-1].ravel()
                full = bnd.copy()
            try:
                interior = banded_solve(self.matrix, rhs)
            except SubdiffError as exc:
                raise StepFailureError(str(exc), n) from exc
            full[1:-1, 1:-1] = interior.reshape(cfg.M1 - 1, cfg.M2 - 1)
            self.set_level(n, full)
        return self.v

    def _exact_v(self):
        if self.prob.exact is None:
            return None

        def ev(t_val: float) -> np.ndarray:
            vals = np.asarray(self.prob.exact(self.X, self.Y, t_val), dtype=complex)
            return vals - self.w(t_val) if not self.trivial_w else vals

        return ev

    def _coupled_start(self) -> None:
        s = self.s_count
        cfg = self.cfg
        pi = (cfg.M1 - 1) * (cfg.M2 - 1)
        rows = {n: self.correction_row(n) for n in range(1, s + 1)}
        blocks = [[None] * s for _ in range(s)]
        rhs = np.zeros(s * pi, dtype=complex)
        for n in range(1, s + 1):
            rhs_grid = self.rhs_base(n)
            for m in range(1, s + 1):
                q = rows[n][m].astype(complex).copy()
                if m <= n:
                    q += self.glam(n - m) / self.tau_a
                theta = self.theta_n if m == n else (self.theta_m if m == n - 1 else 0.0)
                b = self.axay @ sp.diags(q[1:-1, 1:-1].ravel())
                if theta != 0:
                    b = b - theta * self.k_op
                blocks[n - 1][m - 1] = b
                bnd = self.boundary_level(m)
                if bnd is not None:
                    rhs_grid = rhs_grid - self.lhs_on_grid(bnd, q, theta)
            rhs[(n - 1) * pi: n * pi] = rhs_grid[1:-1, 1:-1].ravel()
        big = banded_from_sparse(sp.bmat(blocks, format="csc"))
        try:
            flat = banded_solve(big, rhs)
        except SubdiffError as exc:
            raise StepFailureError(f"coupled starting block failed: {exc}", 1) from exc
        for m in range(1, s + 1):
            full = np.zeros(self.X.shape, dtype=complex)
            bnd = self.boundary_level(m)
            if bnd is not None:
                full = bnd.copy()
            full[1:-1, 1:-1] = flat[(m - 1) * pi: m * pi].reshape(cfg.M1 - 1, cfg.M2 - 1)
            self.set_level(m, full)


def assemble_2d(prob: Problem2D, cfg: Scheme2D) -> tuple[BandedMatrix, Callable[[int], np.ndarray]]:
    """Factored interior matrix plus the per-step base-rhs assembler."""
    stepper = _Stepper2D(prob, cfg)
    return stepper.matrix, stepper.rhs_base


def solve_2d(prob: Problem2D, cfg: Scheme2D) -> Solution2D:
    """Run the 2D compact march; E2 is the max over levels of the interior
    max error (final level only when cfg.e2_final_only is set)."""
    begin = time.perf_counter()
    stepper = _Stepper2D(prob, cfg)
    v = stepper.run()
    history = np.empty_like(v)
    for n in range(cfg.N + 1):
        layer = stepper.w(stepper.t[n]) if not stepper.trivial_w else 0.0
        history[n] = v[n] + layer
    e2 = None
    if prob.exact is not None:
        levels = [cfg.N] if cfg.e2_final_only else range(1, cfg.N + 1)
        worst = 0.0
        for n in levels:
            exact_vals = np.asarray(prob.exact(stepper.X, stepper.Y, stepper.t[n]),
                                    dtype=complex)
            worst = max(worst, float(
                np.abs(history[n] - exact_vals)[1:-1, 1:-1].max()))
        e2 = worst
    return Solution2D(history=history, mesh=stepper.mesh, grid=stepper.grid,
                      e2=e2, wall_time=time.perf_counter() - begin)
