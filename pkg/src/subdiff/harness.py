"""Experiment runner: builds the bundled example problems, runs refinement
sweeps, assembles rate tables and diffs them against the reference values.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
import numpy as np
from scipy.special import gamma

from .errors import ParameterError
from .fode import ScalarProblem, solve_scalar
from .operators import TimeGrid
from .pde1d import Problem1D, SchemeConfig, solve_1d
from .pde2d import Problem2D, Scheme2D, solve_2d
from .reference_tables import REFERENCE_TABLES, ReferenceTable
from .report import ConvergenceReport, make_report


# ---------------------------------------------------------------------------
# example problems
# ---------------------------------------------------------------------------

def _scalar_example(alpha: float, nu: float = 2.5, lam: complex = 0.5,
                    n_steps: int = 16, sampling: str = "shifted") -> ScalarProblem:
    """Solution exp(-lam t)(t^3 + t^nu) of the bare scalar equation."""
    c3 = gamma(4.0) / gamma(4.0 - alpha)
    cn = gamma(nu + 1.0) / gamma(nu + 1.0 - alpha)

    def source(t: float) -> complex:
        if t == 0.0:
            p = 1.0 if nu == alpha else (0.0 if nu > alpha else np.inf)
        else:
            p = t ** (nu - alpha)
        return np.exp(-lam * t) * (c3 * t ** (3.0 - alpha) + cn * p)

    def exact(t: float) -> complex:
        return np.exp(-lam * t) * (t ** 3 + t ** nu)

    return ScalarProblem(alpha=alpha, lam=lam, grid=TimeGrid(1.0, n_steps),
                         source=source, exact=exact, source_sampling=sampling)


def _pde1d_example(alpha: float, rho: complex = 1.0 + 1.0j, kappa: float = 0.5,
                   sampling: str = "shifted") -> Problem1D:
    """Backward Feynman-Kac benchmark: solution exp(-rho x t)(t^{3+a}+1) sin(pi x)."""
    c = gamma(4.0 + alpha) / gamma(4.0)

    def lam(x):
        return rho * x

    def bracket(x, t):
        s, cx = np.sin(np.pi * x), np.cos(np.pi * x)
        return rho ** 2 * t ** 2 * s - 2.0 * np.pi * rho * t * cx - np.pi ** 2 * s

    def source(x, t):
        # forcing exactly as published for this benchmark
        return (-kappa * np.exp(-rho * x * t) * (t ** (3.0 + alpha) + 1.0) * bracket(x, t)
                + c * np.exp(-rho * x * t) * t ** 3 * np.sin(np.pi * x))

    def u0(x):
        return np.sin(np.pi * x).astype(complex)

    def w_laplacian(x, t):
        # analytic Laplacian of the initial layer exp(-rho x t) sin(pi x)
        return np.exp(-rho * x * t) * bracket(x, t)

    def exact(x, t):
        return np.exp(-rho * x * t) * (t ** (3.0 + alpha) + 1.0) * np.sin(np.pi * x)

    def boundary(xe, t):
        return 0.0j

    return Problem1D(a=0.0, b=1.0, T=1.0, lam=lam, source=source, u0=u0,
                     boundary=boundary, exact=exact, kappa=kappa,
                     w_laplacian=w_laplacian, source_sampling=sampling)


def _pde2d_example(alpha: float, lam_scale: float = 0.01,
                   sampling: str = "averaged") -> Problem2D:
    """2D benchmark: solution exp(-lam(x,y) t)(1 + t^a + t^{2a} + t^3) sin sin."""
    c1 = gamma(1.0 + alpha)
    c2 = gamma(1.0 + 2.0 * alpha) / gamma(1.0 + alpha)
    c3 = gamma(4.0) / gamma(4.0 - alpha)

    def lam(x, y):
        return lam_scale * (x + y) + 0.0j

    def sines(x, y):
        return np.sin(np.pi * x) * np.sin(np.pi * y)

    def bracket(x, y, t):
        s = sines(x, y)
        cross = (np.cos(np.pi * x) * np.sin(np.pi * y)
                 + np.sin(np.pi * x) * np.cos(np.pi * y))
        return (2.0 * (lam_scale * t) ** 2 * s
                - 2.0 * lam_scale * t * np.pi * cross - 2.0 * np.pi ** 2 * s)

    def source(x, y, t):
        s = sines(x, y)
        dv = np.exp(-lam(x, y) * t) * s * (
            c1 + c2 * t ** alpha + c3 * t ** (3.0 - alpha))
        lap_u = ((1.0 + t ** alpha + t ** (2.0 * alpha) + t ** 3)
                 * np.exp(-lam(x, y) * t) * bracket(x, y, t))
        return dv - lap_u

    def u0(x, y):
        return sines(x, y).astype(complex)

    def w_laplacian(x, y, t):
        return np.exp(-lam(x, y) * t) * bracket(x, y, t)

    def exact(x, y, t):
        return (np.exp(-lam(x, y) * t)
                * (1.0 + t ** alpha + t ** (2.0 * alpha) + t ** 3) * sines(x, y))

    return Problem2D(ax=0.0, bx=1.0, ay=0.0, by=1.0, T=1.0, lam=lam, source=source,
                     u0=u0, boundary=None, exact=exact, kappa=1.0,
                     w_laplacian=w_laplacian, source_sampling=sampling)


def build_example(example_id: str, alpha: float, **params):
    """Problem object for one of the bundled benchmark ids."""
    if example_id in ("example-6.1", "scalar"):
        return _scalar_example(alpha, **params)
    if example_id in ("example-6.2", "pde1d"):
        return _pde1d_example(alpha, **params)
    if example_id in ("example-6.3", "pde2d"):
        return _pde2d_example(alpha, **params)
    raise ParameterError(f"unknown example id {example_id!r}")


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Experiment:
    """One refinement sweep over a parameter grid of a bundled problem."""

    problem: str
    sweep: str  # "time" | "space" | "coupled"
    alphas: tuple[float, ...]
    resolutions: tuple[int, ...]
    fixed: dict = field(default_factory=dict)
    reference: str | None = None

    def __post_init__(self):
        if self.sweep not in ("time", "space", "coupled"):
            raise ParameterError(f"unknown sweep {self.sweep!r}")
        if len(self.resolutions) < 2:
            raise ParameterError("a sweep needs at least two resolutions")


@dataclass
class ExperimentResult:
    experiment: Experiment
    columns: dict[str, ConvergenceReport]

    def column(self, label: str) -> ConvergenceReport:
        return self.columns[label]


def _run_scalar_column(alpha: float, nu: float, n_list, fixed) -> ConvergenceReport:
    errors, walls = [], []
    for n_steps in n_list:
        prob = _scalar_example(alpha, nu=nu, lam=fixed.get("lam", 0.5), n_steps=n_steps,
                               sampling=fixed.get("sampling", "shifted"))
        begin = time.perf_counter()
        sol = solve_scalar(prob, corrections=fixed.get("corrections", 0))
        walls.append(time.perf_counter() - begin)
        errors.append(sol.max_error)
    labels = [f"1/{n}" for n in n_list]
    return make_report(labels, [1.0 / n for n in n_list], errors,
                       alpha=alpha, nu=nu, wall_time=sum(walls))


def _run_1d_column(alpha: float, cells, fixed) -> ConvergenceReport:
    """cells: list of (N, M) pairs; the sweep axis provides the resolution."""
    variant = fixed.get("variant", "compact")
    errors, walls, labels, res = [], [], [], []
    for n_steps, m in cells:
        prob = _pde1d_example(alpha, sampling=fixed.get("sampling", "shifted"))
        cfg = SchemeConfig(alpha=alpha, M=m, N=n_steps, variant=variant,
                           corrections=fixed.get("corrections", 0))
        sol = solve_1d(prob, cfg)
        errors.append(sol.e1)
        walls.append(sol.wall_time)
        axis = fixed.get("axis", "time")
        if axis == "time":
            labels.append(f"1/{n_steps}")
            res.append(1.0 / n_steps)
        elif axis == "space":
            labels.append(f"1/{m}")
            res.append(1.0 / m)
        else:
            labels.append(f"N={n_steps},M={m}")
            res.append(1.0 / m)
    return make_report(labels, res, errors, alpha=alpha, variant=variant,
                       wall_time=sum(walls), wall_times=tuple(walls))


def _run_2d_column(alpha: float, s_count: int, n_list, fixed) -> ConvergenceReport:
    m = fixed.get("M", 60)
    errors, walls = [], []
    for n_steps in n_list:
        prob = _pde2d_example(alpha, sampling=fixed.get("sampling", "averaged"))
        cfg = Scheme2D(alpha=alpha, M1=m, M2=m, N=n_steps, corrections=s_count,
                       start=fixed.get("start", "auto"))
        sol = solve_2d(prob, cfg)
        errors.append(sol.e2)
        walls.append(sol.wall_time)
    labels = [f"N={n}" for n in n_list]
    return make_report(labels, [1.0 / n for n in n_list], errors,
                       alpha=alpha, corrections=s_count, wall_time=sum(walls))


def run_experiment(exp: Experiment) -> ExperimentResult:
    """Deterministic sweep; identical inputs give identical reports."""
    columns: dict[str, ConvergenceReport] = {}
    fixed = dict(exp.fixed)
    if exp.problem in ("example-6.1", "scalar"):
        for nu in fixed.get("nus", (2.5,)):
            for alpha in exp.alphas:
                columns[f"nu={nu},alpha={alpha}"] = _run_scalar_column(
                    alpha, nu, exp.resolutions, fixed)
    elif exp.problem in ("example-6.2", "pde1d"):
        for alpha in exp.alphas:
            if exp.sweep == "time":
                cells = [(n, fixed.get("M", 40)) for n in exp.resolutions]
                fixed["axis"] = "time"
            elif exp.sweep == "space":
                cells = [(fixed.get("N", 10000), m) for m in exp.resolutions]
                fixed["axis"] = "space"
            else:  # coupled: N = M^2
                cells = [(m * m, m) for m in exp.resolutions]
                fixed["axis"] = "coupled"
            label = f"alpha={alpha}"
            if fixed.get("variant", "compact") != "compact":
                label = f"{fixed['variant']},{label}"
            columns[label] = _run_1d_column(alpha, cells, fixed)
    elif exp.problem in ("example-6.3", "pde2d"):
        for s_count in fixed.get("corrections_list", (fixed.get("corrections", 0),)):
            for alpha in exp.alphas:
                label = f"S={s_count}"
                if len(exp.alphas) > 1:
                    label += f",alpha={alpha}"
                columns[label] = _run_2d_column(alpha, s_count, exp.resolutions, fixed)
    else:
        raise ParameterError(f"unknown experiment problem {exp.problem!r}")
    return ExperimentResult(experiment=exp, columns=columns)


# ---------------------------------------------------------------------------
# named table reproductions
# ---------------------------------------------------------------------------

def named_experiments() -> dict[str, Experiment]:
    return {
        "fode-regularity": Experiment(
            problem="example-6.1", sweep="time", alphas=(0.2, 0.5, 0.8),
            resolutions=(16, 32, 64, 128),
            fixed={"nus": (2.5, 2.0, 1.5, 1.0, 0.5)},
            reference="fode-regularity"),
        "time-1d": Experiment(
            problem="example-6.2", sweep="time", alphas=(0.2, 0.5, 0.8),
            resolutions=(5, 10, 20, 40), fixed={"M": 40}, reference="time-1d"),
        "space-1d": Experiment(
            problem="example-6.2", sweep="space", alphas=(0.2, 0.5, 0.8),
            resolutions=(4, 8, 16, 32, 64), fixed={"N": 10000},
            reference="space-1d"),
        "compare-1d": Experiment(
            problem="example-6.2", sweep="coupled", alphas=(0.1, 0.5, 0.9),
            resolutions=(4, 6, 8), fixed={}, reference="compare-1d"),
        "corrections-2d": Experiment(
            problem="example-6.3", sweep="time", alphas=(0.2,),
            resolutions=(4, 8, 16, 32),
            fixed={"M": 60, "corrections_list": (0, 1, 2, 3)},
            reference="corrections-2d"),
        "coupled-1d": Experiment(
            problem="example-6.2", sweep="coupled", alphas=(0.5,),
            resolutions=(4, 6, 8, 12, 16, 24), fixed={}, reference=None),
    }


def run_named(table_id: str) -> ExperimentResult:
    experiments = named_experiments()
    if table_id not in experiments:
        raise ParameterError(f"unknown table id {table_id!r}; "
                             f"known: {', '.join(sorted(experiments))}")
    exp = experiments[table_id]
    if table_id == "compare-1d":
        return _run_compare_table(exp)
    if table_id == "coupled-1d":
        return _run_coupled_figure(exp)
    return run_experiment(exp)


def _run_compare_table(exp: Experiment) -> ExperimentResult:
    compact_cells = [(16, 4), (36, 6), (64, 8)]
    baseline_cells = [(256, 16), (1296, 36), (4096, 64)]
    columns: dict[str, ConvergenceReport] = {}
    for alpha in exp.alphas:
        fixed = {"variant": "compact", "axis": "coupled"}
        columns[f"compact,alpha={alpha}"] = _run_1d_column(alpha, compact_cells, fixed)
        fixed = {"variant": "baseline", "axis": "coupled"}
        columns[f"baseline,alpha={alpha}"] = _run_1d_column(alpha, baseline_cells, fixed)
    return ExperimentResult(experiment=exp, columns=columns)


def _run_coupled_figure(exp: Experiment) -> ExperimentResult:
    columns: dict[str, ConvergenceReport] = {}
    for alpha in exp.alphas:
        cells = [(m * m, m) for m in exp.resolutions]
        columns[f"compact,alpha={alpha}"] = _run_1d_column(
            alpha, cells, {"variant": "compact", "axis": "coupled"})
        columns[f"baseline,alpha={alpha}"] = _run_1d_column(
            alpha, cells, {"variant": "baseline", "axis": "coupled"})
    return ExperimentResult(experiment=exp, columns=columns)


# ---------------------------------------------------------------------------
# reference comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CellDiff:
    column: str
    row: str
    kind: str  # "error" | "rate"
    ours: float
    reference: float
    deviation: float
    tolerance: float
    passed: bool


@dataclass
class DiffSummary:
    table_id: str
    cells: list[CellDiff]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.cells)

    @property
    def failures(self) -> list[CellDiff]:
        return [c for c in self.cells if not c.passed]

    def render(self) -> str:
        lines = [f"reference comparison: {self.table_id}"]
        for c in self.cells:
            status = "PASS" if c.passed else "FAIL"
            lines.append(
                f"  [{status}] {c.column} {c.row} {c.kind}: ours={c.ours:.4e} "
                f"ref={c.reference:.4e} dev={c.deviation:.3g} tol={c.tolerance:.3g}")
        verdict = "ALL PASS" if self.ok else f"{len(self.failures)} FAILED"
        lines.append(f"  => {verdict}")
        return "\n".join(lines)


def compare_reference(result: ExperimentResult,
                      reference: ReferenceTable | str) -> DiffSummary:
    """Per-cell diff of a run against the stored reference values."""
    if isinstance(reference, str):
        reference = REFERENCE_TABLES[reference]
    cells: list[CellDiff] = []
    for col_ref in reference.columns:
        if col_ref.label not in result.columns:
            raise ParameterError(
                f"run is missing column {col_ref.label!r} required by "
                f"{reference.table_id}")
        report = result.columns[col_ref.label]
        if len(report.rows) != len(col_ref.row_labels):
            raise ParameterError(
                f"shape mismatch in {col_ref.label}: run has {len(report.rows)} "
                f"rows, reference {len(col_ref.row_labels)}")
        for i, (label, _res, err, rate) in enumerate(report.rows):
            ref_err = col_ref.errors[i]
            if col_ref.check_errors and ref_err is not None:
                dev = abs(err - ref_err) / abs(ref_err)
                cells.append(CellDiff(col_ref.label, label, "error", err, ref_err,
                                      dev, col_ref.error_rtol,
                                      dev <= col_ref.error_rtol))
            ref_rate = col_ref.rates[i]
            if ref_rate is not None and rate is not None:
                tol = col_ref.rate_tolerance(i)
                dev = abs(rate - ref_rate)
                cells.append(CellDiff(col_ref.label, label, "rate", rate, ref_rate,
                                      dev, tol, dev <= tol))
    return DiffSummary(table_id=reference.table_id, cells=cells)
