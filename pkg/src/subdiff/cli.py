"""Command-line front end: weight dumps, single solves, convergence tables.

Reports land in --out-dir (default: $SUBDIFF_OUT or the working directory)
as full-precision CSV plus rendered figures; tables print with five
significant digits. Exit status: 0 on success, 1 when a reference
comparison fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .coeffs import FracParams, substantial_weights
from .errors import SubdiffError
from .expressions import compile_expression
from .fode import ScalarProblem, solve_scalar
from .harness import (build_example, compare_reference, named_experiments,
                      run_named)
from .operators import TimeGrid
from .pde1d import Problem1D, SchemeConfig, solve_1d
from .pde2d import Problem2D, Scheme2D, solve_2d
from .report import (default_output_dir, format_report_table,
                     render_convergence_figure, write_report_csv)
from .reference_tables import REFERENCE_TABLES


def _complex_arg(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"cannot parse complex number {text!r}") from exc


def _out_path(args, name: str) -> str:
    out_dir = args.out_dir or default_output_dir()
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, name)


# ---------------------------------------------------------------------------
# config-file problems
# ---------------------------------------------------------------------------

def load_config_problem(path: str):
    """Build a problem from a JSON config of expression strings.

    Keys (pde1d): kind, domain [a, b], T, alpha?, kappa, lambda, source,
    u0, boundary {left, right}, exact, sampling. For pde2d the domain is
    [[ax, bx], [ay, by]] and expressions use x, y, t. For fode: lambda is
    a number and source/exact use t alone.
    """
    with open(path) as fh:
        cfg = json.load(fh)
    kind = cfg.get("kind")
    sampling = cfg.get("sampling", "shifted" if kind != "pde2d" else "averaged")
    if kind == "fode":
        lam = complex(cfg.get("lambda", 0))
        src = compile_expression(cfg["source"], ("t",))
        exact = compile_expression(cfg["exact"], ("t",)) if "exact" in cfg else None
        grid = TimeGrid(float(cfg.get("T", 1.0)), int(cfg.get("N", 16)))
        return ScalarProblem(alpha=float(cfg["alpha"]), lam=lam, grid=grid,
                             source=src, exact=exact, source_sampling=sampling)
    if kind == "pde1d":
        a, b = cfg.get("domain", (0.0, 1.0))
        lam = compile_expression(cfg["lambda"], ("x",))
        src = compile_expression(cfg["source"], ("x", "t"))
        u0 = compile_expression(cfg["u0"], ("x",)) if "u0" in cfg else None
        exact = (compile_expression(cfg["exact"], ("x", "t"))
                 if "exact" in cfg else None)
        boundary = None
        if "boundary" in cfg:
            left = compile_expression(cfg["boundary"]["left"], ("t",))
            right = compile_expression(cfg["boundary"]["right"], ("t",))

            def boundary(xe, t, _l=left, _r=right, _a=a):
                return _l(t) if xe == _a else _r(t)
        return Problem1D(a=float(a), b=float(b), T=float(cfg.get("T", 1.0)),
                         lam=lam, source=src, u0=u0, boundary=boundary,
                         exact=exact, kappa=complex(cfg.get("kappa", 1.0)),
                         source_sampling=sampling)
    if kind == "pde2d":
        (ax, bx), (ay, by) = cfg.get("domain", ((0.0, 1.0), (0.0, 1.0)))
        lam = compile_expression(cfg["lambda"], ("x", "y"))
        src = compile_expression(cfg["source"], ("x", "y", "t"))
        u0 = compile_expression(cfg["u0"], ("x", "y")) if "u0" in cfg else None
        exact = (compile_expression(cfg["exact"], ("x", "y", "t"))
                 if "exact" in cfg else None)
        return Problem2D(ax=float(ax), bx=float(bx), ay=float(ay), by=float(by),
                         T=float(cfg.get("T", 1.0)), lam=lam, source=src, u0=u0,
                         exact=exact, kappa=complex(cfg.get("kappa", 1.0)),
                         source_sampling=sampling)
    raise SubdiffError(f"config kind must be fode|pde1d|pde2d, got {kind!r}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_coeffs(args) -> int:
    params = FracParams(alpha=args.alpha, lam=args.lam, tau=args.tau)
    table = substantial_weights(params, args.n)
    lines = ["k,g,re_g_lambda,im_g_lambda,l"]
    for k in range(args.n + 1):
        lines.append(f"{k},{table.g[k]:.17g},{table.g_lambda[k].real:.17g},"
                     f"{table.g_lambda[k].imag:.17g},{table.l[k]:.17g}")
    text = "\n".join(lines) + "\n"
    if args.out:
        path = _out_path(args, args.out)
        with open(path, "w") as fh:
            fh.write(text)
        print(f"wrote {path}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_fode(args) -> int:
    if args.config:
        prob = load_config_problem(args.config)
        if not isinstance(prob, ScalarProblem):
            raise SubdiffError("config kind does not match the fode subcommand")
        prob = ScalarProblem(alpha=prob.alpha, lam=prob.lam,
                             grid=TimeGrid(prob.grid.T, args.n_steps or prob.grid.N),
                             source=prob.source, exact=prob.exact,
                             source_sampling=prob.source_sampling)
    else:
        prob = build_example("example-6.1", args.alpha, nu=args.nu,
                             lam=args.lam, n_steps=args.n_steps or 16)
    sol = solve_scalar(prob, corrections=args.corrections)
    t = prob.grid.nodes()
    lines = ["n,t,re_u,im_u,abs_error"]
    for n in range(prob.grid.N + 1):
        err = (abs(sol.values[n] - prob.exact(t[n]))
               if prob.exact is not None else float("nan"))
        lines.append(f"{n},{t[n]:.17g},{sol.values[n].real:.17g},"
                     f"{sol.values[n].imag:.17g},{err:.17g}")
    path = _out_path(args, args.out or "fode_solution.csv")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {path}")
    if sol.max_error is not None:
        print(f"max error over steps: {sol.max_error:.5g}")
    return 0


def _cmd_solve1d(args) -> int:
    if args.config:
        prob = load_config_problem(args.config)
        if not isinstance(prob, Problem1D):
            raise SubdiffError("config kind does not match the solve1d subcommand")
    else:
        prob = build_example("example-6.2", args.alpha)
    cfg = SchemeConfig(alpha=args.alpha, M=args.m, N=args.n,
                       corrections=args.corrections, variant=args.variant)
    sol = solve_1d(prob, cfg)
    x = sol.mesh.nodes()
    final = sol.history[-1]
    lines = ["x,re_u,im_u" + (",abs_error" if prob.exact is not None else "")]
    exact = (np.asarray(prob.exact(x, prob.T), dtype=complex)
             if prob.exact is not None else None)
    for i in range(len(x)):
        row = f"{x[i]:.17g},{final[i].real:.17g},{final[i].imag:.17g}"
        if exact is not None:
            row += f",{abs(final[i] - exact[i]):.17g}"
        lines.append(row)
    path = _out_path(args, args.out or "solve1d_final.csv")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {path}")
    if args.history_csv:
        hpath = _out_path(args, args.history_csv)
        t = sol.grid.nodes()
        header = "n,t," + ",".join(
            f"re_u{i},im_u{i}" for i in range(len(x)))
        rows = [header]
        for n in range(sol.grid.N + 1):
            vals = ",".join(f"{sol.history[n, i].real:.17g},{sol.history[n, i].imag:.17g}"
                            for i in range(len(x)))
            rows.append(f"{n},{t[n]:.17g},{vals}")
        with open(hpath, "w") as fh:
            fh.write("\n".join(rows) + "\n")
        print(f"wrote {hpath}")
    if sol.e1 is not None:
        print(f"E1 (final-time max error): {sol.e1:.5g}")
    print(f"wall time: {sol.wall_time:.3f}s")
    return 0


def _cmd_solve2d(args) -> int:
    if args.config:
        prob = load_config_problem(args.config)
        if not isinstance(prob, Problem2D):
            raise SubdiffError("config kind does not match the solve2d subcommand")
    else:
        prob = build_example("example-6.3", args.alpha)
    cfg = Scheme2D(alpha=args.alpha, M1=args.m, M2=args.m, N=args.n,
                   corrections=args.corrections)
    sol = solve_2d(prob, cfg)
    snapshots = [int(s) for s in args.snapshots.split(",")] if args.snapshots else [cfg.N]
    x, y = sol.mesh.nodes()
    for n in snapshots:
        if not 0 <= n <= cfg.N:
            raise SubdiffError(f"snapshot level {n} outside 0..{cfg.N}")
        lines = ["x,y,re_u,im_u"]
        for i in range(len(x)):
            for j in range(len(y)):
                val = sol.history[n, i, j]
                lines.append(f"{x[i]:.17g},{y[j]:.17g},{val.real:.17g},{val.imag:.17g}")
        path = _out_path(args, f"solve2d_level{n:04d}.csv")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"wrote {path}")
    if sol.e2 is not None:
        print(f"E2 (max over levels of max error): {sol.e2:.5g}")
    print(f"wall time: {sol.wall_time:.3f}s")
    return 0


def load_experiment_config(path: str):
    """Experiment definition from JSON: a sweep over one of the bundled
    problems (problem/sweep/alphas/resolutions/fixed keys)."""
    from .harness import Experiment

    with open(path) as fh:
        cfg = json.load(fh)
    return Experiment(problem=cfg["problem"], sweep=cfg.get("sweep", "time"),
                      alphas=tuple(cfg["alphas"]),
                      resolutions=tuple(cfg["resolutions"]),
                      fixed=dict(cfg.get("fixed", {})),
                      reference=cfg.get("reference"))


def _emit_experiment(args, name: str, result) -> None:
    text_blocks = []
    for label, report in result.columns.items():
        block = format_report_table(report, title=f"{name} :: {label}")
        print(block)
        print()
        text_blocks.append(block)
        safe = label.replace(",", "_").replace("=", "")
        path = _out_path(args, f"{name}_{safe}.csv")
        write_report_csv(report, path)
        print(f"wrote {path}")
    txt_path = _out_path(args, f"{name}.txt")
    with open(txt_path, "w") as fh:
        fh.write("\n\n".join(text_blocks) + "\n")
    print(f"wrote {txt_path}")
    if args.figures:
        fig_path = _out_path(args, f"{name}.png")
        slopes = {"time-1d": (2.0,), "space-1d": (4.0,), "fode-regularity": (2.0,),
                  "corrections-2d": (2.0,), "coupled-1d": (2.0, 1.0),
                  "compare-1d": ()}.get(name, (2.0,))
        xlabel = {"space-1d": "h", "coupled-1d": "h (N = M^2)",
                  "compare-1d": "h"}.get(name, "tau")
        render_convergence_figure(result.columns, fig_path,
                                  xlabel=xlabel, reference_slopes=slopes)
        print(f"wrote {fig_path}")


def _cmd_convergence(args) -> int:
    if args.list_tables:
        for name, exp in sorted(named_experiments().items()):
            ref = f" [reference: {exp.reference}]" if exp.reference else ""
            print(f"{name}: {exp.problem}, {exp.sweep} sweep{ref}")
        return 0
    if args.config:
        from .harness import run_experiment

        exp = load_experiment_config(args.config)
        result = run_experiment(exp)
        name = os.path.splitext(os.path.basename(args.config))[0]
        _emit_experiment(args, name, result)
        if exp.reference is not None:
            diff = compare_reference(result, REFERENCE_TABLES[exp.reference])
            print()
            print(diff.render())
            if not diff.ok:
                return 1
        return 0
    if not args.table:
        print("error: --table or --config is required (or use --list-tables)",
              file=sys.stderr)
        return 2
    result = run_named(args.table)
    _emit_experiment(args, args.table, result)
    exp = named_experiments()[args.table]
    if exp.reference is not None:
        diff = compare_reference(result, REFERENCE_TABLES[exp.reference])
        print()
        print(diff.render())
        if not diff.ok:
            return 1
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subdiff",
        description="Second-order solvers and convergence studies for "
                    "time-fractional substantial diffusion equations")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="dump a weight table as CSV")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--lam", "--lambda", type=_complex_arg, default=0j, dest="lam")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--n", type=int, required=True, help="largest index k")
    p.add_argument("--out", help="CSV filename (stdout when omitted)")
    p.add_argument("--out-dir", help="output directory (default $SUBDIFF_OUT or .)")
    p.set_defaults(func=_cmd_coeffs)

    p = sub.add_parser("fode", help="solve the scalar benchmark equation")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--nu", type=float, default=2.5)
    p.add_argument("--lam", "--lambda", type=_complex_arg, default=0.5 + 0j, dest="lam")
    p.add_argument("--n-steps", type=int, default=None)
    p.add_argument("--corrections", type=int, default=0)
    p.add_argument("--config", help="JSON problem definition")
    p.add_argument("--out", help="solution CSV filename")
    p.add_argument("--out-dir")
    p.set_defaults(func=_cmd_fode)

    p = sub.add_parser("solve1d", help="run the 1D scheme once")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--m", type=int, default=40, help="space intervals")
    p.add_argument("--n", type=int, default=40, help="time steps")
    p.add_argument("--variant", choices=("compact", "baseline"), default="compact")
    p.add_argument("--corrections", type=int, default=0)
    p.add_argument("--config", help="JSON problem definition")
    p.add_argument("--history-csv", help="stream every time level to this CSV")
    p.add_argument("--out", help="final-profile CSV filename")
    p.add_argument("--out-dir")
    p.set_defaults(func=_cmd_solve1d)

    p = sub.add_parser("solve2d", help="run the 2D scheme once")
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--m", type=int, default=60, help="space intervals per direction")
    p.add_argument("--n", type=int, default=16, help="time steps")
    p.add_argument("--corrections", type=int, default=0)
    p.add_argument("--config", help="JSON problem definition")
    p.add_argument("--snapshots", help="comma-separated levels to dump as CSV grids")
    p.add_argument("--out-dir")
    p.set_defaults(func=_cmd_solve2d)

    p = sub.add_parser("convergence", help="reproduce a named study end to end")
    p.add_argument("--table", help="table id (see --list-tables)")
    p.add_argument("--config", help="JSON experiment definition")
    p.add_argument("--list-tables", action="store_true")
    p.add_argument("--figures", dest="figures", action="store_true", default=True)
    p.add_argument("--no-figures", dest="figures", action="store_false")
    p.add_argument("--out-dir")
    p.set_defaults(func=_cmd_convergence)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SubdiffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
