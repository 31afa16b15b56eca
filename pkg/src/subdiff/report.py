"""Convergence reports: the data type, delimited/text output and figures.

A ConvergenceReport is one column of a published-style table: a list of
(resolution, error) rows with observed orders between consecutive rows.
CSV output is written with full precision and is byte-stable across runs;
wall time appears only in the human-readable rendering.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np


@dataclass
class ConvergenceReport:
    """Rows (label, resolution, error, rate) plus free-form metadata."""

    rows: list[tuple[str, float, float, float | None]]
    metadata: dict = field(default_factory=dict)

    @property
    def errors(self) -> list[float]:
        return [r[2] for r in self.rows]

    @property
    def rates(self) -> list[float | None]:
        return [r[3] for r in self.rows]


def observed_rates(errors) -> list[float | None]:
    """log2(E_{i-1}/E_i) between consecutive rows; first entry is None."""
    out: list[float | None] = [None]
    for prev, cur in zip(errors, errors[1:]):
        if prev > 0 and cur > 0:
            out.append(float(np.log2(prev / cur)))
        else:
            out.append(None)
    return out


def make_report(labels, resolutions, errors, **metadata) -> ConvergenceReport:
    rates = observed_rates(list(errors))
    rows = [(str(lab), float(res), float(err), rate)
            for lab, res, err, rate in zip(labels, resolutions, errors, rates)]
    return ConvergenceReport(rows=rows, metadata=dict(metadata))


def _fmt_full(x: float) -> str:
    return format(float(x), ".17g")


def write_report_csv(report: ConvergenceReport, path: str) -> None:
    """Full-precision CSV; metadata rides along as '#key=value' comments."""
    lines = []
    for key in sorted(report.metadata):
        if key.startswith("wall"):
            continue  # volatile timings stay out of the byte-stable CSV
        lines.append(f"# {key}={report.metadata[key]}")
    lines.append("label,resolution,error,rate")
    for label, res, err, rate in report.rows:
        rate_s = "" if rate is None else _fmt_full(rate)
        lines.append(f"{label},{_fmt_full(res)},{_fmt_full(err)},{rate_s}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_report_csv(path: str) -> ConvergenceReport:
    metadata = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                metadata[key.strip()] = value
                continue
            if line.startswith("label,"):
                continue
            # labels may carry commas ("N=16,M=4"); numeric fields are last
            label, res, err, rate = line.rsplit(",", 3)
            rows.append((label, float(res), float(err),
                         None if rate == "" else float(rate)))
    return ConvergenceReport(rows=rows, metadata=metadata)


def _fmt5(x: float) -> str:
    return format(float(x), ".5g" if abs(x) >= 1e-3 else ".4e")


def format_report_table(report: ConvergenceReport, title: str = "") -> str:
    """Aligned text with 5 significant digits, matching table conventions."""
    header = f"{'resolution':>12s}  {'error':>12s}  {'rate':>6s}"
    lines = []
    if title:
        lines.append(title)
    meta = ", ".join(f"{k}={v}" for k, v in sorted(report.metadata.items())
                     if not k.startswith("wall"))
    if meta:
        lines.append(f"[{meta}]")
    lines.append(header)
    for label, _res, err, rate in report.rows:
        rate_s = "  --  " if rate is None else f"{rate:6.2f}"
        lines.append(f"{label:>12s}  {err:>12.4e}  {rate_s}")
    return "\n".join(lines)


def render_convergence_figure(reports: dict[str, ConvergenceReport], path: str,
                              xlabel: str = "resolution",
                              reference_slopes: tuple[float, ...] = ()) -> str:
    """Log-log error plot of one or more report columns, written to `path`."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    base = None
    for name, report in reports.items():
        res = np.array([r[1] for r in report.rows], dtype=float)
        err = np.array([r[2] for r in report.rows], dtype=float)
        ax.loglog(res, err, "o-", label=name)
        if base is None:
            base = (res, err)
    if base is not None:
        res, err = base
        for slope in reference_slopes:
            guide = err[0] * (res / res[0]) ** slope
            ax.loglog(res, guide, "k--", linewidth=0.8,
                      label=f"slope {slope:g}")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("max error")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def default_output_dir() -> str:
    """Honors SUBDIFF_OUT; falls back to the working directory."""
    return os.environ.get("SUBDIFF_OUT", ".")
