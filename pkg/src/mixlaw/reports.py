"""Report tables (CSV) and plot-data files (JSON) derived from bundles.

Plot-data documents are arrays of ``[x, y, series_label]`` triples, enough
to regenerate the standard figure shapes externally: per-weighting scaling
curves, coefficient-versus-weight summaries, fraction curves, trade-off
frontiers, and quality/loss correlation scatter.  All output is written
through the canonical serializer, so identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
from typing import Sequence

import numpy as np

from .analysis import CapacityReport, CorrelationResult, FrontierCurve
from .dataio import LawBundle, _format_float, canonical_bytes
from .lawcore import eval_fraction_curve, eval_joint_loss

PlotRow = list  # [x: float, y: float, label: str]


def write_plot_json(rows: Sequence[PlotRow], path) -> None:
    with open(path, "wb") as fh:
        fh.write(canonical_bytes([list(r) for r in rows]) + b"\n")


def scaling_curve_rows(bundle: LawBundle, n_grid: Sequence[float] | None = None) -> list[PlotRow]:
    """Loss-versus-size series, one per (task, weighting)."""
    rows: list[PlotRow] = []
    for name, laws in bundle.tasks.items():
        if n_grid is None:
            observed = [n for n, _, _ in laws.observations]
            lo = min(observed) if observed else 1e7
            hi = max(observed) if observed else 1e9
            grid = np.geomspace(lo, hi, 25)
        else:
            grid = np.asarray(n_grid, dtype=float)
        for p in laws.joint_law.weightings:
            label = f"{name} p={p:g}"
            for n in grid:
                rows.append([float(n), eval_joint_loss(laws.joint_law, p, float(n)), label])
    return rows


def fraction_rows(bundle: LawBundle, curve_points: int = 101) -> list[PlotRow]:
    """Observed effective fractions plus fitted fraction curves per task."""
    rows: list[PlotRow] = []
    grid = np.linspace(0.01, 1.0, curve_points)
    for name, laws in bundle.tasks.items():
        for p, f in sorted(laws.effective_fractions.items()):
            rows.append([p, f, f"{name} observed"])
        for form, fit in sorted(laws.fraction_fits.items()):
            label = f"{name} {form}"
            for p in grid:
                rows.append([float(p), eval_fraction_curve(fit, float(p)), label])
    return rows


def frontier_rows(curve: FrontierCurve) -> list[PlotRow]:
    """Trade-off scatter: x is the first task's prediction, y the second's."""
    first, second = curve.task_pair
    label = f"frontier n={curve.n:g}"
    return [
        [curve.values[first][i], curve.values[second][i], label]
        for i in range(len(curve.weights))
    ]


def correlation_rows(result: CorrelationResult, line_points: int = 2) -> list[PlotRow]:
    """Quality-versus-loss scatter plus the fitted line endpoints."""
    rows: list[PlotRow] = [[x, y, "observed"] for x, y in result.pairs]
    if result.pairs and not result.degenerate:
        xs = [p[0] for p in result.pairs]
        for x in np.linspace(min(xs), max(xs), line_points):
            rows.append([float(x), result.slope * float(x) + result.intercept, "fit"])
    return rows


def write_frontier_csv(curve: FrontierCurve, path) -> None:
    first, second = curve.task_pair
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["p", first, second])
        for i, p in enumerate(curve.weights):
            writer.writerow(
                [
                    _format_float(p),
                    _format_float(curve.values[first][i]),
                    _format_float(curve.values[second][i]),
                ]
            )


def write_capacity_csv(report: CapacityReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["task", "p", "fraction", "n_eff", "relative_gain"])
        for row in report.rows:
            writer.writerow(
                [
                    row.task,
                    _format_float(row.p),
                    _format_float(row.fraction),
                    _format_float(row.n_eff),
                    _format_float(row.relative_gain),
                ]
            )


def write_coefficients_csv(bundle: LawBundle, path) -> None:
    """Per-(task, weighting) law coefficients, with bootstrap spreads when
    available; the shape behind coefficient-versus-weight plots."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["task", "p", "beta", "beta_std", "alpha", "alpha_std", "l_inf", "l_inf_std", "fraction"])
        for name, laws in bundle.tasks.items():
            std = laws.uncertainty.std_devs if laws.uncertainty else {}
            for p in laws.joint_law.weightings:
                beta_std = std.get(f"beta@{p:g}")
                fraction = laws.effective_fractions.get(p)
                writer.writerow(
                    [
                        name,
                        _format_float(p),
                        _format_float(laws.joint_law.betas[p]),
                        _format_float(beta_std) if beta_std is not None else "",
                        _format_float(laws.joint_law.alpha),
                        _format_float(std["alpha"]) if "alpha" in std else "",
                        _format_float(laws.joint_law.l_inf),
                        _format_float(std["l_inf"]) if "l_inf" in std else "",
                        _format_float(fraction) if fraction is not None else "",
                    ]
                )
