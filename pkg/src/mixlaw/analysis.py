"""End-to-end pipelines: joint analysis, frontier prediction, capacity
reports, metric-loss correlation, and multi-task extrapolation.

``analyze`` composes the whole estimation chain per task (joint fit,
single-task law, effective fractions, fraction curves, bootstrap) into a
:class:`~mixlaw.dataio.LawBundle`.  Everything downstream reads bundles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataio import (
    CorrectionPolicy,
    LawBundle,
    Provenance,
    RunRecord,
    TaskLaws,
    build_fit_dataset,
    dataset_hash,
)
from .errors import (
    DomainError,
    InsufficientDataError,
    MissingTaskError,
    MixlawError,
)
from .fitting import (
    FitConfig,
    bootstrap_uncertainty,
    fit_fraction_curve,
    fit_joint_law,
)
from .lawcore import (
    FractionFit,
    MetricDirection,
    SizeLike,
    TaskLike,
    WeightVector,
    _size,
    effective_fraction,
    predict_loss_any_weighting,
    task_name,
)

#: Default trade-off grid: 37 task-1 weights over [0.05, 0.95]; the
#: endpoints 0 and 1 are excluded (zero-shot is out of scope).
FRONTIER_GRID = tuple(np.linspace(0.05, 0.95, 37))


@dataclass(frozen=True)
class FrontierCurve:
    """Predicted per-task performance along a two-task weighting grid at a
    fixed model size.  ``weights`` is the first task's own weight; the
    second task's weight is its complement."""

    n: float
    task_pair: tuple[str, str]
    weights: tuple[float, ...]
    values: dict[str, tuple[float, ...]]
    form: str
    direction: MetricDirection

    def point(self, index: int) -> tuple[float, float, float]:
        first, second = self.task_pair
        return (self.weights[index], self.values[first][index], self.values[second][index])


@dataclass(frozen=True)
class CapacityRow:
    task: str
    p: float
    fraction: float
    n_eff: float
    relative_gain: float


@dataclass(frozen=True)
class CapacityReport:
    """Effective capacity per observed (task, weighting) at a reference size."""

    reference_n: float
    rows: tuple[CapacityRow, ...]


@dataclass(frozen=True)
class CorrelationResult:
    """Least-squares line of quality versus loss plus Pearson correlation.

    ``degenerate`` marks zero-variance inputs, where r is undefined (NaN).
    """

    pearson_r: float
    slope: float
    intercept: float
    residuals: tuple[float, ...]
    n_pairs: int
    degenerate: bool
    pairs: tuple[tuple[float, float], ...] = ()


@dataclass(frozen=True)
class MultitaskPrediction:
    """Per-task predictions for a K-task mixture built from pairwise laws.

    Carries its own modeling assumption so consumers can surface it: each
    task's effective fraction is taken to depend on that task's own weight
    only.
    """

    n: float
    weights: dict[str, float]
    predictions: dict[str, float]
    form: str
    assumption: str = "effective fraction depends on the task's own weight only"


def _annotate(task: str, exc: MixlawError) -> MixlawError:
    return type(exc)(f"task {task!r}: {exc}")


def analyze(
    records: Sequence[RunRecord],
    tasks: Sequence[TaskLike],
    testset: str,
    metric: str,
    config: FitConfig = FitConfig(),
    direction: MetricDirection = "loss_like",
    bootstrap_replicates: int = 16,
    sigma_fraction: float = 0.01,
    correction_policy: CorrectionPolicy | None = None,
) -> LawBundle:
    """Fit the full joint-law pipeline for every task and assemble a bundle.

    Per task: joint fit over all observed weightings, the p = 1 law,
    effective fractions at every observed weighting, fraction-curve fits
    (flexible when at least 4 weightings are observed, linear always), and
    a seeded bootstrap of the joint fit.  Deterministic given inputs,
    config, and seed.
    """
    if not tasks:
        raise InsufficientDataError("analyze needs at least one task")
    task_laws: dict[str, TaskLaws] = {}
    for task in tasks:
        name = task_name(task)
        try:
            points = build_fit_dataset(records, name, testset, metric, correction_policy)
            joint, diagnostics = fit_joint_law(points, direction, config, task=task)
            single = joint.single_task_params()
            fractions = {p: effective_fraction(joint, p) for p in joint.weightings}
            samples = sorted(fractions.items())
            fits: dict[str, FractionFit] = {}
            if len(samples) >= 4:
                fits["flexible"], _ = fit_fraction_curve(samples, "flexible", config, task=task)
            fits["linear"], _ = fit_fraction_curve(samples, "linear", config, task=task)
            uncertainty = None
            if bootstrap_replicates >= 2:
                uncertainty = bootstrap_uncertainty(
                    points,
                    lambda pts: fit_joint_law(pts, direction, config, task=task),
                    sigma_fraction=sigma_fraction,
                    replicates=bootstrap_replicates,
                    seed=config.seed,
                )
        except MixlawError as exc:
            raise _annotate(name, exc) from exc
        task_laws[name] = TaskLaws(
            joint_law=joint,
            single_task=single,
            fraction_fits=fits,
            effective_fractions=dict(samples),
            diagnostics=diagnostics,
            uncertainty=uncertainty,
            observations=tuple((n, p, y) for n, p, y in points),
        )
    provenance = Provenance(dataset_sha256=dataset_hash(records), config=config)
    return LawBundle(
        metric=metric,
        direction=direction,
        testset=testset,
        tasks=task_laws,
        provenance=provenance,
    )


def _fraction_fit(bundle: LawBundle, task: str, form: str) -> FractionFit:
    laws = bundle.task_laws(task)
    if form not in laws.fraction_fits:
        raise MissingTaskError(
            f"task {task!r} has no {form!r} fraction fit; available: {sorted(laws.fraction_fits)}"
        )
    return laws.fraction_fits[form]


def predict_frontier(
    bundle: LawBundle,
    n: SizeLike,
    grid: Sequence[float] | None = None,
    form: str = "flexible",
    tasks: tuple[TaskLike, TaskLike] | None = None,
) -> FrontierCurve:
    """Predict the two-task trade-off frontier at model size ``n``.

    Grid entries are the first task's own weight; each must lie strictly
    inside (0, 1) and increase strictly.
    """
    if tasks is None:
        names = tuple(bundle.tasks)
        if len(names) != 2:
            raise DomainError(
                f"bundle has {len(names)} tasks; pass an explicit task pair for the frontier"
            )
    else:
        names = (task_name(tasks[0]), task_name(tasks[1]))
    weights = tuple(float(p) for p in (FRONTIER_GRID if grid is None else grid))
    if not weights:
        raise DomainError("frontier grid is empty")
    for p in weights:
        if not 0.0 < p < 1.0:
            raise DomainError(f"frontier grid must lie strictly inside (0, 1), got {p}")
    if any(b <= a for a, b in zip(weights, weights[1:])):
        raise DomainError("frontier grid must be strictly increasing")

    size = _size(n)
    values: dict[str, tuple[float, ...]] = {}
    for own_weights, name in (
        (weights, names[0]),
        (tuple(1.0 - p for p in weights), names[1]),
    ):
        single = bundle.task_laws(name).single_task
        fit = _fraction_fit(bundle, name, form)
        values[name] = tuple(
            predict_loss_any_weighting(single, fit, p, size, bundle.direction)
            for p in own_weights
        )
    return FrontierCurve(
        n=size,
        task_pair=names,
        weights=weights,
        values=values,
        form=form,
        direction=bundle.direction,
    )


def capacity_report(bundle: LawBundle, reference_n: SizeLike) -> CapacityReport:
    """Tabulate f, N_eff, and the relative gain f/p at every observed
    (task, weighting)."""
    size = _size(reference_n)
    rows = []
    for name in bundle.tasks:
        laws = bundle.task_laws(name)
        for p, fraction in sorted(laws.effective_fractions.items()):
            rows.append(
                CapacityRow(
                    task=name,
                    p=p,
                    fraction=fraction,
                    n_eff=fraction * size,
                    relative_gain=fraction / p,
                )
            )
    return CapacityReport(reference_n=size, rows=tuple(rows))


def metric_loss_correlation(
    records: Sequence[RunRecord],
    task: TaskLike,
    loss_metric: str,
    quality_metric: str,
    testset: str,
) -> CorrelationResult:
    """Pair each run's final loss and quality evals and fit quality as a
    linear function of loss."""
    name = task_name(task)
    pairs = []
    for record in records:
        chosen: dict[str, float] = {}
        for metric in (loss_metric, quality_metric):
            candidates = [
                ev
                for ev in record.evals
                if ev.task == name and ev.testset == testset and ev.metric == metric
            ]
            if candidates:
                chosen[metric] = max(candidates, key=lambda ev: ev.at_step).value
        if loss_metric in chosen and quality_metric in chosen:
            pairs.append((chosen[loss_metric], chosen[quality_metric]))
    if len(pairs) < 3:
        raise InsufficientDataError(
            f"need >= 3 paired observations for task {name!r}, got {len(pairs)}"
        )
    x = np.array([p[0] for p in pairs])
    y = np.array([p[1] for p in pairs])
    var_x = float(np.var(x))
    var_y = float(np.var(y))
    if var_x == 0.0:
        return CorrelationResult(
            pearson_r=math.nan,
            slope=math.nan,
            intercept=float(y.mean()),
            residuals=tuple(float(v) for v in (y - y.mean())),
            n_pairs=len(pairs),
            degenerate=True,
            pairs=tuple(pairs),
        )
    slope = float(np.sum((x - x.mean()) * (y - y.mean())) / np.sum((x - x.mean()) ** 2))
    intercept = float(y.mean() - slope * x.mean())
    residuals = y - (slope * x + intercept)
    if var_y == 0.0:
        r = math.nan
        degenerate = True
    else:
        r = float(np.corrcoef(x, y)[0, 1])
        degenerate = False
    return CorrelationResult(
        pearson_r=r,
        slope=slope,
        intercept=intercept,
        residuals=tuple(float(v) for v in residuals),
        n_pairs=len(pairs),
        degenerate=degenerate,
        pairs=tuple(pairs),
    )


def predict_multitask(
    bundles: Sequence[LawBundle],
    mixture,
    n: SizeLike,
    form: str = "flexible",
) -> MultitaskPrediction:
    """Predict per-task performance for a K-task mixture using pairwise
    bundles: each task is predicted from its own weight through its own
    fraction curve, taken from the first bundle that fitted the task."""
    vec = mixture if isinstance(mixture, WeightVector) else WeightVector(mixture)
    size = _size(n)
    predictions: dict[str, float] = {}
    weights: dict[str, float] = {}
    for name in vec.tasks:
        p = vec.weight(name)
        if p == 0.0:
            continue
        source = next((b for b in bundles if name in b.tasks), None)
        if source is None:
            raise MissingTaskError(f"no bundle provides laws for task {name!r}")
        single = source.task_laws(name).single_task
        fit = _fraction_fit(source, name, form)
        predictions[name] = predict_loss_any_weighting(single, fit, p, size, source.direction)
        weights[name] = p
    if not predictions:
        raise InsufficientDataError("mixture has no task with positive weight")
    return MultitaskPrediction(n=size, weights=weights, predictions=predictions, form=form)
