"""Closed-form scaling-law types and algebra.

Everything here is a pure function of immutable value types: no fitting,
no I/O, safe for unrestricted concurrent use.

Functional forms
----------------
Single-size law (loss-like metrics, lower is better)::

    L(N) = beta * N**(-alpha) + l_inf

Quality-like metrics (higher is better) use the increasing, saturating
mirror form ``M(N) = m_inf - beta * N**(-alpha)`` with the same positive
``beta`` and ``alpha``; the ``l_inf`` field then holds the asymptote m_inf.

Encoder/decoder bivariate law::

    L(Ne, Nd) = beta * Ne**(-alpha_e) * Nd**(-alpha_d) + l_inf

Joint per-task law over training-mixture weightings: the exponent and the
asymptote are shared across weightings, only the multiplicative factor
depends on the task's own weight p::

    L(N; p) = betas[p] * N**(-alpha) + l_inf

Effective capacity: a task trained at weight p inside a multitask model
performs like a single-task model of size ``f(p) * N`` where::

    f(p) = (betas[1] / betas[p]) ** (1 / alpha)

``f`` is independent of N, may exceed 1 when tasks are synergistic, and is
never clamped.  Weight p = 0 (zero-shot) is rejected everywhere.

Parametric approximations of ``f`` enable prediction at unseen weightings:

    flexible:  f_hat(p) = p + c1 * p**c2 * (1 - p)**c3      (c2, c3 > 0)
    linear:    f_hat(p) = c1 * (p - 1) + 1

Both satisfy ``f_hat(1) == 1`` exactly by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Union

from .errors import (
    DomainError,
    InvariantViolation,
    MissingBaselineError,
    UnknownWeightingError,
    ZeroShotError,
)

MetricDirection = Literal["loss_like", "quality_like"]
FractionForm = Literal["flexible", "linear"]

#: Decimal places used to normalize weighting keys, so keys survive
#: file round-trips and float noise in 1 - p arithmetic.
WEIGHT_DECIMALS = 6

#: Tolerance on the sum of mixture weights.
WEIGHT_SUM_TOL = 1e-9


def weight_key(p: float) -> float:
    """Canonical map key for a task weight (rounded to 6 decimals)."""
    return round(float(p), WEIGHT_DECIMALS)


def _check_direction(direction: str) -> None:
    if direction not in ("loss_like", "quality_like"):
        raise InvariantViolation(f"unknown metric direction: {direction!r}")


@dataclass(frozen=True)
class TaskId:
    """Identity of one task (language pair), e.g. ``TaskId("en-de")``.

    ``direction`` is an optional free-form tag (e.g. ``"En->XX"``) carried
    for display only; equality and hashing use the name alone.
    """

    name: str
    direction: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.name:
            raise InvariantViolation("task name must be non-empty")

    def __str__(self) -> str:
        return self.name


TaskLike = Union[TaskId, str]


def task_name(task: TaskLike) -> str:
    """Normalize a task reference (TaskId or bare string) to its name."""
    if isinstance(task, TaskId):
        return task.name
    if isinstance(task, str):
        if not task:
            raise InvariantViolation("task name must be non-empty")
        return task
    raise InvariantViolation(f"not a task identifier: {task!r}")


@dataclass(frozen=True)
class ModelSize:
    """Count of non-embedding parameters; strictly positive."""

    n: float

    def __post_init__(self):
        if not (self.n > 0 and math.isfinite(self.n)):
            raise InvariantViolation(f"model size must be positive and finite, got {self.n}")

    def __float__(self) -> float:
        return float(self.n)


SizeLike = Union[ModelSize, float, int]


def _size(n: SizeLike) -> float:
    value = float(n.n) if isinstance(n, ModelSize) else float(n)
    if not (value > 0 and math.isfinite(value)):
        raise InvariantViolation(f"model size must be positive and finite, got {value}")
    return value


class WeightVector:
    """A training-mixture weighting: task name -> weight in [0, 1].

    Weights must be non-negative and sum to 1 within 1e-9.  A task with
    weight 0 is present but zero-shot, and is excluded from all laws.
    """

    __slots__ = ("entries",)

    def __init__(self, entries):
        items = {task_name(k): float(v) for k, v in dict(entries).items()}
        if not items:
            raise InvariantViolation("weight vector needs at least one entry")
        for name, w in items.items():
            if not (0.0 <= w <= 1.0) or not math.isfinite(w):
                raise InvariantViolation(f"weight for {name!r} must be in [0, 1], got {w}")
        total = math.fsum(items.values())
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise InvariantViolation(f"weights must sum to 1 within {WEIGHT_SUM_TOL}, got {total!r}")
        self.entries: dict[str, float] = items

    def weight(self, task: TaskLike) -> float:
        """Own weight of ``task``; 0.0 when the task is absent (zero-shot)."""
        return self.entries.get(task_name(task), 0.0)

    @property
    def tasks(self) -> tuple[str, ...]:
        return tuple(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, WeightVector) and self.entries == other.entries

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}: {v:g}" for k, v in self.entries.items())
        return f"WeightVector({{{inner}}})"

    @staticmethod
    def pair(first: TaskLike, second: TaskLike, p: float) -> "WeightVector":
        """Two-task weighting (p, 1 - p)."""
        return WeightVector({first: p, second: 1.0 - p})


@dataclass(frozen=True)
class PowerLawParams:
    """Parameters of one single-size law: multiplicative factor, exponent,
    and asymptote (irreducible loss, or asymptotic quality for quality-like
    metrics)."""

    beta: float
    alpha: float
    l_inf: float

    def __post_init__(self):
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise InvariantViolation(f"beta must be positive, got {self.beta}")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise InvariantViolation(f"alpha must be positive, got {self.alpha}")
        if not (self.l_inf >= 0 and math.isfinite(self.l_inf)):
            raise InvariantViolation(f"l_inf must be non-negative, got {self.l_inf}")


@dataclass(frozen=True)
class BivariateLawParams:
    """Parameters of the encoder/decoder bivariate law."""

    beta: float
    alpha_e: float
    alpha_d: float
    l_inf: float

    def __post_init__(self):
        for label, value in (("beta", self.beta), ("alpha_e", self.alpha_e), ("alpha_d", self.alpha_d)):
            if not (value > 0 and math.isfinite(value)):
                raise InvariantViolation(f"{label} must be positive, got {value}")
        if not (self.l_inf >= 0 and math.isfinite(self.l_inf)):
            raise InvariantViolation(f"l_inf must be non-negative, got {self.l_inf}")


class JointLaw:
    """Per-task joint law: shared ``alpha`` and ``l_inf``, one beta per
    observed weighting of the task's own weight p.

    Keys of ``betas`` are canonicalized with :func:`weight_key` and must lie
    in (0, 1]; zero-shot has no beta by construction.
    """

    __slots__ = ("task", "alpha", "l_inf", "betas", "metric_direction")

    def __init__(
        self,
        task: TaskLike,
        alpha: float,
        l_inf: float,
        betas,
        metric_direction: MetricDirection = "loss_like",
    ):
        _check_direction(metric_direction)
        if not (alpha > 0 and math.isfinite(alpha)):
            raise InvariantViolation(f"alpha must be positive, got {alpha}")
        if metric_direction == "loss_like" and not l_inf >= 0:
            raise InvariantViolation(f"l_inf must be non-negative for loss_like, got {l_inf}")
        if not math.isfinite(l_inf):
            raise InvariantViolation(f"l_inf must be finite, got {l_inf}")
        normalized: dict[float, float] = {}
        for p, beta in dict(betas).items():
            key = weight_key(p)
            if not 0.0 < key <= 1.0:
                raise InvariantViolation(f"weighting keys must be in (0, 1], got {p}")
            if not (beta > 0 and math.isfinite(beta)):
                raise InvariantViolation(f"beta for p={p} must be positive, got {beta}")
            normalized[key] = float(beta)
        if not normalized:
            raise InvariantViolation("joint law needs at least one weighting")
        self.task = TaskId(task) if isinstance(task, str) else task
        self.alpha = float(alpha)
        self.l_inf = float(l_inf)
        self.betas = dict(sorted(normalized.items()))
        self.metric_direction: MetricDirection = metric_direction

    def beta_for(self, p: float) -> float:
        key = weight_key(p)
        if key not in self.betas:
            raise UnknownWeightingError(
                f"no beta fitted for weighting p={key:g} of task {self.task.name!r}; "
                f"known weightings: {sorted(self.betas)}"
            )
        return self.betas[key]

    def baseline_beta(self) -> float:
        """The single-task (p = 1) beta; required for effective fractions."""
        if 1.0 not in self.betas:
            raise MissingBaselineError(
                f"task {self.task.name!r} has no p=1 weighting; effective fractions are undefined"
            )
        return self.betas[1.0]

    @property
    def weightings(self) -> tuple[float, ...]:
        return tuple(self.betas)

    def single_task_params(self) -> PowerLawParams:
        """The p = 1 law as plain power-law parameters."""
        return PowerLawParams(beta=self.baseline_beta(), alpha=self.alpha, l_inf=self.l_inf)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, JointLaw)
            and self.task == other.task
            and self.alpha == other.alpha
            and self.l_inf == other.l_inf
            and self.betas == other.betas
            and self.metric_direction == other.metric_direction
        )

    def __repr__(self) -> str:
        return (
            f"JointLaw(task={self.task.name!r}, alpha={self.alpha:g}, l_inf={self.l_inf:g}, "
            f"betas={{{', '.join(f'{p:g}: {b:g}' for p, b in self.betas.items())}}}, "
            f"metric_direction={self.metric_direction!r})"
        )


@dataclass(frozen=True)
class FractionFit:
    """Fitted parametric curve approximating the effective fraction f(p).

    flexible: ``f_hat(p) = p + c1 * p**c2 * (1-p)**c3`` with c2, c3 > 0.
    linear:   ``f_hat(p) = c1 * (p - 1) + 1``; c2 and c3 are unused (None).
    """

    task: TaskId
    form: FractionForm
    c1: float
    c2: float | None = None
    c3: float | None = None

    def __post_init__(self):
        if self.form not in ("flexible", "linear"):
            raise InvariantViolation(f"unknown fraction form: {self.form!r}")
        if not math.isfinite(self.c1):
            raise InvariantViolation(f"c1 must be finite, got {self.c1}")
        if self.form == "flexible":
            if self.c2 is None or self.c3 is None:
                raise InvariantViolation("flexible form requires c2 and c3")
            if not (self.c2 > 0 and self.c3 > 0):
                raise InvariantViolation(f"c2 and c3 must be positive, got {self.c2}, {self.c3}")
        elif self.c2 is not None or self.c3 is not None:
            raise InvariantViolation("linear form takes only c1")


# ---------------------------------------------------------------------------
# Closed-form evaluation
# ---------------------------------------------------------------------------


def eval_power_law(params: PowerLawParams, n: SizeLike) -> float:
    """Loss-like law value ``beta * n**(-alpha) + l_inf``."""
    return params.beta * _size(n) ** -params.alpha + params.l_inf


def eval_quality_law(params: PowerLawParams, n: SizeLike) -> float:
    """Quality-like law value ``l_inf - beta * n**(-alpha)`` (l_inf is the
    asymptotic quality)."""
    return params.l_inf - params.beta * _size(n) ** -params.alpha


def eval_law(params: PowerLawParams, n: SizeLike, direction: MetricDirection = "loss_like") -> float:
    """Direction-dispatching law evaluation."""
    _check_direction(direction)
    if direction == "loss_like":
        return eval_power_law(params, n)
    return eval_quality_law(params, n)


def eval_bivariate_law(params: BivariateLawParams, n_enc: SizeLike, n_dec: SizeLike) -> float:
    """Bivariate law value ``beta * n_enc**(-alpha_e) * n_dec**(-alpha_d) + l_inf``."""
    return params.beta * _size(n_enc) ** -params.alpha_e * _size(n_dec) ** -params.alpha_d + params.l_inf


def eval_joint_loss(law: JointLaw, p: float, n: SizeLike) -> float:
    """Joint-law value at a weighting that was fitted.

    Raises :class:`UnknownWeightingError` for unseen p; use
    :func:`predict_loss_any_weighting` to interpolate between weightings.
    """
    beta = law.beta_for(p)
    term = beta * _size(n) ** -law.alpha
    if law.metric_direction == "loss_like":
        return term + law.l_inf
    return law.l_inf - term


def effective_fraction(law: JointLaw, p: float) -> float:
    """Scale-independent fraction ``(betas[1] / betas[p]) ** (1 / alpha)``.

    Exceeds 1 when the mixture is synergistic for this task; never clamped.
    """
    baseline = law.baseline_beta()
    beta_p = law.beta_for(p)
    return (baseline / beta_p) ** (1.0 / law.alpha)


def effective_params(law: JointLaw, p: float, n: SizeLike) -> ModelSize:
    """Effective single-task parameter count ``f(p) * n``."""
    return ModelSize(effective_fraction(law, p) * _size(n))


def eval_fraction_curve(fit: FractionFit, p: float) -> float:
    """Evaluate a fitted fraction curve at p in [0, 1]."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"fraction curve domain is [0, 1], got {p}")
    if fit.form == "linear":
        return fit.c1 * (p - 1.0) + 1.0
    return p + fit.c1 * p**fit.c2 * (1.0 - p) ** fit.c3


def predict_loss_any_weighting(
    single_task: PowerLawParams,
    fit: FractionFit,
    p: float,
    n: SizeLike,
    direction: MetricDirection = "loss_like",
) -> float:
    """Predict performance at an arbitrary weighting via the single-task law
    evaluated at the effective size: ``beta1 * (f_hat(p) * n)**(-alpha) + l_inf``.

    ``single_task`` must be the task's own p = 1 law.  p = 0 is rejected
    (zero-shot), p outside (0, 1] is a domain error.
    """
    _check_direction(direction)
    p = float(p)
    if p == 0.0:
        raise ZeroShotError("p = 0 is zero-shot and not modeled")
    if not 0.0 < p <= 1.0:
        raise DomainError(f"weighting must be in (0, 1], got {p}")
    f_hat = eval_fraction_curve(fit, p)
    if not f_hat > 0:
        raise DomainError(f"fraction curve is non-positive at p={p:g} (f_hat={f_hat:g})")
    term = single_task.beta * (f_hat * _size(n)) ** -single_task.alpha
    if direction == "loss_like":
        return term + single_task.l_inf
    return single_task.l_inf - term


def neff_consistency_check(law: JointLaw, p: float, n: SizeLike) -> tuple[float, float]:
    """Evaluate the same prediction two algebraically equivalent ways.

    Returns ``(via_joint, via_neff)`` where the first uses the joint law
    directly and the second substitutes the effective parameter count into
    the single-task law.  The two agree to floating tolerance for all valid
    inputs.
    """
    via_joint = eval_joint_loss(law, p, n)
    f = effective_fraction(law, p)
    term = law.baseline_beta() * (f * _size(n)) ** -law.alpha
    if law.metric_direction == "loss_like":
        via_neff = term + law.l_inf
    else:
        via_neff = law.l_inf - term
    return via_joint, via_neff
