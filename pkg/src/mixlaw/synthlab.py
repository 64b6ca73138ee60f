"""Synthetic datasets generated from known ground-truth laws.

Every fitting path in the package is validated against data produced here:
the forward model is the joint law itself, so a zero-noise dataset is an
exact fixed point of fit-then-regenerate.  Noise is multiplicative Gaussian
on the metric value (std = sigma * true value) and fully determined by the
seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataio import EvalResult, ModelInfo, RunRecord, TrainingInfo
from .errors import CoverageError, InvariantViolation
from .fitting import DEFAULT_TARGET_STEP
from .lawcore import (
    FractionFit,
    MetricDirection,
    SizeLike,
    WeightVector,
    _size,
    eval_fraction_curve,
    weight_key,
)

#: Generated runs mimic the real training setup: smaller models train for
#: 500K steps, models at or above this size for 1M steps.
_LONG_TRAINING_THRESHOLD = 5e8


@dataclass(frozen=True)
class TaskTruth:
    """Ground-truth law for one task: shared exponent/asymptote plus a beta
    map, either tabulated per weighting or derived from a fraction curve via
    ``beta(p) = beta1 * f(p) ** (-alpha)`` (which makes beta(1) == beta1
    exactly)."""

    alpha: float
    l_inf: float
    betas: dict[float, float] | None = None
    beta1: float | None = None
    fraction: FractionFit | None = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvariantViolation(f"alpha must be positive, got {self.alpha}")
        if not self.l_inf >= 0:
            raise InvariantViolation(f"l_inf must be non-negative, got {self.l_inf}")
        tabulated = self.betas is not None
        derived = self.beta1 is not None or self.fraction is not None
        if tabulated == derived:
            raise InvariantViolation("specify either a beta table or (beta1, fraction)")
        if tabulated:
            normalized = {}
            for p, beta in self.betas.items():
                if not beta > 0:
                    raise InvariantViolation(f"beta for p={p} must be positive, got {beta}")
                normalized[weight_key(p)] = float(beta)
            object.__setattr__(self, "betas", normalized)
        else:
            if self.beta1 is None or self.fraction is None:
                raise InvariantViolation("derived mode needs both beta1 and fraction")
            if not self.beta1 > 0:
                raise InvariantViolation(f"beta1 must be positive, got {self.beta1}")

    def beta_for(self, p: float) -> float:
        key = weight_key(p)
        if not 0.0 < key <= 1.0:
            raise InvariantViolation(f"weighting must be in (0, 1], got {p}")
        if self.betas is not None:
            if key not in self.betas:
                raise CoverageError(f"no tabulated beta for weighting p={key:g}")
            return self.betas[key]
        f = eval_fraction_curve(self.fraction, key)
        if not f > 0:
            raise CoverageError(f"fraction curve is non-positive at p={key:g}")
        return self.beta1 * f**-self.alpha

    def value(self, p: float, n: SizeLike, direction: MetricDirection = "loss_like") -> float:
        term = self.beta_for(p) * _size(n) ** -self.alpha
        if direction == "loss_like":
            return term + self.l_inf
        return self.l_inf - term


@dataclass(frozen=True)
class GroundTruth:
    """A full synthetic scenario: per-task laws, a noise level, and a seed."""

    tasks: dict[str, TaskTruth]
    multiplicative_sigma: float = 0.0
    seed: int = 0
    metric: str = "cross_entropy"
    testset: str = "in_domain"
    direction: MetricDirection = "loss_like"

    def __post_init__(self):
        if not self.tasks:
            raise InvariantViolation("ground truth needs at least one task")
        if self.multiplicative_sigma < 0:
            raise InvariantViolation("multiplicative_sigma must be non-negative")


def generate_dataset(
    truth: GroundTruth,
    sizes: Sequence[SizeLike],
    weightings: Sequence,
) -> list[RunRecord]:
    """One record per (size, weighting): exact law values plus seeded noise.

    ``weightings`` accepts :class:`WeightVector` instances or plain
    task -> weight mappings.  Tasks with weight 0 get no eval (zero-shot).
    """
    size_values = [int(round(float(_size(s)))) for s in sizes]
    if len(set(size_values)) != len(size_values):
        raise InvariantViolation("sizes must be distinct")
    if any(n <= 0 for n in size_values):
        raise InvariantViolation("sizes must be positive")
    vectors = [w if isinstance(w, WeightVector) else WeightVector(w) for w in weightings]
    for vec in vectors:
        for name in vec.tasks:
            if name not in truth.tasks:
                raise CoverageError(f"no ground truth for task {name!r}")

    rng = np.random.default_rng(truth.seed)
    records = []
    index = 0
    for n in size_values:
        steps = 1_000_000 if n >= _LONG_TRAINING_THRESHOLD else 500_000
        for vec in vectors:
            evals = []
            for name in vec.tasks:
                p = vec.weight(name)
                if p == 0.0:
                    continue
                exact = truth.tasks[name].value(p, n, truth.direction)
                noise = truth.multiplicative_sigma * exact * rng.standard_normal()
                evals.append(
                    EvalResult(
                        task=name,
                        testset=truth.testset,
                        metric=truth.metric,
                        value=float(exact + noise),
                        at_step=steps,
                    )
                )
            records.append(
                RunRecord(
                    run_id=f"synth-{index:04d}",
                    model=ModelInfo(n_noneb=n),
                    mixture=vec,
                    training=TrainingInfo(steps=steps, batch_tokens=500_000),
                    evals=tuple(evals),
                )
            )
            index += 1
    return records


def generate_training_curve(
    final_law_value: float,
    curve_params: Sequence[float],
    steps: Sequence[int],
    noise_sigma: float = 0.0,
    seed: int = 0,
    target_step: int = DEFAULT_TARGET_STEP,
) -> list[tuple[int, float]]:
    """Step curve ``y = b * s**(-a) + c`` with optional seeded noise.

    ``curve_params`` is (a, b) or (a, b, c).  When c is omitted (or None)
    it is anchored so the curve reaches ``final_law_value`` at
    ``target_step``, which makes the generated curve consistent with the
    law value it converges to.
    """
    if len(curve_params) == 2:
        a, b = curve_params
        c = None
    elif len(curve_params) == 3:
        a, b, c = curve_params
    else:
        raise InvariantViolation("curve_params must be (a, b) or (a, b, c)")
    if not (a > 0 and b > 0):
        raise InvariantViolation(f"curve exponent and factor must be positive, got a={a}, b={b}")
    if c is None:
        c = float(final_law_value) - b * float(target_step) ** -a
    if not c >= 0:
        raise InvariantViolation(f"curve asymptote must be non-negative, got c={c}")

    rng = np.random.default_rng(seed)
    curve = []
    for s in steps:
        s = int(s)
        if s <= 0:
            raise InvariantViolation(f"steps must be positive, got {s}")
        y = b * float(s) ** -a + c
        if noise_sigma > 0:
            y += noise_sigma * y * rng.standard_normal()
        curve.append((s, float(y)))
    return curve
