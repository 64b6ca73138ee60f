"""Nonlinear least-squares estimation for all law forms.

All fits share one engine: residuals in a configurable space, positivity
enforced by reparameterization (``beta = exp(t)``, ``alpha = exp(t)``,
asymptote through a softplus map), and a seeded low-discrepancy multi-start
whose winner is the lowest objective, ties broken by lowest start index.
Given identical data, config, and seed the results are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np
from scipy.optimize import least_squares

from .errors import (
    DegenerateWeightingError,
    DomainError,
    FitFailedError,
    InsufficientDataError,
    InvariantViolation,
    MixlawError,
    RankDeficientDataError,
    ZeroShotError,
)
from .lawcore import (
    BivariateLawParams,
    FractionFit,
    FractionForm,
    JointLaw,
    MetricDirection,
    PowerLawParams,
    TaskId,
    TaskLike,
    _size,
    weight_key,
)

ResidualSpace = Literal["raw", "log_shifted"]

#: Multi-start search ranges for the scaling exponent.
ALPHA_RANGE = (0.05, 1.5)

#: Default extrapolation target for convergence correction (training steps).
DEFAULT_TARGET_STEP = 2_500_000


@dataclass(frozen=True)
class FitConfig:
    """Knobs shared by every fit; defaults are sensible for desk-scale data."""

    residual_space: ResidualSpace = "raw"
    multistart_count: int = 16
    max_iterations: int = 2000
    convergence_tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.residual_space not in ("raw", "log_shifted"):
            raise InvariantViolation(f"unknown residual space: {self.residual_space!r}")
        if self.multistart_count < 1:
            raise InvariantViolation("multistart_count must be positive")
        if self.max_iterations < 1:
            raise InvariantViolation("max_iterations must be positive")
        if not self.convergence_tol > 0:
            raise InvariantViolation("convergence_tol must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise InvariantViolation("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class FitDiagnostics:
    """Goodness-of-fit summary; residuals are raw (model minus observed)."""

    sse: float
    r_squared: float
    n_points: int
    n_params: int
    converged: bool
    residuals: tuple[float, ...]
    per_weighting_r_squared: dict[float, float] | None = None

    def __post_init__(self):
        if self.converged and self.n_points < self.n_params:
            raise InvariantViolation("converged fit cannot have fewer points than parameters")
        if self.sse < 0:
            raise InvariantViolation("sse must be non-negative")


@dataclass(frozen=True)
class UncertaintyReport:
    """Per-coefficient standard deviations from seeded parametric bootstrap."""

    std_devs: dict[str, float]
    replicate_count: int
    sigma_fraction: float = 0.01
    failed_count: int = 0


@dataclass(frozen=True)
class CorrectionResult:
    """Outcome of extrapolating a training curve to a target step.

    ``params`` is None for the degenerate flat-curve case.  The
    ``extrapolation_flagged`` bit is set when the target exceeds 10x the
    last observed step.
    """

    value: float
    params: PowerLawParams | None
    diagnostics: FitDiagnostics
    extrapolation_flagged: bool


# ---------------------------------------------------------------------------
# Reparameterization and multi-start machinery
# ---------------------------------------------------------------------------


def _softplus(x):
    return np.logaddexp(0.0, x)


def _inv_softplus(y: float) -> float:
    # Inverse of log(1 + exp(t)); y must be positive.
    y = max(float(y), 1e-12)
    return y + math.log(-math.expm1(-y))


def _radical_inverse(index: int, base: int) -> float:
    inv, result = 1.0, 0.0
    while index > 0:
        inv /= base
        result += inv * (index % base)
        index //= base
    return result


def _halton_points(count: int, dims: int, seed: int) -> np.ndarray:
    """Seeded Halton points in [0, 1)^dims (Cranley-Patterson rotation)."""
    bases = (2, 3, 5, 7)[:dims]
    shift = np.random.default_rng(seed).random(dims)
    pts = np.array(
        [[_radical_inverse(k, b) for b in bases] for k in range(1, count + 1)]
    )
    return (pts + shift) % 1.0


def _log_uniform(u: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return lo * (hi / lo) ** u


def _run_multistart(
    residual_fn: Callable[[np.ndarray], np.ndarray],
    starts: Sequence[np.ndarray],
    config: FitConfig,
) -> tuple[np.ndarray, bool]:
    """Lowest-objective winner over the given starts; ties keep the lowest
    start index (strict improvement required to replace)."""
    best_x = None
    best_cost = math.inf
    best_ok = False
    for x0 in starts:
        try:
            result = least_squares(
                residual_fn,
                x0,
                method="trf",
                xtol=config.convergence_tol,
                ftol=config.convergence_tol,
                gtol=config.convergence_tol,
                max_nfev=config.max_iterations,
            )
        except (ValueError, FloatingPointError):
            continue
        if not np.all(np.isfinite(result.x)) or not math.isfinite(result.cost):
            continue
        if result.cost < best_cost:
            best_cost = result.cost
            best_x = result.x
            best_ok = bool(result.success)
    if best_x is None:
        raise FitFailedError("all multi-start attempts failed")
    return best_x, best_ok


def _diagnostics(y: np.ndarray, y_hat: np.ndarray, n_params: int, converged: bool, **extra) -> FitDiagnostics:
    residuals = y_hat - y
    sse = float(np.dot(residuals, residuals))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot > 0:
        r_squared = 1.0 - sse / ss_tot
    else:
        r_squared = 1.0 if sse == 0 else 0.0
    return FitDiagnostics(
        sse=sse,
        r_squared=r_squared,
        n_points=int(y.size),
        n_params=n_params,
        converged=converged,
        residuals=tuple(float(r) for r in residuals),
        **extra,
    )


def _reducible(y: np.ndarray, asymptote: np.ndarray, direction: MetricDirection) -> np.ndarray:
    if direction == "loss_like":
        return y - asymptote
    return asymptote - y


def _asymptote_starts(y: np.ndarray, u: np.ndarray, direction: MetricDirection) -> np.ndarray:
    """Starting asymptote values: below min(y) for losses, above max(y) for
    quality metrics."""
    if direction == "loss_like":
        return u * float(y.min()) * 0.999 + 1e-9
    span = max(float(y.max() - y.min()), 0.05 * max(abs(float(y.max())), 1.0))
    return float(y.max()) + (u + 0.01) * span


def _signed_model(term: np.ndarray, asymptote: np.ndarray, direction: MetricDirection) -> np.ndarray:
    if direction == "loss_like":
        return term + asymptote
    return asymptote - term


# ---------------------------------------------------------------------------
# Fit operations
# ---------------------------------------------------------------------------


def fit_power_law(
    points: Sequence[tuple],
    direction: MetricDirection = "loss_like",
    config: FitConfig = FitConfig(),
) -> tuple[PowerLawParams, FitDiagnostics]:
    """Fit ``y = beta * n**(-alpha) + l_inf`` (or the quality mirror form).

    Needs at least 3 distinct sizes; for loss-like data all y must be
    positive.  Non-convergence is reported through diagnostics, not raised.
    """
    n = np.array([_size(p[0]) for p in points], dtype=float)
    y = np.array([float(p[1]) for p in points], dtype=float)
    if not np.all(np.isfinite(y)):
        raise InvariantViolation("all observed values must be finite")
    if np.unique(n).size < 3:
        raise InsufficientDataError(f"need >= 3 distinct sizes, got {np.unique(n).size}")
    if direction == "loss_like" and not np.all(y > 0):
        raise InvariantViolation("loss-like observations must be positive")

    log_n = np.log(n)
    space = config.residual_space

    def residual_fn(theta: np.ndarray) -> np.ndarray:
        t_b, t_a, t_c = np.clip(theta, -200.0, 200.0)
        alpha = math.exp(min(t_a, 6.0))
        asymptote = _softplus(t_c)
        log_term = t_b - alpha * log_n
        if space == "log_shifted":
            observed = np.maximum(_reducible(y, asymptote, direction), 1e-300)
            return log_term - np.log(observed)
        return _signed_model(np.exp(log_term), asymptote, direction) - y

    i_min = int(np.argmin(n))
    u = _halton_points(config.multistart_count, 2, config.seed)
    alphas = _log_uniform(u[:, 0], *ALPHA_RANGE)
    asymptotes = _asymptote_starts(y, u[:, 1], direction)
    starts = []
    for a0, c0 in zip(alphas, asymptotes):
        red = _reducible(y[i_min : i_min + 1], np.array([c0]), direction)[0]
        b0 = max(red, 1e-6 * max(abs(float(y[i_min])), 1.0)) * n[i_min] ** a0
        starts.append(np.array([math.log(b0), math.log(a0), _inv_softplus(c0)]))

    theta, converged = _run_multistart(residual_fn, starts, config)
    params = PowerLawParams(
        beta=math.exp(theta[0]), alpha=math.exp(theta[1]), l_inf=float(_softplus(theta[2]))
    )
    term = params.beta * np.exp(-params.alpha * log_n)
    diag = _diagnostics(y, _signed_model(term, params.l_inf, direction), 3, converged)
    return params, diag


def fit_bivariate_law(
    points: Sequence[tuple],
    config: FitConfig = FitConfig(),
) -> tuple[BivariateLawParams, FitDiagnostics]:
    """Fit the encoder/decoder law ``y = beta * ne**(-ae) * nd**(-ad) + l_inf``.

    Raises :class:`RankDeficientDataError` when either size axis carries no
    variation (the corresponding exponent is unidentifiable).
    """
    ne = np.array([_size(p[0]) for p in points], dtype=float)
    nd = np.array([_size(p[1]) for p in points], dtype=float)
    y = np.array([float(p[2]) for p in points], dtype=float)
    if not np.all(np.isfinite(y)):
        raise InvariantViolation("all observed values must be finite")
    if y.size < 4:
        raise InsufficientDataError(f"need >= 4 points, got {y.size}")
    if np.unique(ne).size < 2:
        raise RankDeficientDataError("all points share the encoder size; alpha_e is unidentifiable")
    if np.unique(nd).size < 2:
        raise RankDeficientDataError("all points share the decoder size; alpha_d is unidentifiable")
    if not np.all(y > 0):
        raise InvariantViolation("loss-like observations must be positive")

    log_ne, log_nd = np.log(ne), np.log(nd)
    space = config.residual_space

    def residual_fn(theta: np.ndarray) -> np.ndarray:
        t_b, t_ae, t_ad, t_c = np.clip(theta, -200.0, 200.0)
        a_e = math.exp(min(t_ae, 6.0))
        a_d = math.exp(min(t_ad, 6.0))
        asymptote = _softplus(t_c)
        log_term = t_b - a_e * log_ne - a_d * log_nd
        if space == "log_shifted":
            observed = np.maximum(y - asymptote, 1e-300)
            return log_term - np.log(observed)
        return np.exp(log_term) + asymptote - y

    i_top = int(np.argmax(y))
    u = _halton_points(config.multistart_count, 3, config.seed)
    a_es = _log_uniform(u[:, 0], *ALPHA_RANGE)
    a_ds = _log_uniform(u[:, 1], *ALPHA_RANGE)
    asymptotes = _asymptote_starts(y, u[:, 2], "loss_like")
    starts = []
    for ae0, ad0, c0 in zip(a_es, a_ds, asymptotes):
        red = max(float(y[i_top]) - c0, 1e-6 * float(y[i_top]))
        b0 = red * ne[i_top] ** ae0 * nd[i_top] ** ad0
        starts.append(np.array([math.log(b0), math.log(ae0), math.log(ad0), _inv_softplus(c0)]))

    theta, converged = _run_multistart(residual_fn, starts, config)
    params = BivariateLawParams(
        beta=math.exp(theta[0]),
        alpha_e=math.exp(theta[1]),
        alpha_d=math.exp(theta[2]),
        l_inf=float(_softplus(theta[3])),
    )
    y_hat = params.beta * np.exp(-params.alpha_e * log_ne - params.alpha_d * log_nd) + params.l_inf
    return params, _diagnostics(y, y_hat, 4, converged)


def fit_joint_law(
    points: Sequence[tuple],
    direction: MetricDirection = "loss_like",
    config: FitConfig = FitConfig(),
    task: TaskLike = "task",
) -> tuple[JointLaw, FitDiagnostics]:
    """Simultaneously fit shared (alpha, l_inf) and one beta per weighting.

    ``points`` are (n, p, y) triples for one task; the fitted parameter
    count is ``#weightings + 2``.  Diagnostics carry a per-weighting R^2.
    """
    triples = [(float(_size(n)), weight_key(p), float(y)) for n, p, y in points]
    for _, p, _ in triples:
        if p == 0.0:
            raise ZeroShotError("p = 0 points cannot enter a joint fit")
        if not 0.0 < p <= 1.0:
            raise InvariantViolation(f"weighting must be in (0, 1], got {p}")
    y_all = np.array([t[2] for t in triples])
    if not np.all(np.isfinite(y_all)):
        raise InvariantViolation("all observed values must be finite")
    if direction == "loss_like" and not np.all(y_all > 0):
        raise InvariantViolation("loss-like observations must be positive")

    by_weighting: dict[float, list[tuple[float, float]]] = {}
    for n, p, y in triples:
        by_weighting.setdefault(p, []).append((n, y))
    weightings = sorted(by_weighting)
    if len(weightings) < 2:
        raise InsufficientDataError(f"need >= 2 distinct weightings, got {len(weightings)}")
    for p, pts in by_weighting.items():
        if len(pts) < 2:
            raise DegenerateWeightingError(f"weighting p={p:g} has a single point")
        if len({n for n, _ in pts}) < 2:
            raise DegenerateWeightingError(f"weighting p={p:g} has a single distinct size")
    n_params = len(weightings) + 2
    if len(triples) < n_params:
        raise InsufficientDataError(
            f"need >= {n_params} points for {len(weightings)} weightings, got {len(triples)}"
        )

    n_arr = np.array([t[0] for t in triples])
    y_arr = np.array([t[2] for t in triples])
    log_n = np.log(n_arr)
    w_index = np.array([weightings.index(t[1]) for t in triples])
    space = config.residual_space

    def residual_fn(theta: np.ndarray) -> np.ndarray:
        theta = np.clip(theta, -200.0, 200.0)
        alpha = math.exp(min(theta[0], 6.0))
        asymptote = _softplus(theta[1])
        log_term = theta[2:][w_index] - alpha * log_n
        if space == "log_shifted":
            observed = np.maximum(_reducible(y_arr, asymptote, direction), 1e-300)
            return log_term - np.log(observed)
        return _signed_model(np.exp(log_term), asymptote, direction) - y_arr

    u = _halton_points(config.multistart_count, 2, config.seed)
    alphas = _log_uniform(u[:, 0], *ALPHA_RANGE)
    asymptotes = _asymptote_starts(y_arr, u[:, 1], direction)
    starts = []
    for a0, c0 in zip(alphas, asymptotes):
        theta0 = [math.log(a0), _inv_softplus(c0)]
        for p in weightings:
            pts = by_weighting[p]
            n_small, y_small = min(pts)
            red = _reducible(np.array([y_small]), np.array([c0]), direction)[0]
            b0 = max(red, 1e-6 * max(abs(y_small), 1.0)) * n_small**a0
            theta0.append(math.log(b0))
        starts.append(np.array(theta0))

    theta, converged = _run_multistart(residual_fn, starts, config)
    alpha = math.exp(theta[0])
    l_inf = float(_softplus(theta[1]))
    betas = {p: math.exp(theta[2 + i]) for i, p in enumerate(weightings)}
    law = JointLaw(task, alpha=alpha, l_inf=l_inf, betas=betas, metric_direction=direction)

    term = np.array([betas[weightings[i]] for i in w_index]) * np.exp(-alpha * log_n)
    y_hat = _signed_model(term, l_inf, direction)
    per_w: dict[float, float] = {}
    for i, p in enumerate(weightings):
        mask = w_index == i
        sse = float(np.sum((y_hat[mask] - y_arr[mask]) ** 2))
        ss_tot = float(np.sum((y_arr[mask] - y_arr[mask].mean()) ** 2))
        per_w[p] = 1.0 - sse / ss_tot if ss_tot > 0 else (1.0 if sse == 0 else 0.0)
    diag = _diagnostics(y_arr, y_hat, n_params, converged, per_weighting_r_squared=per_w)
    return law, diag


def fit_fraction_curve(
    samples: Sequence[tuple],
    form: FractionForm = "flexible",
    config: FitConfig = FitConfig(),
    task: TaskLike = "task",
) -> tuple[FractionFit, FitDiagnostics]:
    """Least-squares fit of a fraction curve to (p, f) samples.

    The flexible form needs >= 4 samples (3 coefficients), the linear form
    >= 2.  Both forms pass through (1, 1) by construction, so a lone p = 1
    sample carries no information about the coefficients.
    """
    p = np.array([float(s[0]) for s in samples])
    f = np.array([float(s[1]) for s in samples])
    if np.any(p == 0.0):
        raise ZeroShotError("p = 0 samples cannot enter a fraction fit")
    if not np.all((p > 0) & (p <= 1)):
        raise InvariantViolation("sample weights must be in (0, 1]")
    if not np.all(np.isfinite(f)) or not np.all(f > 0):
        raise InvariantViolation("sampled fractions must be positive and finite")

    informative = int(np.sum(p < 1.0))
    if form == "linear":
        if p.size < 2:
            raise InsufficientDataError("linear fraction fit needs >= 2 samples")
        if informative == 0:
            raise InsufficientDataError("all samples at p = 1; slope is unidentifiable")
        denom = float(np.sum((p - 1.0) ** 2))
        c1 = float(np.sum((p - 1.0) * (f - 1.0)) / denom)
        fit = FractionFit(task=_as_task(task), form="linear", c1=c1)
        f_hat = c1 * (p - 1.0) + 1.0
        return fit, _diagnostics(f, f_hat, 1, True)

    if p.size < 4:
        raise InsufficientDataError("flexible fraction fit needs >= 4 samples")
    if informative < 3:
        raise InsufficientDataError("flexible fraction fit needs >= 3 samples below p = 1")

    def shape(c2: float, c3: float) -> np.ndarray:
        return p**c2 * (1.0 - p) ** c3

    def residual_fn(theta: np.ndarray) -> np.ndarray:
        c1 = float(np.clip(theta[0], -1e6, 1e6))
        c2 = math.exp(min(max(theta[1], -20.0), 6.0))
        c3 = math.exp(min(max(theta[2], -20.0), 6.0))
        return p + c1 * shape(c2, c3) - f

    u = _halton_points(config.multistart_count, 2, config.seed)
    starts = []
    for c2_0, c3_0 in zip(_log_uniform(u[:, 0], 0.2, 5.0), _log_uniform(u[:, 1], 0.2, 5.0)):
        phi = shape(c2_0, c3_0)
        denom = float(np.dot(phi, phi))
        c1_0 = float(np.dot(phi, f - p) / denom) if denom > 0 else 0.0
        starts.append(np.array([c1_0, math.log(c2_0), math.log(c3_0)]))

    theta, converged = _run_multistart(residual_fn, starts, config)
    fit = FractionFit(
        task=_as_task(task),
        form="flexible",
        c1=float(theta[0]),
        c2=math.exp(min(max(theta[1], -20.0), 6.0)),
        c3=math.exp(min(max(theta[2], -20.0), 6.0)),
    )
    f_hat = p + fit.c1 * shape(fit.c2, fit.c3)
    return fit, _diagnostics(f, f_hat, 3, converged)


def convergence_correct(
    curve: Sequence[tuple],
    target_step: int = DEFAULT_TARGET_STEP,
    config: FitConfig = FitConfig(),
) -> CorrectionResult:
    """Extrapolate an under-trained run to ``target_step`` via a shifted
    power law ``y(s) = b * s**(-a) + c`` fitted to the step curve.

    Needs >= 4 points spanning at least a decade of steps, and a target at
    or beyond the last observation.  Targets beyond 10x the last observed
    step set ``extrapolation_flagged``.
    """
    steps = np.array([float(s) for s, _ in curve])
    y = np.array([float(v) for _, v in curve])
    if steps.size < 4:
        raise InsufficientDataError(f"need >= 4 curve points, got {steps.size}")
    if np.any(steps <= 0):
        raise InvariantViolation("steps must be positive")
    if np.unique(steps).size != steps.size:
        raise InvariantViolation("curve steps must be distinct")
    if float(steps.max() / steps.min()) < 10.0:
        raise InsufficientDataError("curve must span at least one decade of steps")
    if target_step < steps.max():
        raise DomainError(
            f"target step {target_step} precedes the last observation at {int(steps.max())}"
        )
    flagged = bool(target_step > 10.0 * steps.max())

    if float(y.max() - y.min()) == 0.0:
        # Flat curve: the reducible term is degenerate; the asymptote is the data.
        diag = _diagnostics(y, y.copy(), 3, True)
        return CorrectionResult(float(y[0]), None, diag, flagged)

    params, diag = fit_power_law(list(zip(steps, y)), "loss_like", config)
    value = params.beta * float(target_step) ** -params.alpha + params.l_inf
    return CorrectionResult(float(value), params, diag, flagged)


# ---------------------------------------------------------------------------
# Bootstrap uncertainty
# ---------------------------------------------------------------------------


def coefficients_of(params) -> dict[str, float]:
    """Flatten any fitted parameter object into named coefficients."""
    if isinstance(params, PowerLawParams):
        return {"beta": params.beta, "alpha": params.alpha, "l_inf": params.l_inf}
    if isinstance(params, BivariateLawParams):
        return {
            "beta": params.beta,
            "alpha_e": params.alpha_e,
            "alpha_d": params.alpha_d,
            "l_inf": params.l_inf,
        }
    if isinstance(params, JointLaw):
        out = {"alpha": params.alpha, "l_inf": params.l_inf}
        for p, beta in params.betas.items():
            out[f"beta@{p:g}"] = beta
        return out
    if isinstance(params, FractionFit):
        out = {"c1": params.c1}
        if params.form == "flexible":
            out["c2"] = float(params.c2)
            out["c3"] = float(params.c3)
        return out
    raise InvariantViolation(f"cannot extract coefficients from {type(params).__name__}")


def bootstrap_uncertainty(
    points: Sequence[tuple],
    fitter: Callable[[Sequence[tuple]], tuple],
    sigma_fraction: float = 0.01,
    replicates: int = 32,
    seed: int = 0,
) -> UncertaintyReport:
    """Parametric bootstrap: perturb every observed value by Gaussian noise
    with standard deviation ``sigma_fraction * value``, refit, and report
    per-coefficient standard deviations across replicates.

    ``fitter`` maps a point list to ``(params, diagnostics)``; the observed
    value must be the last element of each point tuple.  Deterministic given
    the seed.  At least 80% of replicates must refit successfully.
    """
    if replicates < 2:
        raise InsufficientDataError("need >= 2 bootstrap replicates")
    if sigma_fraction < 0:
        raise InvariantViolation("sigma_fraction must be non-negative")
    base_params, _ = fitter(points)
    names = list(coefficients_of(base_params))

    y = np.array([float(pt[-1]) for pt in points])
    eps = np.random.default_rng(seed).standard_normal((replicates, y.size))
    samples: dict[str, list[float]] = {name: [] for name in names}
    failures = 0
    for r in range(replicates):
        perturbed_y = y * (1.0 + sigma_fraction * eps[r])
        perturbed = [(*pt[:-1], float(py)) for pt, py in zip(points, perturbed_y)]
        try:
            params, _ = fitter(perturbed)
        except MixlawError:
            failures += 1
            continue
        coeffs = coefficients_of(params)
        for name in names:
            samples[name].append(coeffs[name])

    successes = replicates - failures
    if successes < math.ceil(0.8 * replicates):
        raise FitFailedError(
            f"only {successes}/{replicates} bootstrap replicates succeeded (need >= 80%)"
        )
    std_devs = {
        name: float(np.std(np.array(values), ddof=1)) for name, values in samples.items()
    }
    return UncertaintyReport(
        std_devs=std_devs,
        replicate_count=replicates,
        sigma_fraction=float(sigma_fraction),
        failed_count=failures,
    )


def _as_task(task: TaskLike) -> TaskId:
    return TaskId(task) if isinstance(task, str) else task
