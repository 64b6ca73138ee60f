"""mixlaw: multitask translation scaling laws.

Fit joint scaling laws to experiment records, derive effective-parameter
allocations per task, and predict per-task performance and full trade-off
frontiers for arbitrary task weightings and model sizes.
"""

from .analysis import (
    CapacityReport,
    CorrelationResult,
    FrontierCurve,
    MultitaskPrediction,
    analyze,
    capacity_report,
    metric_loss_correlation,
    predict_frontier,
    predict_multitask,
)
from .dataio import (
    CorrectionPolicy,
    EvalResult,
    IngestReport,
    LawBundle,
    ModelInfo,
    Provenance,
    RunRecord,
    SizeTableRow,
    TaskLaws,
    TrainingInfo,
    build_fit_dataset,
    dataset_hash,
    ingest,
    load_bundle,
    lookup_size,
    reference_size_table,
    save_bundle,
    scan,
    write_csv,
    write_jsonl,
)
from .errors import (
    CorruptBundleError,
    CoverageError,
    DegenerateWeightingError,
    DomainError,
    EmptyDatasetError,
    FitFailedError,
    InsufficientDataError,
    InvariantViolation,
    MissingBaselineError,
    MissingMetricError,
    MissingTaskError,
    MixlawError,
    ParseError,
    RankDeficientDataError,
    UnknownWeightingError,
    VersionMismatchError,
    ZeroShotError,
)
from .fitting import (
    CorrectionResult,
    FitConfig,
    FitDiagnostics,
    UncertaintyReport,
    bootstrap_uncertainty,
    convergence_correct,
    fit_bivariate_law,
    fit_fraction_curve,
    fit_joint_law,
    fit_power_law,
)
from .lawcore import (
    BivariateLawParams,
    FractionFit,
    JointLaw,
    ModelSize,
    PowerLawParams,
    TaskId,
    WeightVector,
    effective_fraction,
    effective_params,
    eval_bivariate_law,
    eval_fraction_curve,
    eval_joint_loss,
    eval_power_law,
    eval_quality_law,
    neff_consistency_check,
    predict_loss_any_weighting,
)
from .synthlab import GroundTruth, TaskTruth, generate_dataset, generate_training_curve

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
