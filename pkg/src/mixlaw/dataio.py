"""Ingestion, validation, and persistence of experiment records and fitted laws.

File formats
------------
JSON lines: one run object per line, snake_case fields mirroring
:class:`RunRecord`.  CSV: one flat row per eval with columns
``run_id, n_noneb, n_total, steps, batch_tokens, task, weight, testset,
metric, value, at_step``; the mixture is reconstructed by grouping rows on
``run_id``.

Bundles are single UTF-8 JSON documents with a top-level ``schema_version``
and a ``sha256`` checksum over the canonicalized body.  Canonicalization
sorts keys, strips whitespace, and writes floats with 17 significant digits,
so save -> load -> save is byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal, Sequence

from .errors import (
    CorruptBundleError,
    EmptyDatasetError,
    InvariantViolation,
    MissingMetricError,
    ParseError,
    VersionMismatchError,
)
from .fitting import (
    DEFAULT_TARGET_STEP,
    FitConfig,
    FitDiagnostics,
    UncertaintyReport,
    convergence_correct,
)
from .lawcore import (
    FractionFit,
    JointLaw,
    MetricDirection,
    PowerLawParams,
    TaskId,
    TaskLike,
    WeightVector,
    task_name,
    weight_key,
)

Format = Literal["json_lines", "csv"]

SCHEMA_VERSION = 1

TOOL_VERSION = "0.1.0"

CSV_COLUMNS = (
    "run_id",
    "n_noneb",
    "n_total",
    "steps",
    "batch_tokens",
    "task",
    "weight",
    "testset",
    "metric",
    "value",
    "at_step",
)

_MODEL_FIELDS = (
    "n_total",
    "n_noneb",
    "enc_layers",
    "dec_layers",
    "emb_dim",
    "n_heads",
    "head_dim",
    "mlp_dim",
    "vocab_size",
)


# ---------------------------------------------------------------------------
# Record types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelInfo:
    """Architecture summary of one trained model; only the non-embedding
    parameter count is required."""

    n_noneb: int
    n_total: int | None = None
    enc_layers: int | None = None
    dec_layers: int | None = None
    emb_dim: int | None = None
    n_heads: int | None = None
    head_dim: int | None = None
    mlp_dim: int | None = None
    vocab_size: int | None = None

    def __post_init__(self):
        for name in _MODEL_FIELDS:
            value = getattr(self, name)
            if value is not None and (not isinstance(value, int) or value <= 0):
                raise InvariantViolation(f"model.{name} must be a positive integer, got {value!r}")
        if self.n_total is not None and self.n_noneb > self.n_total:
            raise InvariantViolation(
                f"model.n_noneb ({self.n_noneb}) exceeds model.n_total ({self.n_total})"
            )


@dataclass(frozen=True)
class TrainingInfo:
    steps: int
    batch_tokens: int

    def __post_init__(self):
        if not isinstance(self.steps, int) or self.steps <= 0:
            raise InvariantViolation(f"training.steps must be a positive integer, got {self.steps!r}")
        if not isinstance(self.batch_tokens, int) or self.batch_tokens <= 0:
            raise InvariantViolation(
                f"training.batch_tokens must be a positive integer, got {self.batch_tokens!r}"
            )


@dataclass(frozen=True)
class EvalResult:
    """One evaluation of one task at one training step."""

    task: str
    testset: str
    metric: str
    value: float
    at_step: int

    def __post_init__(self):
        for name in ("task", "testset", "metric"):
            if not getattr(self, name):
                raise InvariantViolation(f"evals.{name} must be non-empty")
        if not math.isfinite(self.value):
            raise InvariantViolation(f"evals.value must be finite, got {self.value!r}")
        if not isinstance(self.at_step, int) or self.at_step <= 0:
            raise InvariantViolation(f"evals.at_step must be a positive integer, got {self.at_step!r}")


@dataclass(frozen=True)
class RunRecord:
    """One trained model: identity, mixture, training constants, evals.

    An eval whose task is absent from the mixture (or has weight 0) is
    zero-shot; it is kept in the record but excluded from fit datasets.
    """

    run_id: str
    model: ModelInfo
    mixture: WeightVector
    training: TrainingInfo
    evals: tuple[EvalResult, ...]

    def __post_init__(self):
        if not self.run_id:
            raise InvariantViolation("run_id must be non-empty")
        object.__setattr__(self, "evals", tuple(self.evals))
        seen = set()
        for ev in self.evals:
            if ev.at_step > self.training.steps:
                raise InvariantViolation(
                    f"evals.at_step ({ev.at_step}) exceeds training.steps ({self.training.steps})"
                )
            key = (ev.task, ev.testset, ev.metric, ev.at_step)
            if key in seen:
                raise InvariantViolation(f"duplicate eval {key} in run {self.run_id!r}")
            seen.add(key)

    def is_zero_shot(self, ev: EvalResult) -> bool:
        return self.mixture.weight(ev.task) == 0.0


# ---------------------------------------------------------------------------
# Reference size table
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SizeTableRow:
    enc_layers: int
    dec_layers: int
    emb_dim: int
    n_heads: int
    head_dim: int
    mlp_dim: int
    vocab_size: int
    n_total: int
    n_corrected: int

    def __post_init__(self):
        if not self.n_corrected < self.n_total:
            raise InvariantViolation("n_corrected must be smaller than n_total")


_SIZE_TABLE = (
    SizeTableRow(2, 2, 512, 8, 64, 2048, 128000, 149_953_024, 18_881_024),
    SizeTableRow(3, 3, 768, 12, 64, 3072, 128000, 260_322_816, 63_714_816),
    SizeTableRow(6, 6, 768, 12, 64, 3072, 128000, 324_035_328, 127_427_328),
    SizeTableRow(9, 9, 768, 12, 64, 3072, 128000, 387_747_840, 191_139_840),
    SizeTableRow(9, 9, 1024, 16, 64, 4096, 128000, 601_931_776, 339_787_776),
    SizeTableRow(12, 12, 1024, 16, 64, 4096, 128000, 715_193_344, 453_049_344),
    SizeTableRow(12, 12, 1280, 16, 80, 5120, 128000, 1_035_876_864, 707_869_184),
    SizeTableRow(12, 12, 1536, 16, 96, 6144, 128000, 1_412_528_128, 1_019_312_128),
)


def reference_size_table() -> tuple[SizeTableRow, ...]:
    """The shipped reference table of architectures and corrected
    (non-embedding) parameter counts."""
    return _SIZE_TABLE


def lookup_size(
    enc_layers: int,
    dec_layers: int,
    emb_dim: int,
    n_heads: int,
    head_dim: int,
    mlp_dim: int,
    vocab_size: int = 128000,
) -> SizeTableRow | None:
    """Exact-match lookup in the reference table; None when unknown."""
    probe = (enc_layers, dec_layers, emb_dim, n_heads, head_dim, mlp_dim, vocab_size)
    for row in _SIZE_TABLE:
        key = (
            row.enc_layers,
            row.dec_layers,
            row.emb_dim,
            row.n_heads,
            row.head_dim,
            row.mlp_dim,
            row.vocab_size,
        )
        if key == probe:
            return row
    return None


# ---------------------------------------------------------------------------
# Canonical JSON (byte-stable serialization shared by bundles and hashing)
# ---------------------------------------------------------------------------


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise InvariantViolation(f"cannot serialize non-finite number {x!r}")
    s = f"{x:.17g}"
    if not any(c in s for c in ".eE"):
        s += ".0"
    return s


def _canonical(obj) -> str:
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_canonical(v) for v in obj) + "]"
    if isinstance(obj, dict):
        parts = []
        for key in sorted(obj):
            if not isinstance(key, str):
                raise InvariantViolation(f"canonical JSON keys must be strings, got {key!r}")
            parts.append(json.dumps(key) + ":" + _canonical(obj[key]))
        return "{" + ",".join(parts) + "}"
    raise InvariantViolation(f"cannot serialize {type(obj).__name__}")


def canonical_bytes(obj) -> bytes:
    return _canonical(obj).encode("utf-8")


# ---------------------------------------------------------------------------
# Record <-> dict
# ---------------------------------------------------------------------------


def record_to_dict(record: RunRecord) -> dict:
    model = {k: getattr(record.model, k) for k in _MODEL_FIELDS if getattr(record.model, k) is not None}
    return {
        "run_id": record.run_id,
        "model": model,
        "mixture": {name: float(w) for name, w in record.mixture.entries.items()},
        "training": {"steps": record.training.steps, "batch_tokens": record.training.batch_tokens},
        "evals": [
            {
                "task": ev.task,
                "testset": ev.testset,
                "metric": ev.metric,
                "value": float(ev.value),
                "at_step": ev.at_step,
            }
            for ev in record.evals
        ],
    }


def record_from_dict(data: dict) -> RunRecord:
    if not isinstance(data, dict):
        raise InvariantViolation("record must be a JSON object")
    for req in ("run_id", "model", "mixture", "training", "evals"):
        if req not in data:
            raise InvariantViolation(f"missing field {req!r}")
    model_d = data["model"]
    if not isinstance(model_d, dict) or "n_noneb" not in model_d:
        raise InvariantViolation("model must be an object with n_noneb")
    unknown = set(model_d) - set(_MODEL_FIELDS)
    if unknown:
        raise InvariantViolation(f"unknown model fields: {sorted(unknown)}")
    training_d = data["training"]
    if not isinstance(training_d, dict):
        raise InvariantViolation("training must be an object")
    evals = []
    for i, ev in enumerate(data["evals"]):
        if not isinstance(ev, dict):
            raise InvariantViolation(f"evals[{i}] must be an object")
        try:
            evals.append(
                EvalResult(
                    task=ev["task"],
                    testset=ev["testset"],
                    metric=ev["metric"],
                    value=float(ev["value"]),
                    at_step=ev["at_step"],
                )
            )
        except KeyError as exc:
            raise InvariantViolation(f"evals[{i}] missing field {exc.args[0]!r}") from None
    try:
        training = TrainingInfo(steps=training_d["steps"], batch_tokens=training_d["batch_tokens"])
    except KeyError as exc:
        raise InvariantViolation(f"training missing field {exc.args[0]!r}") from None
    return RunRecord(
        run_id=data["run_id"],
        model=ModelInfo(**model_d),
        mixture=WeightVector(data["mixture"]),
        training=training,
        evals=tuple(evals),
    )


def dataset_hash(records: Sequence[RunRecord]) -> str:
    """sha256 over the canonical serialization of records (sorted by run_id)."""
    payload = canonical_bytes([record_to_dict(r) for r in sorted(records, key=lambda r: r.run_id)])
    return hashlib.sha256(payload).hexdigest()


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IngestIssue:
    line: int
    message: str
    kind: Literal["parse", "invariant"] = "invariant"


#: Reference weighting grid; off-grid mixture weights are legal but get an
#: informational note during validation.
REFERENCE_WEIGHT_GRID = (0.0, 0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 1.0)


@dataclass
class IngestReport:
    records: list[RunRecord]
    errors: list[IngestIssue]
    notes: list[str] = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.notes is None:
            self.notes = []

    @property
    def ok(self) -> bool:
        return not self.errors


def _grid_notes(records: Sequence[RunRecord]) -> list[str]:
    notes = []
    for record in records:
        off_grid = sorted(
            {
                w
                for w in record.mixture.entries.values()
                if weight_key(w) not in REFERENCE_WEIGHT_GRID
            }
        )
        if off_grid:
            notes.append(
                f"run {record.run_id!r}: off-grid mixture weight(s) "
                f"{', '.join(f'{w:g}' for w in off_grid)} (reference grid: "
                f"{', '.join(f'{w:g}' for w in REFERENCE_WEIGHT_GRID)})"
            )
    return notes


def _open_lines(source):
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8")
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    return source


def scan(source, format: Format = "json_lines") -> IngestReport:
    """Parse and validate a dataset, collecting every error with its line
    number.  Valid records always pass through: each input row ends up
    either in ``records`` or attributed in ``errors``, never dropped."""
    if format == "json_lines":
        return _scan_jsonl(source)
    if format == "csv":
        return _scan_csv(source)
    raise InvariantViolation(f"unknown format: {format!r}")


def ingest(source, format: Format = "json_lines") -> list[RunRecord]:
    """Strict ingestion: returns validated records or raises on the first
    problem (:class:`ParseError` for malformed input,
    :class:`InvariantViolation` for semantic violations)."""
    report = scan(source, format)
    if report.errors:
        first = report.errors[0]
        if first.kind == "parse":
            raise ParseError(first.line, first.message)
        raise InvariantViolation(f"line {first.line}: {first.message}")
    return report.records


def _scan_jsonl(source) -> IngestReport:
    records: list[RunRecord] = []
    errors: list[IngestIssue] = []
    seen_runs: set[str] = set()
    seen_evals: set[tuple] = set()
    fh = _open_lines(source)
    try:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                errors.append(IngestIssue(line_no, f"invalid JSON: {exc.msg}", "parse"))
                continue
            try:
                record = record_from_dict(data)
            except InvariantViolation as exc:
                errors.append(IngestIssue(line_no, str(exc)))
                continue
            issue = _register(record, seen_runs, seen_evals)
            if issue:
                errors.append(IngestIssue(line_no, issue))
                continue
            records.append(record)
    finally:
        if isinstance(source, (str, Path, bytes)):
            fh.close()
    return IngestReport(records, errors, _grid_notes(records))


def _register(record: RunRecord, seen_runs: set, seen_evals: set) -> str | None:
    if record.run_id in seen_runs:
        return f"duplicate run_id {record.run_id!r}"
    for ev in record.evals:
        key = (record.run_id, ev.task, ev.testset, ev.metric, ev.at_step)
        if key in seen_evals:
            return f"duplicate eval {key}"
    seen_runs.add(record.run_id)
    for ev in record.evals:
        seen_evals.add((record.run_id, ev.task, ev.testset, ev.metric, ev.at_step))
    return None


def _scan_csv(source) -> IngestReport:
    errors: list[IngestIssue] = []
    fh = _open_lines(source)
    try:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return IngestReport([], [IngestIssue(1, "empty file", "parse")])
        if tuple(h.strip() for h in header) != CSV_COLUMNS:
            return IngestReport(
                [], [IngestIssue(1, f"header must be {','.join(CSV_COLUMNS)}", "parse")]
            )

        # One pass: group rows by run_id, checking per-row syntax and
        # cross-row consistency; line numbers are 1-based including header.
        runs: dict[str, dict] = {}
        bad_runs: set[str] = set()
        seen_evals: set[tuple] = set()
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(CSV_COLUMNS):
                errors.append(IngestIssue(line_no, f"expected {len(CSV_COLUMNS)} columns, got {len(row)}", "parse"))
                continue
            raw = dict(zip(CSV_COLUMNS, (cell.strip() for cell in row)))
            try:
                run_id = raw["run_id"]
                n_noneb = int(raw["n_noneb"])
                n_total = int(raw["n_total"]) if raw["n_total"] else None
                steps = int(raw["steps"])
                batch_tokens = int(raw["batch_tokens"])
                weight = float(raw["weight"])
                value = float(raw["value"])
                at_step = int(raw["at_step"])
            except ValueError as exc:
                errors.append(IngestIssue(line_no, f"bad numeric field: {exc}", "parse"))
                continue
            key = (run_id, raw["task"], raw["testset"], raw["metric"], at_step)
            if key in seen_evals:
                errors.append(IngestIssue(line_no, f"duplicate eval {key}"))
                bad_runs.add(run_id)
                continue
            seen_evals.add(key)
            group = runs.setdefault(
                run_id,
                {
                    "line": line_no,
                    "constants": (n_noneb, n_total, steps, batch_tokens),
                    "weights": {},
                    "evals": [],
                },
            )
            if group["constants"] != (n_noneb, n_total, steps, batch_tokens):
                errors.append(IngestIssue(line_no, f"run {run_id!r} has inconsistent model/training fields"))
                bad_runs.add(run_id)
                continue
            prior = group["weights"].get(raw["task"])
            if prior is not None and prior != weight:
                errors.append(IngestIssue(line_no, f"run {run_id!r} task {raw['task']!r} has conflicting weights"))
                bad_runs.add(run_id)
                continue
            group["weights"][raw["task"]] = weight
            group["evals"].append(
                (raw["task"], raw["testset"], raw["metric"], value, at_step)
            )

        records = []
        for run_id, group in runs.items():
            if run_id in bad_runs:
                continue
            n_noneb, n_total, steps, batch_tokens = group["constants"]
            try:
                record = RunRecord(
                    run_id=run_id,
                    model=ModelInfo(n_noneb=n_noneb, n_total=n_total),
                    mixture=WeightVector(group["weights"]),
                    training=TrainingInfo(steps=steps, batch_tokens=batch_tokens),
                    evals=tuple(
                        EvalResult(task=t, testset=ts, metric=m, value=v, at_step=s)
                        for t, ts, m, v, s in group["evals"]
                    ),
                )
            except InvariantViolation as exc:
                errors.append(IngestIssue(group["line"], str(exc)))
                continue
            records.append(record)
    finally:
        if isinstance(source, (str, Path, bytes)):
            fh.close()
    return IngestReport(records, errors, _grid_notes(records))


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------


def write_jsonl(records: Iterable[RunRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(canonical_bytes(record_to_dict(record)).decode("utf-8"))
            fh.write("\n")


def write_csv(records: Iterable[RunRecord], path) -> None:
    """Flat per-eval rows.  Architecture fields beyond the two parameter
    counts and mixture entries for never-evaluated tasks are not
    representable in this format."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for record in records:
            for ev in record.evals:
                writer.writerow(
                    [
                        record.run_id,
                        record.model.n_noneb,
                        record.model.n_total if record.model.n_total is not None else "",
                        record.training.steps,
                        record.training.batch_tokens,
                        ev.task,
                        _format_float(record.mixture.weight(ev.task)),
                        ev.testset,
                        ev.metric,
                        _format_float(ev.value),
                        ev.at_step,
                    ]
                )


# ---------------------------------------------------------------------------
# Fit-dataset assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorrectionPolicy:
    """Names the (run_id, task) pairs whose final value is replaced by a
    convergence-corrected extrapolation of the step curve."""

    pairs: frozenset
    target_step: int = DEFAULT_TARGET_STEP
    config: FitConfig = FitConfig()

    def applies(self, run_id: str, task: str) -> bool:
        return (run_id, task) in self.pairs


def build_fit_dataset(
    records: Sequence[RunRecord],
    task: TaskLike,
    testset: str,
    metric: str,
    correction_policy: CorrectionPolicy | None = None,
) -> list[tuple[float, float, float]]:
    """One (n, p, y) point per run that trained and evaluated the task.

    ``n`` is the non-embedding parameter count, ``p`` the task's own mixture
    weight, ``y`` the eval value at the largest step (or the corrected
    extrapolation for runs named in ``correction_policy``).  Zero-shot evals
    are excluded.  Output is sorted by (p, n).
    """
    name = task_name(task)
    metric_seen = False
    points: list[tuple[float, float, float]] = []
    for record in records:
        matching = [ev for ev in record.evals if ev.metric == metric]
        if matching:
            metric_seen = True
        selected = [ev for ev in matching if ev.task == name and ev.testset == testset]
        if not selected:
            continue
        p = record.mixture.weight(name)
        if p == 0.0:
            continue
        if correction_policy is not None and correction_policy.applies(record.run_id, name):
            curve = sorted((ev.at_step, ev.value) for ev in selected)
            y = convergence_correct(curve, correction_policy.target_step, correction_policy.config).value
        else:
            y = max(selected, key=lambda ev: ev.at_step).value
        points.append((float(record.model.n_noneb), float(p), float(y)))
    if not points:
        if not metric_seen:
            raise MissingMetricError(f"metric {metric!r} never appears in the records")
        raise EmptyDatasetError(
            f"no usable points for task {name!r} on testset {testset!r} with metric {metric!r}"
        )
    points.sort(key=lambda t: (t[1], t[0]))
    return [(n, p, y) for n, p, y in points]


# ---------------------------------------------------------------------------
# Law bundle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TaskLaws:
    """Everything fitted for one task."""

    joint_law: JointLaw
    single_task: PowerLawParams
    fraction_fits: dict[str, FractionFit]
    effective_fractions: dict[float, float]
    diagnostics: FitDiagnostics
    uncertainty: UncertaintyReport | None = None
    observations: tuple[tuple[float, float, float], ...] = ()


@dataclass(frozen=True)
class Provenance:
    dataset_sha256: str
    config: FitConfig
    tool_version: str = TOOL_VERSION


@dataclass(frozen=True)
class LawBundle:
    """Persisted container of fitted laws; the unit of export and serving."""

    metric: str
    direction: MetricDirection
    testset: str
    tasks: dict[str, TaskLaws]
    provenance: Provenance
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        for name, laws in self.tasks.items():
            if laws.fraction_fits and 1.0 not in laws.joint_law.betas:
                raise InvariantViolation(
                    f"task {name!r} has fraction fits but no p=1 beta in its joint law"
                )

    def task_laws(self, task: TaskLike) -> TaskLaws:
        name = task_name(task)
        if name not in self.tasks:
            from .errors import MissingTaskError

            raise MissingTaskError(f"bundle has no laws for task {name!r}")
        return self.tasks[name]


def _task_id_to_dict(task: TaskId) -> dict:
    return {"name": task.name, "direction": task.direction}


def _task_id_from_dict(d: dict) -> TaskId:
    return TaskId(d["name"], d.get("direction"))


def _joint_law_to_dict(law: JointLaw) -> dict:
    return {
        "task": _task_id_to_dict(law.task),
        "alpha": law.alpha,
        "l_inf": law.l_inf,
        "betas": {repr(p): b for p, b in law.betas.items()},
        "metric_direction": law.metric_direction,
    }


def _joint_law_from_dict(d: dict) -> JointLaw:
    return JointLaw(
        task=_task_id_from_dict(d["task"]),
        alpha=d["alpha"],
        l_inf=d["l_inf"],
        betas={float(p): b for p, b in d["betas"].items()},
        metric_direction=d["metric_direction"],
    )


def _fraction_fit_to_dict(fit: FractionFit) -> dict:
    return {
        "task": _task_id_to_dict(fit.task),
        "form": fit.form,
        "c1": fit.c1,
        "c2": fit.c2,
        "c3": fit.c3,
    }


def _fraction_fit_from_dict(d: dict) -> FractionFit:
    return FractionFit(
        task=_task_id_from_dict(d["task"]), form=d["form"], c1=d["c1"], c2=d["c2"], c3=d["c3"]
    )


def _diagnostics_to_dict(diag: FitDiagnostics) -> dict:
    per_w = diag.per_weighting_r_squared
    return {
        "sse": diag.sse,
        "r_squared": diag.r_squared,
        "n_points": diag.n_points,
        "n_params": diag.n_params,
        "converged": diag.converged,
        "residuals": list(diag.residuals),
        "per_weighting_r_squared": None if per_w is None else {repr(p): v for p, v in per_w.items()},
    }


def _diagnostics_from_dict(d: dict) -> FitDiagnostics:
    per_w = d.get("per_weighting_r_squared")
    return FitDiagnostics(
        sse=d["sse"],
        r_squared=d["r_squared"],
        n_points=d["n_points"],
        n_params=d["n_params"],
        converged=d["converged"],
        residuals=tuple(d["residuals"]),
        per_weighting_r_squared=None if per_w is None else {float(p): v for p, v in per_w.items()},
    )


def _uncertainty_to_dict(rep: UncertaintyReport | None) -> dict | None:
    if rep is None:
        return None
    return {
        "std_devs": dict(rep.std_devs),
        "replicate_count": rep.replicate_count,
        "sigma_fraction": rep.sigma_fraction,
        "failed_count": rep.failed_count,
    }


def _uncertainty_from_dict(d: dict | None) -> UncertaintyReport | None:
    if d is None:
        return None
    return UncertaintyReport(
        std_devs=dict(d["std_devs"]),
        replicate_count=d["replicate_count"],
        sigma_fraction=d["sigma_fraction"],
        failed_count=d["failed_count"],
    )


def _config_to_dict(config: FitConfig) -> dict:
    return {
        "residual_space": config.residual_space,
        "multistart_count": config.multistart_count,
        "max_iterations": config.max_iterations,
        "convergence_tol": config.convergence_tol,
        "seed": config.seed,
    }


def bundle_to_dict(bundle: LawBundle) -> dict:
    """The checksummed body of the bundle document (no schema_version)."""
    return {
        "metric": bundle.metric,
        "direction": bundle.direction,
        "testset": bundle.testset,
        "tasks": {
            name: {
                "joint_law": _joint_law_to_dict(laws.joint_law),
                "single_task": {
                    "beta": laws.single_task.beta,
                    "alpha": laws.single_task.alpha,
                    "l_inf": laws.single_task.l_inf,
                },
                "fraction_fits": {
                    form: _fraction_fit_to_dict(fit) for form, fit in laws.fraction_fits.items()
                },
                "effective_fractions": {repr(p): f for p, f in laws.effective_fractions.items()},
                "diagnostics": _diagnostics_to_dict(laws.diagnostics),
                "uncertainty": _uncertainty_to_dict(laws.uncertainty),
                "observations": [list(obs) for obs in laws.observations],
            }
            for name, laws in bundle.tasks.items()
        },
        "provenance": {
            "dataset_sha256": bundle.provenance.dataset_sha256,
            "config": _config_to_dict(bundle.provenance.config),
            "tool_version": bundle.provenance.tool_version,
        },
    }


def bundle_from_dict(body: dict, schema_version: int = SCHEMA_VERSION) -> LawBundle:
    tasks = {}
    for name, t in body["tasks"].items():
        tasks[name] = TaskLaws(
            joint_law=_joint_law_from_dict(t["joint_law"]),
            single_task=PowerLawParams(
                beta=t["single_task"]["beta"],
                alpha=t["single_task"]["alpha"],
                l_inf=t["single_task"]["l_inf"],
            ),
            fraction_fits={form: _fraction_fit_from_dict(d) for form, d in t["fraction_fits"].items()},
            effective_fractions={float(p): f for p, f in t["effective_fractions"].items()},
            diagnostics=_diagnostics_from_dict(t["diagnostics"]),
            uncertainty=_uncertainty_from_dict(t.get("uncertainty")),
            observations=tuple(tuple(obs) for obs in t.get("observations", [])),
        )
    prov = body["provenance"]
    return LawBundle(
        metric=body["metric"],
        direction=body["direction"],
        testset=body["testset"],
        tasks=tasks,
        provenance=Provenance(
            dataset_sha256=prov["dataset_sha256"],
            config=FitConfig(**prov["config"]),
            tool_version=prov["tool_version"],
        ),
        schema_version=schema_version,
    )


def save_bundle(bundle: LawBundle, path) -> None:
    """Atomic write (temp file + rename) of the canonical bundle document."""
    body = bundle_to_dict(bundle)
    body_bytes = canonical_bytes(body)
    document = {
        "schema_version": bundle.schema_version,
        "sha256": hashlib.sha256(body_bytes).hexdigest(),
        "body": body,
    }
    payload = canonical_bytes(document) + b"\n"
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_bundle(path, expected_version: int = SCHEMA_VERSION) -> LawBundle:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        document = json.loads(raw.decode("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptBundleError(f"bundle is not valid JSON: {exc}") from None
    if not isinstance(document, dict) or "schema_version" not in document:
        raise CorruptBundleError("bundle document lacks a schema_version")
    version = document["schema_version"]
    if version != expected_version:
        raise VersionMismatchError(
            f"bundle schema version {version} does not match reader version {expected_version}"
        )
    if "sha256" not in document or "body" not in document:
        raise CorruptBundleError("bundle document lacks checksum or body")
    body_bytes = canonical_bytes(document["body"])
    digest = hashlib.sha256(body_bytes).hexdigest()
    if digest != document["sha256"]:
        raise CorruptBundleError("bundle checksum mismatch; file is corrupt")
    try:
        return bundle_from_dict(document["body"], schema_version=version)
    except (KeyError, TypeError) as exc:
        raise CorruptBundleError(f"bundle body is malformed: {exc}") from None
