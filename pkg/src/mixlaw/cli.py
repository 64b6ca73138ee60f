"""Command-line surface: validate, simulate, fit, frontier, neff, correct,
correlate, report, serve.

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 fit
failure.  The environment variable ``MIXLAW_SEED`` supplies the default
seed when ``--seed`` is not given.  Machine-readable outputs use 17
significant digits; human tables use 4.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, dataio, reports, synthlab
from .errors import (
    CorruptBundleError,
    EmptyDatasetError,
    InvariantViolation,
    MissingMetricError,
    MixlawError,
    ParseError,
    VersionMismatchError,
)
from .fitting import DEFAULT_TARGET_STEP, FitConfig, convergence_correct
from .lawcore import FractionFit, WeightVector
from .server import make_server

USAGE_ERROR = 1
DATA_ERROR = 2
FIT_ERROR = 3

DEFAULT_WEIGHT_GRID = (0.0, 0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 1.0)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _default_seed() -> int:
    raw = os.environ.get("MIXLAW_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def _float_list(raw: str) -> list[float]:
    return [float(tok) for tok in raw.split(",") if tok.strip()]


def _fmt(x: float) -> str:
    return f"{x:.4g}"


def build_parser() -> _Parser:
    parser = _Parser(prog="mixlaw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("json_lines", "csv"), default="json_lines")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="generate a synthetic dataset from known laws")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json_lines", "csv"), default="json_lines")
    p.add_argument("--truth", help="JSON file describing the ground truth")
    p.add_argument("--sizes", help="comma-separated model sizes", default=None)
    p.add_argument("--grid", help="comma-separated first-task weights", default=None)
    p.add_argument("--noise", type=float, default=None, help="multiplicative noise sigma")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit joint laws and write a bundle")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("json_lines", "csv"), default="json_lines")
    p.add_argument("--tasks", required=True, help="comma-separated task names")
    p.add_argument("--testset", default="in_domain")
    p.add_argument("--metric", default="cross_entropy")
    p.add_argument("--direction", choices=("loss_like", "quality_like"), default="loss_like")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--bootstrap", type=int, default=16, metavar="N")
    p.add_argument("--sigma", type=float, default=0.01, help="bootstrap noise fraction")
    p.add_argument("--multistart", type=int, default=16)
    p.add_argument("--residual-space", choices=("raw", "log_shifted"), default="raw")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("frontier", help="predict the two-task trade-off frontier")
    p.add_argument("--bundle", required=True)
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--grid", default=None, help="comma-separated first-task weights")
    p.add_argument("--form", choices=("flexible", "linear"), default="flexible")
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--json-out", help="plot-data JSON output path")
    p.set_defaults(func=cmd_frontier)

    p = sub.add_parser("neff", help="effective-capacity report at a reference size")
    p.add_argument("--bundle", required=True)
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_neff)

    p = sub.add_parser("correct", help="extrapolate a training curve to a target step")
    p.add_argument("--input", required=True, help="CSV with header step,value")
    p.add_argument("--target-step", type=int, default=DEFAULT_TARGET_STEP)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("correlate", help="quality-versus-loss correlation for one task")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("json_lines", "csv"), default="json_lines")
    p.add_argument("--task", required=True)
    p.add_argument("--loss-metric", default="cross_entropy")
    p.add_argument("--quality-metric", required=True)
    p.add_argument("--testset", default="in_domain")
    p.add_argument("--out", help="plot-data JSON output path")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("report", help="emit tables and plot data from a bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n", type=float, default=None, help="reference size (default: largest observed)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="serve a bundle over HTTP (read-only)")
    p.add_argument("--bundle", required=True)
    p.add_argument("--port", type=int, default=8351)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static-dir", default=None)
    p.set_defaults(func=cmd_serve)

    return parser


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_validate(args) -> int:
    if not Path(args.input).exists():
        print(f"error: no such file: {args.input}", file=sys.stderr)
        return DATA_ERROR
    report = dataio.scan(args.input, args.format)
    for issue in report.errors:
        print(f"line {issue.line}: {issue.message}", file=sys.stderr)
    for note in report.notes:
        print(f"note: {note}")
    if not report.records and not report.errors:
        print("error: empty dataset", file=sys.stderr)
        return DATA_ERROR
    print(f"{len(report.records)} valid record(s), {len(report.errors)} error(s)")
    return 0 if report.ok else DATA_ERROR


def _load_truth(path: str | None, noise: float | None, seed: int | None) -> synthlab.GroundTruth:
    if path is None:
        spec = {
            "tasks": {
                "task-a": {
                    "alpha": 0.3,
                    "l_inf": 1.0,
                    "beta1": 100.0,
                    "fraction": {"form": "linear", "c1": 1.0},
                },
                "task-b": {
                    "alpha": 0.32,
                    "l_inf": 1.2,
                    "beta1": 120.0,
                    "fraction": {"form": "linear", "c1": 1.0},
                },
            }
        }
    else:
        with open(path, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
    tasks = {}
    for name, t in spec["tasks"].items():
        fraction = None
        if "fraction" in t:
            fr = t["fraction"]
            fraction = FractionFit(
                task=name, form=fr["form"], c1=fr["c1"], c2=fr.get("c2"), c3=fr.get("c3")
            )
        tasks[name] = synthlab.TaskTruth(
            alpha=t["alpha"],
            l_inf=t["l_inf"],
            betas={float(p): b for p, b in t["betas"].items()} if "betas" in t else None,
            beta1=t.get("beta1"),
            fraction=fraction,
        )
    return synthlab.GroundTruth(
        tasks=tasks,
        multiplicative_sigma=noise if noise is not None else float(spec.get("sigma", 0.0)),
        seed=seed if seed is not None else int(spec.get("seed", _default_seed())),
        metric=spec.get("metric", "cross_entropy"),
        testset=spec.get("testset", "in_domain"),
        direction=spec.get("direction", "loss_like"),
    )


def cmd_simulate(args) -> int:
    truth = _load_truth(args.truth, args.noise, args.seed)
    names = list(truth.tasks)
    if len(names) != 2:
        print("error: simulate currently generates two-task mixtures", file=sys.stderr)
        return DATA_ERROR
    sizes = _float_list(args.sizes) if args.sizes else list(np.geomspace(2e7, 1e9, 8))
    grid = _float_list(args.grid) if args.grid else list(DEFAULT_WEIGHT_GRID)
    weightings = [WeightVector({names[0]: p, names[1]: 1.0 - p}) for p in grid]
    records = synthlab.generate_dataset(truth, sizes, weightings)
    if args.format == "csv":
        dataio.write_csv(records, args.out)
    else:
        dataio.write_jsonl(records, args.out)
    print(f"wrote {len(records)} record(s) to {args.out}")
    return 0


def cmd_fit(args) -> int:
    try:
        records = dataio.ingest(args.input, args.format)
    except (ParseError, InvariantViolation, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    if not records:
        print("error: empty dataset", file=sys.stderr)
        return DATA_ERROR
    tasks = [t.strip() for t in args.tasks.split(",") if t.strip()]
    config = FitConfig(
        residual_space=args.residual_space,
        multistart_count=args.multistart,
        seed=args.seed if args.seed is not None else _default_seed(),
    )
    try:
        bundle = analysis.analyze(
            records,
            tasks,
            testset=args.testset,
            metric=args.metric,
            config=config,
            direction=args.direction,
            bootstrap_replicates=args.bootstrap,
        )
    except (MissingMetricError, EmptyDatasetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except MixlawError as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return FIT_ERROR
    dataio.save_bundle(bundle, args.out)
    _print_fit_summary(bundle)
    print(f"bundle written to {args.out}")
    return 0


def _print_fit_summary(bundle: dataio.LawBundle) -> None:
    for name, laws in bundle.tasks.items():
        std = laws.uncertainty.std_devs if laws.uncertainty else {}
        law = laws.joint_law
        alpha_s = f" +/- {_fmt(std['alpha'])}" if "alpha" in std else ""
        linf_s = f" +/- {_fmt(std['l_inf'])}" if "l_inf" in std else ""
        print(f"task {name}: alpha={_fmt(law.alpha)}{alpha_s}  l_inf={_fmt(law.l_inf)}{linf_s}  "
              f"R2={laws.diagnostics.r_squared:.6f}")
        for p in law.weightings:
            beta_s = f" +/- {_fmt(std[f'beta@{p:g}'])}" if f"beta@{p:g}" in std else ""
            f_val = laws.effective_fractions.get(p)
            f_s = f"  f={_fmt(f_val)}" if f_val is not None else ""
            print(f"  p={p:<8g} beta={_fmt(law.betas[p])}{beta_s}{f_s}")


def _load_bundle_or_exit(path: str):
    try:
        return dataio.load_bundle(path)
    except (OSError, CorruptBundleError, VersionMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None


def cmd_frontier(args) -> int:
    if args.n <= 0:
        print("error: --n must be positive", file=sys.stderr)
        return USAGE_ERROR
    bundle = _load_bundle_or_exit(args.bundle)
    if bundle is None:
        return DATA_ERROR
    grid = _float_list(args.grid) if args.grid else None
    try:
        curve = analysis.predict_frontier(bundle, args.n, grid=grid, form=args.form)
    except MixlawError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    first, second = curve.task_pair
    print(f"frontier at n={args.n:g} ({curve.form} fractions)")
    print(f"{'p':>8}  {first:>14}  {second:>14}")
    for i, p in enumerate(curve.weights):
        print(f"{p:>8.3f}  {_fmt(curve.values[first][i]):>14}  {_fmt(curve.values[second][i]):>14}")
    if args.out:
        reports.write_frontier_csv(curve, args.out)
        print(f"frontier CSV written to {args.out}")
    if args.json_out:
        reports.write_plot_json(reports.frontier_rows(curve), args.json_out)
        print(f"frontier plot data written to {args.json_out}")
    return 0


def cmd_neff(args) -> int:
    if args.n <= 0:
        print("error: --n must be positive", file=sys.stderr)
        return USAGE_ERROR
    bundle = _load_bundle_or_exit(args.bundle)
    if bundle is None:
        return DATA_ERROR
    report = analysis.capacity_report(bundle, args.n)
    print(f"{'task':<12} {'p':>8} {'f':>10} {'n_eff':>14} {'gain':>8}")
    for row in report.rows:
        print(
            f"{row.task:<12} {row.p:>8.3f} {_fmt(row.fraction):>10} "
            f"{row.n_eff:>14.6g} {_fmt(row.relative_gain):>8}"
        )
    if args.out:
        reports.write_capacity_csv(report, args.out)
        print(f"capacity CSV written to {args.out}")
    return 0


def cmd_correct(args) -> int:
    try:
        with open(args.input, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    if not lines or lines[0].replace(" ", "") != "step,value":
        print("error: curve file must start with header 'step,value'", file=sys.stderr)
        return DATA_ERROR
    curve = []
    for i, line in enumerate(lines[1:], start=2):
        try:
            step_s, value_s = line.split(",")
            curve.append((int(step_s), float(value_s)))
        except ValueError:
            print(f"error: line {i}: expected 'step,value'", file=sys.stderr)
            return DATA_ERROR
    config = FitConfig(seed=args.seed if args.seed is not None else _default_seed())
    try:
        result = convergence_correct(curve, args.target_step, config)
    except MixlawError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    print(f"corrected value at step {args.target_step}: {result.value:.17g}")
    if result.params is not None:
        print(
            f"curve fit: a={_fmt(result.params.alpha)} b={_fmt(result.params.beta)} "
            f"c={_fmt(result.params.l_inf)} (R2={result.diagnostics.r_squared:.6f})"
        )
    if result.extrapolation_flagged:
        print("warning: target step exceeds 10x the last observation; extrapolation is aggressive")
    return 0


def cmd_correlate(args) -> int:
    try:
        records = dataio.ingest(args.input, args.format)
    except (ParseError, InvariantViolation, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    try:
        result = analysis.metric_loss_correlation(
            records, args.task, args.loss_metric, args.quality_metric, args.testset
        )
    except MixlawError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    if result.degenerate:
        print(f"degenerate correlation over {result.n_pairs} pairs (zero variance)")
    else:
        print(f"pearson r = {_fmt(result.pearson_r)} over {result.n_pairs} pairs")
    print(f"quality ~= {_fmt(result.slope)} * loss + {_fmt(result.intercept)}")
    if args.out:
        reports.write_plot_json(reports.correlation_rows(result), args.out)
        print(f"correlation plot data written to {args.out}")
    return 0


def cmd_report(args) -> int:
    bundle = _load_bundle_or_exit(args.bundle)
    if bundle is None:
        return DATA_ERROR
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    observed = [n for laws in bundle.tasks.values() for n, _, _ in laws.observations]
    reference_n = args.n if args.n is not None else (max(observed) if observed else 1e9)
    if reference_n <= 0:
        print("error: --n must be positive", file=sys.stderr)
        return USAGE_ERROR

    reports.write_coefficients_csv(bundle, out_dir / "coefficients.csv")
    reports.write_capacity_csv(
        analysis.capacity_report(bundle, reference_n), out_dir / "capacity.csv"
    )
    reports.write_plot_json(reports.scaling_curve_rows(bundle), out_dir / "scaling_curves.json")
    reports.write_plot_json(reports.fraction_rows(bundle), out_dir / "fractions.json")
    written = ["coefficients.csv", "capacity.csv", "scaling_curves.json", "fractions.json"]
    if len(bundle.tasks) == 2:
        form = "flexible" if all(
            "flexible" in laws.fraction_fits for laws in bundle.tasks.values()
        ) else "linear"
        curve = analysis.predict_frontier(bundle, reference_n, form=form)
        reports.write_frontier_csv(curve, out_dir / "frontier.csv")
        reports.write_plot_json(reports.frontier_rows(curve), out_dir / "frontier.json")
        written += ["frontier.csv", "frontier.json"]
    print(f"wrote {', '.join(written)} to {out_dir}")
    return 0


def cmd_serve(args) -> int:
    bundle = _load_bundle_or_exit(args.bundle)
    if bundle is None:
        return DATA_ERROR
    try:
        server = make_server(bundle, port=args.port, host=args.host, static_dir=args.static_dir)
    except OSError as exc:
        print(f"error: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return DATA_ERROR
    print(f"serving bundle on http://{args.host}:{args.port} (Ctrl-C to stop)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
