"""
Predicting the task trade-off frontier
======================================

The decision-support workflow: fit everything once (`analyze`), then read
off predicted per-task performance for any weighting at any model size.
The frontier answers "if I shift mixture weight from task A to task B at
size N, what do I gain and what do I lose?"
"""

from pathlib import Path

import numpy as np

from mixlaw import (
    FitConfig,
    FractionFit,
    GroundTruth,
    TaskId,
    TaskTruth,
    WeightVector,
    analyze,
    capacity_report,
    generate_dataset,
    predict_frontier,
)
from mixlaw.reports import frontier_rows, write_frontier_csv, write_plot_json

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

# Ground truth with a synergistic first task (f above the identity line).
truth = GroundTruth(
    tasks={
        "de-en": TaskTruth(alpha=0.3, l_inf=1.0, beta1=100.0,
                           fraction=FractionFit(task=TaskId("de-en"), form="flexible",
                                                c1=0.6, c2=0.8, c3=1.2)),
        "zh-en": TaskTruth(alpha=0.32, l_inf=1.2, beta1=120.0,
                           fraction=FractionFit(task=TaskId("zh-en"), form="flexible",
                                                c1=0.5, c2=0.9, c3=1.1)),
    },
)
grid = (0.0, 0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 1.0)
records = generate_dataset(
    truth, np.geomspace(2e7, 1e9, 8),
    [WeightVector.pair("de-en", "zh-en", p) for p in grid],
)

bundle = analyze(records, ["de-en", "zh-en"], "in_domain", "cross_entropy",
                 config=FitConfig(seed=0), bootstrap_replicates=0)

# Effective capacity at a reference size: the f/p column is the memory
# argument for multilingual models at small weights.
report = capacity_report(bundle, 1e9)
print("effective capacity at N=1e9:")
print(f"  {'task':<8} {'p':>6} {'f':>8} {'gain':>7}")
for row in report.rows:
    if row.p in (0.05, 0.5, 1.0):
        print(f"  {row.task:<8} {row.p:>6g} {row.fraction:>8.3f} {row.relative_gain:>6.2f}x")

# The frontier at three sizes spanning 10x.
for n in (1e8, 3.2e8, 1e9):
    curve = predict_frontier(bundle, n)
    first, second = curve.task_pair
    mid = len(curve.weights) // 2
    print(f"\nfrontier at N={n:.1e} (balanced point p=0.5):"
          f" {first}={curve.values[first][mid]:.3f}"
          f" {second}={curve.values[second][mid]:.3f}")

# Persist plot-ready data for external tooling.
curve = predict_frontier(bundle, 1e9)
write_frontier_csv(curve, OUT / "frontier_1e9.csv")
write_plot_json(frontier_rows(curve), OUT / "frontier_1e9.json")
print(f"\nwrote {OUT / 'frontier_1e9.csv'} and .json")
