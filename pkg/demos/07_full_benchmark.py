"""End-to-end benchmark: simulate the query/retrain/evaluate stream and read reports.

A compact configuration (5 strategies, 3 bootstraps) keeps this demo under
a minute. The CLI equivalent is:

    galstream run --config configs/example.ini
"""

import csv
import tempfile
from pathlib import Path

from galstream import ExperimentConfig, SyntheticConfig, emit_reports, run_experiment

config = ExperimentConfig(
    synthetic=SyntheticConfig(node_count=30, days=20),
    strategies=("no_al", "random", "uncertainty_entropy", "density", "age"),
    initial_days=4,
    queries_per_day=3,
    bootstraps=3,
    epochs=100,
    output_dir=tempfile.mkdtemp(prefix="galstream_demo_"),
)

result = run_experiment(config)
print(f"simulated {len(config.strategies)} strategies x {config.bootstraps} bootstraps")
print(f"metric records: {len(result.records)}, failures: {len(result.failures)}")

print("\nmean CPI of accuracy per strategy and node category:")
print(f"{'strategy':24s} {'holdout':>8} {'unqueried':>10} {'next-day':>9} {'train+1':>8}")
categories = ("test_set_same_day", "unqueried_same_day", "unqueried_next_day", "train_next_day")
for strategy in config.strategies:
    cells = []
    for category in categories:
        entry = result.aggregate.get((strategy, category, "cpi_accuracy"))
        cells.append(f"{entry[0]:.3f}" if entry else "  N/A")
    print(f"{strategy:24s} {cells[0]:>8} {cells[1]:>10} {cells[2]:>9} {cells[3]:>8}")

paths = emit_reports(result, config)
print(f"\nreports written to {config.output_dir}:")
for name in sorted(paths):
    print(f"  {name}")

with open(paths["tradeoff.csv"]) as fh:
    print("\nperformance/burden tradeoff (CPI vs over-exertion at the reference gap):")
    for row in csv.DictReader(fh):
        print(f"  {row['strategy']:24s} cpi={row['mean_cpi'][:6]:6s} exertion={row['mean_over_exertion'][:6]}")
