"""Small batch run over random product games, written to ./experiment_out."""
import sys

from msbgame import GenConfig, emit_report, run_experiment

count = int(sys.argv[1]) if len(sys.argv) > 1 else 200
report = run_experiment(GenConfig(n=12, seed=1, count=count))
paths = emit_report(report, "experiment_out")
print("optimal size histogram:", report.optimal_histogram.tolist())
print("stable among those    :", report.stable_histogram.tolist())
print("myopic terminal sizes :", report.myopic_histogram.tolist())
print("wrote", ", ".join(p.name for p in paths))
