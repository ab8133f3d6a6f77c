"""Run the whole grid: extract, build the 22 case tables, evaluate every model, summarize.

Example::

    python scripts/make_synthetic_dataset.py /tmp/synth
    python scripts/run_all_cases.py /tmp/synth /tmp/run --jobs 4
"""
import argparse
import os
import sys
from pathlib import Path

from limbeeg.cases import CASE_IDS
from limbeeg.classifiers import MODEL_NAMES
from limbeeg.cli import main as cli


def run(argv):
    code = cli([str(a) for a in argv])
    if code:
        sys.exit(code)


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawTextHelpFormatter)
    p.add_argument("dataset_root")
    p.add_argument("out_dir")
    p.add_argument("--models", nargs="+", default=list(MODEL_NAMES), choices=MODEL_NAMES)
    p.add_argument("--cases", nargs="+", type=int, default=list(CASE_IDS))
    p.add_argument("--modalities", nargs="+", default=["motor", "imagery"])
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--filename-pattern")
    args = p.parse_args()

    out = Path(args.out_dir)
    quiet = ["--log-level", "warning"]
    features = out / "features.csv"
    extract = ["extract", "--dataset-root", args.dataset_root, "--out", features,
               "--jobs", args.jobs, *quiet]
    if args.filename_pattern:
        extract += ["--filename-pattern", args.filename_pattern]
    run(extract)
    run(["build-cases", "--features", features, "--out-dir", out / "cases", *quiet])

    reports = []
    for modality in args.modalities:
        for case_id in args.cases:
            case = out / "cases" / f"case{case_id:02d}_{modality}.csv"
            for model in args.models:
                report = out / "reports" / f"{case.stem}.{model}.json"
                run(["train-eval", "--case", case, "--model", model, "--folds", args.folds,
                     "--seed", args.seed, "--out", report, *quiet])
                reports.append(report)
    run(["report", "--reports", *reports, "--out-csv", out / "summary.csv",
         "--out-txt", out / "summary.txt", *quiet])
    print((out / "summary.txt").read_text(), end="")


if __name__ == "__main__":
    main()
