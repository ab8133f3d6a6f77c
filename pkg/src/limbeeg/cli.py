"""Command-line front end: extract -> build-cases -> select / train-eval -> report.

Artifacts go to files only. Logs and warnings go to stderr as one JSON object
per line. Failures end with an ``{"level": "error", ...}`` record and exit
status 2 (config), 3 (data) or 4 (numerical).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .cases import CASE_IDS, build_all_cases, read_case_csv, read_features_csv, write_case_csv, \
    write_features_csv
from .classifiers import MODEL_NAMES, ModelSpec
from .config import PipelineConfig, load_config
from .errors import ConfigInvalid, PipelineError, StageInputMissing
from .evaluation import REPORT_SCHEMA, SelectionSpec, cross_validate
from .features import FeatureConfig, extract_features, feature_config_from_dict, feature_names
from .ingest import load_trial, scan_dataset
from .selection import mrmr_select, pca_reduce
from .storage import atomic_write_text, read_json, write_json

TOOL = "limbeeg"
SELECTION_SCHEMA = "limbeeg.selection/1"
MANIFEST_SCHEMA = "limbeeg.manifest/1"
GRID_COLUMNS = ("train_accuracy", "test_accuracy", "precision", "recall", "f1")
ROMAN = ("I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X", "XI")

log = logging.getLogger(TOOL)


# ---------------------------------------------------------------- logging

class JsonLineFormatter(logging.Formatter):
    def format(self, record):
        out = {"level": record.levelname.lower(), "event": record.getMessage()}
        out.update(getattr(record, "fields", {}))
        return json.dumps(out, sort_keys=True, default=str)


def _setup_logging(level: str):
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JsonLineFormatter())
    log.handlers[:] = [handler]
    log.setLevel(level.upper())
    log.propagate = False


def _emit(event, level=logging.INFO, **fields):
    log.log(level, event, extra={"fields": fields})


def _show_warning(message, category, filename, lineno, file=None, line=None):
    _emit("warning", logging.WARNING, category=category.__name__, message=str(message))


# ---------------------------------------------------------------- helpers

def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _require(path, what) -> Path:
    p = Path(path)
    if not p.is_file():
        raise StageInputMissing(f"{what} {p} does not exist")
    return p


def _stage_hash(params: dict) -> str:
    return hashlib.sha256(json.dumps(params, sort_keys=True).encode()).hexdigest()[:16]


def _write_manifest(path, stage, params, inputs, outputs, feature_hash=""):
    """Record what produced ``outputs``: tool version, parameters and content hashes."""
    write_json(path, {
        "schema": MANIFEST_SCHEMA,
        "tool": TOOL,
        "version": __version__,
        "stage": stage,
        "config_hash": _stage_hash(params),
        "feature_config_hash": feature_hash,
        "params": params,
        "inputs": {Path(p).name: _sha256(p) for p in inputs},
        "outputs": {Path(p).name: _sha256(p) for p in outputs},
    })
    return path


def _manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def _out_path(flag, cfg: PipelineConfig, default_name) -> Path:
    return Path(flag) if flag else Path(cfg.output_dir) / default_name


def _read_case(path):
    return read_case_csv(_require(path, "case file"))


# ---------------------------------------------------------------- stages

def _extract_one(job):
    """Worker: load, normalize and featurize one trial; warnings are returned, not printed."""
    root, entry, fcfg = job
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        fv = extract_features(load_trial(root, entry), fcfg)
    return fv, [(w.category.__name__, f"{entry.path}: {w.message}") for w in caught]


def cmd_extract(args, cfg: PipelineConfig):
    cfg.validate(need_dataset=True)
    fcfg = cfg.feature_config()
    manifest = scan_dataset(cfg.dataset_root, cfg.filename_pattern, cfg.subset_per_subject)
    _emit("scan", files=len(manifest), skipped=len(manifest.skipped))
    jobs = [(cfg.dataset_root, e, fcfg) for e in manifest.entries]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_extract_one, jobs, chunksize=8))
    else:
        results = [_extract_one(j) for j in jobs]
    vectors = []
    for fv, caught in results:
        vectors.append(fv)
        for cat, msg in caught:
            _emit("warning", logging.WARNING, category=cat, message=msg)
    names = feature_names(fcfg)
    fhash = fcfg.config_hash()
    meta = {"tool": TOOL, "version": __version__, "feature_config": fcfg.as_dict(),
            "feature_config_hash": fhash, "skipped": list(manifest.skipped)}
    out = _out_path(args.out, cfg, "features.csv")
    write_features_csv(vectors, out, names, meta)
    params = {"dataset_files": [e.path for e in manifest.entries], **fcfg.as_dict(),
              "filename_pattern": cfg.filename_pattern,
              "subset_per_subject": cfg.subset_per_subject}
    _write_manifest(_manifest_path(out), "extract", params, [], [out], fhash)
    _emit("wrote", path=str(out), rows=len(vectors), columns=len(names) + 1)
    return 0


def cmd_build_cases(args, cfg: PipelineConfig):
    src = _require(args.features, "features file")
    vectors, names, meta = read_features_csv(src)
    fcfg = feature_config_from_dict(meta["feature_config"]) if "feature_config" in meta \
        else FeatureConfig()
    fhash = meta.get("feature_config_hash", fcfg.config_hash())
    case_meta = {"tool": TOOL, "version": __version__, "feature_config": fcfg.as_dict(),
                 "feature_config_hash": fhash}
    out_dir = Path(args.out_dir) if args.out_dir else Path(cfg.output_dir) / "cases"
    written = []
    for table in build_all_cases(vectors, names, case_meta):
        path = out_dir / f"{table.name}.csv"
        write_case_csv(table, path)
        written.append(path)
        _emit("wrote", path=str(path), rows=table.n_rows,
              activity=int(table.y.sum()), baseline=int((table.y == 0).sum()))
    _write_manifest(out_dir / "manifest.json", "build-cases", {"cases": list(CASE_IDS)},
                    [src], written, fhash)
    return 0


def cmd_select(args, cfg: PipelineConfig):
    cfg.validate()
    table = _read_case(args.case)
    fhash = str(table.meta.get("feature_config_hash", ""))
    params = {"method": args.method, "k": cfg.selection_k, "mi_bins": cfg.mi_bins,
              "variance_target": args.variance_target}
    doc = {"schema": SELECTION_SCHEMA, "case_id": table.case_id, "modality": table.modality,
           "rows": table.n_rows, "feature_config_hash": fhash,
           "config_hash": _stage_hash(params), "params": params}
    if args.method == "mrmr":
        res = mrmr_select(table, cfg.selection_k, cfg.mi_bins)
        doc.update(res.as_dict())
    else:
        _, n_comp, res = pca_reduce(table, args.variance_target)
        doc.update({
            "method": "pca", "n_components": n_comp,
            "explained_variance": res.explained_variance[:n_comp].tolist(),
            "explained_ratio": res.explained_ratio[:n_comp].tolist(),
            "cumulative_ratio": float(res.explained_ratio[:n_comp].sum()),
            "components": res.components.tolist(),
        })
    out = _out_path(args.out, cfg, f"{table.name}.selection.json")
    write_json(out, doc)
    _write_manifest(_manifest_path(out), "select", params, [args.case], [out], fhash)
    _emit("wrote", path=str(out), method=args.method)
    return 0


def _model_params(args) -> dict:
    raw = {"k": args.knn_k, "C": args.C, "gamma": args.gamma, "coef0": args.coef0,
           "tol": args.tol, "max_passes": args.max_passes, "max_depth": args.max_depth,
           "min_leaf": args.min_leaf}
    return {k: v for k, v in raw.items() if v is not None}


def cmd_train_eval(args, cfg: PipelineConfig):
    cfg.validate()
    table = _read_case(args.case)
    model = ModelSpec(args.model, _model_params(args))
    selection = SelectionSpec(args.selection, cfg.selection_k, cfg.mi_bins, args.global_selection)
    report = cross_validate(table, model, selection, cfg.folds, cfg.seed)
    params = {"model": model.as_dict(), "selection": selection.as_dict(),
              "folds": cfg.folds, "seed": cfg.seed}
    doc = report.as_dict()
    doc["config_hash"] = _stage_hash(params)
    doc["rows"] = table.n_rows
    out = _out_path(args.out, cfg, f"{table.name}.{args.model}.report.json")
    write_json(out, doc)
    outputs = [out]
    if args.model_out:
        cols = selection.select(table.X, table.y)
        fitted = model.build().fit(table.X[:, cols], table.y)
        write_json(args.model_out, {
            "selected": [int(c) for c in cols],
            "selected_names": [table.feature_names[c] for c in cols],
            "feature_config_hash": report.feature_config_hash,
            **fitted.to_dict(),
        })
        outputs.append(Path(args.model_out))
    _write_manifest(_manifest_path(out), "train-eval", params, [args.case], outputs,
                    report.feature_config_hash)
    _emit("wrote", path=str(out), **{k: round(v, 6) for k, v in report.summary().items()})
    return 0


def _case_label(case_id: int) -> str:
    return f"Case {ROMAN[case_id - 1]}" if 1 <= case_id <= len(ROMAN) else f"Case {case_id}"


def grid_rows(reports):
    """Table rows ordered by modality, case and model registry order."""
    model_rank = {m: i for i, m in enumerate(MODEL_NAMES)}
    mod_rank = {"motor": 0, "imagery": 1}
    rows = []
    for r in reports:
        s = r["summary"]
        rows.append({
            "case": _case_label(int(r["case_id"])), "case_id": int(r["case_id"]),
            "modality": r["modality"], "model": r["model"]["name"],
            **{c: 100.0 * s[c] for c in GRID_COLUMNS},
        })
    rows.sort(key=lambda x: (mod_rank.get(x["modality"], 9), x["case_id"],
                             model_rank.get(x["model"], 99)))
    return rows


def grid_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["case", "modality", "model", *GRID_COLUMNS])
    for r in rows:
        w.writerow([r["case"], r["modality"], r["model"], *(f"{r[c]:.2f}" for c in GRID_COLUMNS)])
    return buf.getvalue()


def grid_text(rows) -> str:
    header = ["Case", "Modality", "Model", "Train acc %", "Test acc %", "Precision %",
              "Recall %", "F1 %"]
    body = [[r["case"], r["modality"], r["model"], *(f"{r[c]:.2f}" for c in GRID_COLUMNS)]
            for r in rows]
    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]

    def line(cells):
        left = [c.ljust(w) for c, w in zip(cells[:3], widths[:3])]
        right = [c.rjust(w) for c, w in zip(cells[3:], widths[3:])]
        return "  ".join(left + right).rstrip()

    rule = "  ".join("-" * w for w in widths)
    return "\n".join([line(header), rule, *(line(b) for b in body)]) + "\n"


def cmd_report(args, cfg: PipelineConfig):
    paths = [_require(p, "report") for p in args.reports]
    if not paths:
        raise ConfigInvalid("no reports given")
    reports = []
    for p in paths:
        doc = read_json(p)
        if doc.get("schema") != REPORT_SCHEMA:
            raise ConfigInvalid(f"{p}: unsupported report schema {doc.get('schema')!r}")
        reports.append(doc)
    hashes = sorted({r.get("feature_config_hash", "") for r in reports})
    if len(hashes) > 1:
        raise ConfigInvalid(f"reports disagree on feature_config_hash: {hashes}")
    rows = grid_rows(reports)
    out_csv = _out_path(args.out_csv, cfg, "summary.csv")
    out_txt = _out_path(args.out_txt, cfg, "summary.txt")
    atomic_write_text(out_csv, grid_csv(rows))
    atomic_write_text(out_txt, grid_text(rows))
    _write_manifest(_manifest_path(out_csv), "report", {"reports": [p.name for p in paths]},
                    paths, [out_csv, out_txt], hashes[0])
    _emit("wrote", path=str(out_csv), rows=len(rows))
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file (flags override it)")
    common.add_argument("--output-dir", dest="output_dir")
    common.add_argument("--log-level", default="info",
                        choices=["debug", "info", "warning", "error"])

    p = argparse.ArgumentParser(prog=TOOL, description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("extract", parents=[common], help="trial CSVs -> features CSV")
    e.add_argument("--dataset-root", dest="dataset_root")
    e.add_argument("--subset-per-subject", dest="subset_per_subject", type=int)
    e.add_argument("--filename-pattern", dest="filename_pattern")
    e.add_argument("--welch-segment", dest="welch_segment", type=int)
    e.add_argument("--welch-overlap", dest="welch_overlap", type=float)
    e.add_argument("--fft-points", dest="fft_points", type=int)
    e.add_argument("--entropy-bins", dest="entropy_bins", type=int)
    e.add_argument("--wavelet-level", dest="wavelet_level", type=int)
    e.add_argument("--jobs", type=int)
    e.add_argument("--out")
    e.set_defaults(func=cmd_extract)

    b = sub.add_parser("build-cases", parents=[common], help="features CSV -> 22 case CSVs")
    b.add_argument("--features", required=True)
    b.add_argument("--out-dir", dest="out_dir")
    b.set_defaults(func=cmd_build_cases)

    s = sub.add_parser("select", parents=[common], help="MRMR or PCA on one case file")
    s.add_argument("--case", required=True)
    s.add_argument("--method", choices=["mrmr", "pca"], default="mrmr")
    s.add_argument("--k", dest="selection_k", type=int)
    s.add_argument("--mi-bins", dest="mi_bins", type=int)
    s.add_argument("--variance-target", dest="variance_target", type=float, default=0.95)
    s.add_argument("--out")
    s.set_defaults(func=cmd_select)

    t = sub.add_parser("train-eval", parents=[common], help="cross-validate one model on one case")
    t.add_argument("--case", required=True)
    t.add_argument("--model", choices=MODEL_NAMES, default="svm-rbf")
    t.add_argument("--folds", type=int)
    t.add_argument("--seed", type=int)
    t.add_argument("--selection", choices=["mrmr", "none"], default="mrmr")
    t.add_argument("--k", dest="selection_k", type=int, help="features kept by MRMR")
    t.add_argument("--mi-bins", dest="mi_bins", type=int)
    t.add_argument("--global-selection", dest="global_selection", action="store_true",
                   help="select features once on all rows (leaks labels; for comparison)")
    t.add_argument("--knn-k", dest="knn_k", type=int)
    t.add_argument("--C", dest="C", type=float)
    t.add_argument("--gamma", type=float)
    t.add_argument("--coef0", type=float)
    t.add_argument("--tol", type=float)
    t.add_argument("--max-passes", dest="max_passes", type=int)
    t.add_argument("--max-depth", dest="max_depth", type=int)
    t.add_argument("--min-leaf", dest="min_leaf", type=int)
    t.add_argument("--out")
    t.add_argument("--model-out", dest="model_out")
    t.set_defaults(func=cmd_train_eval)

    r = sub.add_parser("report", parents=[common], help="report JSONs -> summary grid")
    r.add_argument("--reports", nargs="+", required=True)
    r.add_argument("--out-csv", dest="out_csv")
    r.add_argument("--out-txt", dest="out_txt")
    r.set_defaults(func=cmd_report)
    return p


_CONFIG_KEYS = ("dataset_root", "output_dir", "filename_pattern", "subset_per_subject",
                "welch_segment", "welch_overlap", "fft_points", "entropy_bins", "wavelet_level",
                "mi_bins", "selection_k", "folds", "seed", "jobs")


def _error_record(exc, stage, code):
    _emit("failed", logging.ERROR, error=type(exc).__name__, message=str(exc),
          stage=stage, exit_code=code)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.log_level)
    stage = args.command
    previous = warnings.showwarning
    warnings.showwarning = _show_warning
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            warnings.showwarning = _show_warning
            overrides = {k: getattr(args, k) for k in _CONFIG_KEYS if hasattr(args, k)}
            cfg = load_config(args.config, overrides).validate()
            _emit("start", stage=stage, version=__version__)
            return args.func(args, cfg)
    except PipelineError as exc:
        return _error_record(exc, stage, exc.exit_code)
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        return _error_record(exc, stage, 4)
    except (ValueError, KeyError, OSError) as exc:
        return _error_record(exc, stage, 3)
    finally:
        warnings.showwarning = previous


if __name__ == "__main__":
    sys.exit(main())
