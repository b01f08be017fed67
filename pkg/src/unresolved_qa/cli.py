"""Command-line front end.

    unresolved-qa synth     --workdir W [--n-questions N] [--seed S]
    unresolved-qa ingest    --posts P --users U --workdir W [--min-age-days D] [--min-answers A]
    unresolved-qa featurize --workdir W [--topics K] [--lda-iters I] [--seed S]
    unresolved-qa evaluate  --workdir W [--algorithm ...] [--feature-set ...] [--folds F]
    unresolved-qa predict   --workdir W [--model M] [--features CSV]
    unresolved-qa report    --workdir W

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Optional

import numpy as np

from . import ingest, report, synth
from .io import atomic_write_bytes, atomic_write_text, file_digest
from .learner import (
    ALGORITHMS,
    DISPLAY_NAMES,
    FeatureSet,
    FittedPipeline,
    LearnerError,
    assemble,
    cross_validate,
    read_feature_csv,
    write_feature_csv,
)
from .learner.features import LABEL_NAMES, CSV_COLUMNS
from .pipeline import EXTENDED_COLUMNS, LdaParams, featurize, fit_topics, model_fits_dataset
from .readability import ConfigError, load_weights
from .topics import TopicModelError, load_model, save_model
from .users import FutureDateError

LOGGER = logging.getLogger("unresolved_qa")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

DATASET_FILE = "dataset.jsonl"
LDA_FILE = "lda_model.txt"
FEATURES_FILE = "features.csv"
EXTENDED_FILE = "features_extended.csv"
REPORT_JSON = "report.json"
REPORT_TXT = "report.txt"
MODELS_DIR = "models"
PREDICTIONS_FILE = "predictions.csv"
SUMMARY_FILE = "descriptive_summary.csv"
HISTOGRAM_FILE = "descriptive_histograms.csv"
MANIFEST_FILE = "manifest.json"
DEFAULT_ANALYSIS_DATE = "2015-02-18"

DATA_ERRORS = (
    ingest.DumpParseError,
    ingest.SelectionError,
    LearnerError,
    TopicModelError,
    FutureDateError,
    ConfigError,
    OSError,
)


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    workdir: Path
    posts: Optional[Path] = None
    users: Optional[Path] = None
    analysis_date: str = DEFAULT_ANALYSIS_DATE
    min_age_days: int = 183
    min_answers: int = 10
    topics: int = 150
    lda_iters: int = 1000
    lda_alpha: Optional[float] = None
    lda_beta: float = 0.01
    alpha_mode: str = "marginal"
    seed: int = 0
    feature_set: str = "all"
    algorithm: str = "all"
    folds: int = 10
    cr_weights: Optional[Path] = None
    model: Optional[Path] = None
    features: Optional[Path] = None
    n_questions: int = 2000
    unresolved_fraction: float = 0.5
    extra: dict = field(default_factory=dict)

    def echo(self) -> dict:
        d = asdict(self)
        return {k: (str(v) if isinstance(v, Path) else v) for k, v in d.items()}

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.echo(), sort_keys=True).encode()).hexdigest()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="unresolved-qa", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--workdir", type=Path, required=True)
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("synth", help="write synthetic Posts.xml / Users.xml")
    common(p)
    p.add_argument("--n-questions", type=int, default=2000)
    p.add_argument("--unresolved-fraction", type=float, default=0.5)

    p = sub.add_parser("ingest", help="parse dumps and select the labelled dataset")
    common(p)
    p.add_argument("--posts", type=Path, required=True)
    p.add_argument("--users", type=Path, required=True)
    p.add_argument("--analysis-date", default=DEFAULT_ANALYSIS_DATE)
    p.add_argument("--min-age-days", type=int, default=183)
    p.add_argument("--min-answers", type=int, default=10)

    p = sub.add_parser("featurize", help="compute per-question metrics")
    common(p)
    p.add_argument("--topics", type=int, default=150)
    p.add_argument("--lda-iters", type=int, default=1000)
    p.add_argument("--lda-alpha", type=float, default=None)
    p.add_argument("--lda-beta", type=float, default=0.01)
    p.add_argument("--alpha-mode", choices=("marginal", "prior"), default="marginal")
    p.add_argument("--cr-weights", type=Path, default=None)

    p = sub.add_parser("evaluate", help="cross-validate the classifiers")
    common(p)
    p.add_argument("--algorithm", choices=(*ALGORITHMS, "all"), default="all")
    p.add_argument("--feature-set", choices=("full", "reduced", "all"), default="all")
    p.add_argument("--folds", type=int, default=10)

    p = sub.add_parser("predict", help="apply a saved classifier to a feature file")
    common(p)
    p.add_argument("--model", type=Path, default=None)
    p.add_argument("--algorithm", choices=tuple(ALGORITHMS), default="tree")
    p.add_argument("--feature-set", choices=("full", "reduced"), default="full")
    p.add_argument("--features", type=Path, default=None)

    p = sub.add_parser("report", help="per-class descriptive statistics")
    common(p)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {k: v for k, v in vars(args).items() if k != "verbose" and v is not None}
    if values.get("seed") is None:
        values["seed"] = 42 if args.command == "synth" else 0
    cfg = RunConfig(**values)
    for name, low in (("min_age_days", 0), ("min_answers", 1), ("topics", 1), ("lda_iters", 1), ("folds", 2)):
        if getattr(cfg, name) < low:
            raise UsageError(f"--{name.replace('_', '-')} must be >= {low}")
    try:
        ingest.parse_timestamp(cfg.analysis_date)
    except ValueError:
        raise UsageError(f"--analysis-date {cfg.analysis_date!r} is not a date") from None
    return cfg


def _record_manifest(cfg: RunConfig, inputs, outputs) -> None:
    path = cfg.workdir / MANIFEST_FILE
    manifest = json.loads(path.read_text("utf-8")) if path.exists() else {}
    manifest[cfg.command] = {
        "config": cfg.echo(),
        "config_sha256": cfg.digest(),
        "inputs": {str(p): file_digest(p) for p in inputs},
        "outputs": {str(p): file_digest(p) for p in outputs},
    }
    atomic_write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _require(path: Path, what: str) -> Path:
    if not path.is_file():
        raise DataError(f"{what} not found: {path}")
    return path


# --- commands -----------------------------------------------------------------


def cmd_synth(cfg: RunConfig) -> int:
    if cfg.n_questions < 2 * cfg.folds:
        LOGGER.warning("n_questions=%d < 2 x folds; cross-validation may fail", cfg.n_questions)
    dump = synth.generate(
        synth.SynthConfig(
            n_questions=cfg.n_questions,
            unresolved_fraction=cfg.unresolved_fraction,
            seed=cfg.seed,
            analysis_date=ingest.parse_timestamp(cfg.analysis_date),
        )
    )
    posts, users = cfg.workdir / "Posts.xml", cfg.workdir / "Users.xml"
    for path, writer, rows in ((posts, ingest.write_posts, dump.posts), (users, ingest.write_users, dump.users)):
        buf = io.BytesIO()
        writer(rows, buf)
        atomic_write_bytes(path, buf.getvalue())
    n_unres = sum(1 for v in dump.labels.values() if v == "Unresolved")
    print(f"questions: {len(dump.labels)}  unresolved: {n_unres}  resolved: {len(dump.labels) - n_unres}")
    print(f"posts: {len(dump.posts)} -> {posts}")
    print(f"users: {len(dump.users)} -> {users}")
    _record_manifest(cfg, [], [posts, users])
    return EXIT_OK


def cmd_ingest(cfg: RunConfig) -> int:
    posts_path = _require(cfg.posts, "posts dump")
    users_path = _require(cfg.users, "users dump")
    rep = ingest.IngestReport()
    with open(posts_path, "rb") as fh:
        posts, post_errors = ingest.parse_posts(fh)
    with open(users_path, "rb") as fh:
        users, user_errors = ingest.parse_users(fh)
    rep.post_row_errors = len(post_errors)
    rep.user_row_errors = len(user_errors)
    for err in (*post_errors, *user_errors)[:20]:
        LOGGER.warning("row %d (Id=%s): %s", err.index, err.row_id, err.reason)
    threads = ingest.link_threads(posts, users, rep)
    criteria = ingest.SelectionCriteria(
        analysis_date=ingest.parse_timestamp(cfg.analysis_date),
        min_age_days=cfg.min_age_days,
        min_answers=cfg.min_answers,
    )
    dataset = ingest.apply_selection(threads, criteria, rep)
    for w in rep.warnings[:20]:
        LOGGER.warning(w)
    counts = dataset.counts()
    print(f"questions: {len(threads)}")
    print(f"retained: {counts['retained']}")
    print(f"  resolved: {counts['resolved']}")
    print(f"  unresolved: {counts['unresolved']}")
    print(f"dropped (too recent): {rep.dropped_age}")
    print(f"dropped (too few answers): {rep.dropped_answers}")
    print(f"dropped (no owner): {rep.dropped_no_owner}")
    print(f"row errors: posts {rep.post_row_errors}, users {rep.user_row_errors}")
    print(f"dangling answers: {rep.dangling_answers}; missing accepted answers: {rep.missing_accepted_answers}")
    if counts["retained"] == 0:
        raise DataError("no question satisfies the selection criteria")
    out = cfg.workdir / DATASET_FILE
    atomic_write_text(out, "\n".join(ingest.dataset_lines(dataset)) + "\n")
    _record_manifest(cfg, [posts_path, users_path], [out])
    return EXIT_OK


def _load_dataset(cfg: RunConfig) -> ingest.Dataset:
    path = _require(cfg.workdir / DATASET_FILE, "dataset file (run ingest first)")
    try:
        with open(path, encoding="utf-8") as fh:
            return ingest.read_dataset(fh)
    except (ValueError, KeyError, TypeError) as exc:
        raise DataError(f"corrupt dataset file {path}: {exc}") from None


def cmd_featurize(cfg: RunConfig) -> int:
    dataset = _load_dataset(cfg)
    if not dataset.threads:
        raise DataError("dataset is empty")
    params = LdaParams(
        K=cfg.topics,
        iterations=cfg.lda_iters,
        seed=cfg.seed,
        hyper_alpha=cfg.lda_alpha,
        hyper_beta=cfg.lda_beta,
        alpha_mode=cfg.alpha_mode,
    )
    model_path = cfg.workdir / LDA_FILE
    model = None
    if model_path.exists():
        try:
            cached = load_model(model_path)
        except (TopicModelError, ValueError, KeyError, IndexError):
            cached = None
        if cached is not None and params.matches(cached) and model_fits_dataset(cached, dataset):
            LOGGER.info("reusing topic model %s", model_path)
            model = cached
    if model is None:
        model = fit_topics(dataset, params)
        save_model(model, model_path)
    weights = load_weights(cfg.cr_weights)
    records = featurize(dataset, model, params, weights)
    features = cfg.workdir / FEATURES_FILE
    extended = cfg.workdir / EXTENDED_FILE
    atomic_write_text(features, write_feature_csv(records, CSV_COLUMNS))
    atomic_write_text(extended, write_feature_csv(records, EXTENDED_COLUMNS))
    print(f"featurized {len(records)} questions -> {features}")
    inputs = [cfg.workdir / DATASET_FILE] + ([cfg.cr_weights] if cfg.cr_weights else [])
    _record_manifest(cfg, inputs, [model_path, features, extended])
    return EXIT_OK


def _load_features(path: Path, required=CSV_COLUMNS) -> list[dict]:
    _require(path, "feature file (run featurize first)")
    return read_feature_csv(path.read_text("utf-8"), required)


def format_table(reports) -> str:
    lines = [f"{'Algorithm':<22}{'Metrics':<24}{'Accuracy':>10}{'Precision':>11}{'Recall':>9}"]
    for r in reports:
        fs = FeatureSet(tuple(r.feature_names)).label

        def pct(v):
            return "n/a" if v is None else f"{100 * v:.2f}%"

        lines.append(
            f"{DISPLAY_NAMES[r.algorithm]:<22}{fs:<24}{pct(r.accuracy):>10}"
            f"{pct(r.precision):>11}{pct(r.recall):>9}"
        )
    return "\n".join(lines)


def cmd_evaluate(cfg: RunConfig) -> int:
    path = cfg.workdir / FEATURES_FILE
    records = _load_features(path)
    algorithms = list(ALGORITHMS) if cfg.algorithm == "all" else [cfg.algorithm]
    sets = list(FeatureSet) if cfg.feature_set == "all" else [FeatureSet.parse(cfg.feature_set)]
    reports, outputs = [], []
    for alg in algorithms:
        for fs in sets:
            matrix = assemble(records, fs)
            reports.append(cross_validate(alg, matrix, cfg.folds, cfg.seed))
            final = FittedPipeline.fit(alg, matrix)
            model_path = cfg.workdir / MODELS_DIR / f"{alg}_{fs.name.lower()}.json"
            atomic_write_text(model_path, final.to_json() + "\n")
            outputs.append(model_path)
    payload = {
        "positive_class": "Unresolved",
        "config": {"folds": cfg.folds, "seed": cfg.seed, "features_sha256": file_digest(path)},
        "records": [r.to_dict() for r in reports],
    }
    report_json = cfg.workdir / REPORT_JSON
    report_txt = cfg.workdir / REPORT_TXT
    table = format_table(reports)
    atomic_write_text(report_json, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    atomic_write_text(report_txt, table + "\n")
    print(table)
    _record_manifest(cfg, [path], [report_json, report_txt, *outputs])
    return EXIT_OK


def cmd_predict(cfg: RunConfig) -> int:
    model_path = cfg.model or cfg.workdir / MODELS_DIR / f"{cfg.algorithm}_{cfg.feature_set}.json"
    _require(model_path, "model file (run evaluate first)")
    try:
        pipe = FittedPipeline.from_json(model_path.read_text("utf-8"))
    except (ValueError, KeyError) as exc:
        raise DataError(f"bad model file {model_path}: {exc}") from None
    features_path = cfg.features or cfg.workdir / FEATURES_FILE
    rows = _load_features(features_path, ("question_id",))
    missing = [c for c in pipe.feature_names if rows and c not in rows[0]]
    if missing:
        raise DataError(f"feature file lacks columns {missing} required by the model")
    X = np.array(
        [[float(r[c]) if r[c] != "" else np.nan for c in pipe.feature_names] for r in rows],
        dtype=np.float64,
    ).reshape(len(rows), len(pipe.feature_names))
    labels, probs = pipe.predict(X)
    lines = ["question_id,label,probability_unresolved"]
    lines += [f"{r['question_id']},{LABEL_NAMES[int(l)]},{float(p)!r}" for r, l, p in zip(rows, labels, probs)]
    out = cfg.workdir / PREDICTIONS_FILE
    atomic_write_text(out, "\n".join(lines) + "\n")
    print("\n".join(lines))
    _record_manifest(cfg, [model_path, features_path], [out])
    return EXIT_OK


def cmd_report(cfg: RunConfig) -> int:
    path = cfg.workdir / EXTENDED_FILE
    records = _load_features(path, ("question_id", "label"))
    summary, hist = report.describe(records)
    s_path, h_path = cfg.workdir / SUMMARY_FILE, cfg.workdir / HISTOGRAM_FILE
    atomic_write_text(s_path, report.to_csv(summary))
    atomic_write_text(h_path, report.to_csv(hist))
    for row in summary:
        print(f"{row['metric']:<10}{row['class']:<12}n={row['n']:<6}mean={row['mean']:.4g}  median={row['median']:.4g}")
    _record_manifest(cfg, [path], [s_path, h_path])
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "featurize": cmd_featurize,
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = config_from_args(args)
        cfg.workdir.mkdir(parents=True, exist_ok=True)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, *DATA_ERRORS) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:
        LOGGER.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
