"""Command-line entry point: generate, metrics, fit, predict, study,
serve, export.

Exit codes: 0 success, 2 usage error (argparse), 3 configuration error,
4 data error, 5 numerical failure. Log level comes from VALMETRIC_LOG.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, DataError, NumericalError, ParseError
from .metrics import METRIC_NAMES, MetricConfig, MetricReport, full_report, grade
from .pipeline import (
    LabeledDataset,
    LabeledPair,
    compute_features,
    drop_correlated,
    split,
)
from .regress import CustomMetricModel, fit_lasso, fit_ols, predict, score
from .series import SeriesPair
from .service import RatingStore, create_app, load_pair_document
from .studies import FIGURE_SWEEPS, StudyResult, sweep
from .universe import UniverseConfig, build_dataset, load_bundle, save_bundle

logger = logging.getLogger(__name__)


def _run_manifest(command: str, args: argparse.Namespace, **extra) -> dict:
    doc = {
        "command": command,
        "argv": sys.argv[1:],
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    doc.update(extra)
    return doc


def _write_json(path: Path, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return doc


def _universe_config(args: argparse.Namespace) -> UniverseConfig:
    doc = _load_config_file(args.config)
    doc["seed"] = args.seed  # the flag always wins
    return UniverseConfig.from_json_dict(doc)


def _load_model_file(path: str | Path) -> CustomMetricModel:
    try:
        return CustomMetricModel.load(path)
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from None
    except (json.JSONDecodeError, KeyError) as exc:
        raise ParseError(f"{path}: not a model file ({exc})") from None


def _load_pair_file(path: str | Path) -> tuple[str, SeriesPair]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return load_pair_document(doc, source=str(path))


def _collect_pair_paths(inputs: list[str]) -> list[Path]:
    paths: list[Path] = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.json")))
        else:
            paths.append(p)
    if not paths:
        raise ConfigError("no pair files given")
    return paths


# -- dataset directory loading (either universe bundles or session exports) --

def load_dataset_dir(path: str | Path) -> LabeledDataset:
    root = Path(path)
    if not root.is_dir():
        raise ConfigError(f"{path}: not a directory")
    if (root / "manifest.json").exists():
        manifest = json.loads((root / "manifest.json").read_text())
        if "pairs" in manifest and manifest["pairs"] and "experiment" in manifest["pairs"][0]:
            return load_bundle(root).dataset
    if (root / "pairs").is_dir() and (root / "ratings.csv").exists():
        return _load_session_export(root)
    raise ConfigError(f"{path}: not a recognizable dataset directory")


def _load_session_export(root: Path) -> LabeledDataset:
    ratings: dict[str, list[tuple[str, float]]] = {}
    with open(root / "ratings.csv", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["pair_id", "expert_id", "rating"]:
            raise ParseError(f"{root}/ratings.csv: bad header")
        for pair_id, expert_id, rating in reader:
            ratings.setdefault(pair_id, []).append((expert_id, float(rating)))
    records = []
    for pair_path in sorted((root / "pairs").glob("*.json")):
        pid, pair = _load_pair_file(pair_path)
        if pid not in ratings:
            logger.warning("pair %s has no ratings; skipped", pid)
            continue
        records.append(
            LabeledPair(pair_id=pid, pair=pair, ratings=tuple(ratings[pid]))
        )
    if not records:
        raise DataError(f"{root}: no rated pairs")
    return LabeledDataset(records=tuple(records), provenance="collected")


# -- subcommands --------------------------------------------------------------

def _cmd_generate(args: argparse.Namespace) -> int:
    config = _universe_config(args)
    bundle = build_dataset(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_bundle(bundle, out, extra_manifest={"run": _run_manifest("generate", args)})
    print(
        f"wrote {len(bundle.dataset)} pairs / {bundle.dataset.n_ratings} ratings to {out}"
    )
    return 0


def _cmd_metrics(args: argparse.Namespace) -> int:
    config = MetricConfig()
    reports: list[tuple[str, MetricReport]] = []
    for path in _collect_pair_paths(args.pairs):
        pair_id, pair = _load_pair_file(path)
        reports.append((pair_id, full_report(pair, config)))

    doc = {
        pid: {"metrics": rep.to_json_dict(), "missing": rep.missing}
        for pid, rep in reports
    }
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "metrics.json", doc)
        with open(out / "metrics.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(MetricReport.csv_header())
            for pid, rep in reports:
                writer.writerow(rep.csv_row(pid))
        _write_json(
            out / "manifest.json",
            _run_manifest("metrics", args, inputs=args.pairs),
        )
        print(f"wrote metrics for {len(reports)} pairs to {out}")
    else:
        json.dump(doc, sys.stdout, indent=2)
        print()
    return 0


def _cmd_fit(args: argparse.Namespace) -> int:
    dataset = load_dataset_dir(args.data)
    fm = compute_features(dataset)
    fm = drop_correlated(fm, args.corr_threshold)
    train, test = split(fm, args.train_fraction, seed=args.seed)

    if args.strategy == "ols":
        model = fit_ols(train, seed=args.seed)
    else:
        lam = args.lasso_lambda
        if lam != "cv":
            lam = float(lam)
        model = fit_lasso(train, lam, seed=args.seed)
    m = score(model, test)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model.save(out / "model.json")
    _write_json(
        out / "manifest.json",
        _run_manifest(
            "fit",
            args,
            data=str(args.data),
            strategy=args.strategy,
            corr_threshold=args.corr_threshold,
            train_fraction=args.train_fraction,
            test_score=m,
            features=list(model.feature_names),
        ),
    )
    print(f"surviving features: {', '.join(model.feature_names) or '(none)'}")
    print(f"test score m = {m:.6f}")
    print(f"model written to {out / 'model.json'}")
    return 0


def _cmd_predict(args: argparse.Namespace) -> int:
    model = _load_model_file(args.model)
    pair_id, pair = _load_pair_file(args.pair)
    report = full_report(pair)
    features = {
        name: report.values[name]
        for name in model.feature_names
        if name in report.values
    }
    interval = predict(model, features, alpha=args.alpha)
    rank, label = grade(float(np.clip(interval.center, 0.0, 1.0)))
    doc = {
        "pair_id": pair_id,
        "center": interval.center,
        "lo_simple": interval.lo_simple,
        "hi_simple": interval.hi_simple,
        "lo_full": interval.lo_full,
        "hi_full": interval.hi_full,
        "alpha": interval.alpha,
        "grade_rank": rank,
        "grade_label": label,
    }
    json.dump(doc, sys.stdout, indent=2)
    print()
    return 0


def _cmd_study(args: argparse.Namespace) -> int:
    config = _universe_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    figures = args.figures or sorted(FIGURE_SWEEPS)
    results: dict[str, StudyResult] = {}
    for fig in figures:
        if fig not in FIGURE_SWEEPS:
            raise ConfigError(f"unknown figure {fig!r}; choose from {sorted(FIGURE_SWEEPS)}")
        parameter, values = FIGURE_SWEEPS[fig]
        result = sweep(
            parameter, values, config, repeats=args.repeats, seed=args.seed
        )
        result.save_csv(out / f"{fig}.csv")
        result.save_json(out / f"{fig}.json")
        results[fig] = result
        means = ", ".join(f"{v:g}:{m:.3f}" for v, m in zip(result.values, result.means))
        print(f"{fig} ({parameter}): {means}")

    _write_json(
        out / "manifest.json",
        _run_manifest(
            "study",
            args,
            config=config.to_json_dict(),
            repeats=args.repeats,
            figures=list(figures),
        ),
    )
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    store = RatingStore(args.store)
    ui_dir = args.ui if args.ui and Path(args.ui).is_dir() else None
    if args.ui and ui_dir is None:
        logger.warning("UI directory %s not found; serving API only", args.ui)
    app = create_app(store, ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _cmd_export(args: argparse.Namespace) -> int:
    store = RatingStore(args.store)
    dataset = store.export_labels(args.session)
    out = Path(args.out)
    (out / "pairs").mkdir(parents=True, exist_ok=True)
    for rec in dataset.records:
        with open(out / "pairs" / f"{rec.pair_id}.json", "w") as fh:
            json.dump(
                {
                    "pair_id": rec.pair_id,
                    "t": [float(v) for v in rec.pair.t],
                    "measurement": [float(v) for v in rec.pair.y.v],
                    "simulation": [float(v) for v in rec.pair.x.v],
                },
                fh,
            )
            fh.write("\n")
    with open(out / "ratings.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pair_id", "expert_id", "rating"])
        for rec in dataset.records:
            for expert_id, rating in rec.ratings:
                writer.writerow([rec.pair_id, expert_id, repr(float(rating))])
    _write_json(
        out / "manifest.json",
        _run_manifest(
            "export",
            args,
            provenance="collected",
            session=args.session,
            n_pairs=len(dataset),
            n_ratings=dataset.n_ratings,
        ),
    )
    print(f"exported {len(dataset)} pairs / {dataset.n_ratings} ratings to {out}")
    return 0


# -- argument parsing ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="valmetric",
        description="Time-series validation workbench: metrics, expert "
        "ratings, and fitted custom quality models.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a manufactured-universe dataset")
    p.add_argument("--config", help="JSON file with universe config overrides")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output dataset directory")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("metrics", help="metric reports for pair files")
    p.add_argument("pairs", nargs="+", help="pair JSON files or directories")
    p.add_argument("--out", help="output directory (default: stdout)")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("fit", help="fit a custom metric on a dataset directory")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory for model.json")
    p.add_argument("--strategy", choices=("ols", "lasso"), default="ols")
    p.add_argument(
        "--lasso-lambda",
        default="cv",
        help="penalty for --strategy lasso: a number or 'cv' (default)",
    )
    p.add_argument("--corr-threshold", type=float, default=0.9)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("predict", help="predict a rating for one pair file")
    p.add_argument("--model", required=True, help="model.json from fit")
    p.add_argument("--pair", required=True, help="pair JSON file")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("study", help="hyperparameter sweeps (figure CSVs)")
    p.add_argument("--config", help="JSON file with universe config overrides")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--repeats", type=int, default=50)
    p.add_argument(
        "--figures",
        nargs="+",
        metavar="FIG",
        help="subset of fig7..fig11 (default: all)",
    )
    p.set_defaults(func=_cmd_study)

    p = sub.add_parser("serve", help="run the rating service")
    p.add_argument("--store", required=True, help="session store directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui", help="directory with built UI assets")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("export", help="export a rating session as a dataset")
    p.add_argument("--store", required=True)
    p.add_argument("--session", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("VALMETRIC_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 4
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
