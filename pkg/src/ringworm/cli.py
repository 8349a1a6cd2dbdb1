"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data/parse error, 3 training failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .classifiers import (
    ClassifierSpec,
    Kernel,
    MlpTrainConfig,
    TrainingError,
    majority_vote,
    model_from_dict,
)
from .eval import Dataset, EvalReport, run_cv, run_holdout, train_test_split
from .features import (
    FeatureVector,
    RegionGrid,
    ScalerModel,
    extract_features,
    features_to_csv_text,
    read_feature_csv,
    scaler_fit,
)
from .imageio import PgmError, read_pgm, resize
from .lbp import BILINEAR, GRID_SNAP, LbpParams
from .synth import SynthConfig, write_corpus

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_TRAINING = 0, 1, 2, 3
MODEL_FORMAT = "ringworm-model/1"


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------------ helpers


def _add_lbp_flags(p):
    p.add_argument("--P", type=int, default=8, help="circle sample count (default 8)")
    p.add_argument("--R", type=float, default=1.0, help="circle radius in pixels (default 1)")
    p.add_argument("--sampling", choices=(GRID_SNAP, BILINEAR), default=GRID_SNAP)
    p.add_argument("--grid", default="4x4", help="region grid, rows x cols (default 4x4)")
    p.add_argument("--size", type=int, default=None,
                   help="resize every image to SIZE x SIZE before extraction")


def _add_classifier_flags(p):
    p.add_argument("--kernel", choices=("rbf", "poly", "polynomial", "linear"), default="rbf")
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--hidden", type=int, default=20)
    p.add_argument("--eta", type=float, default=0.8)
    p.add_argument("--alpha", type=float, default=0.7)
    p.add_argument("--epochs", type=int, default=2000)
    p.add_argument("--target-mse", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)


def _lbp_params(args) -> tuple[LbpParams, RegionGrid]:
    try:
        return LbpParams(args.P, args.R, args.sampling), RegionGrid.parse(args.grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _spec(args, kind: str) -> ClassifierSpec:
    try:
        return ClassifierSpec(
            kind,
            mlp=MlpTrainConfig(args.eta, args.alpha, args.hidden, args.epochs,
                               args.target_mse, args.seed),
            kernel=Kernel(args.kernel, args.gamma, args.degree),
            C=args.C,
            tol=args.tol,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load_dataset(path) -> Dataset:
    try:
        with open(path, newline="") as fh:
            vectors = read_feature_csv(fh)
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from None
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
    if not vectors:
        raise DataError(f"{path}: no feature rows")
    if any(v.label is None for v in vectors):
        raise DataError(f"{path}: every row needs a 0/1 label")
    return Dataset.from_vectors(vectors)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _read_manifest(path: Path) -> list[tuple[Path, int]]:
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from None
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        name, sep, label = line.rpartition(",")
        if not sep or label.strip() not in ("0", "1"):
            raise DataError(f"{path}:{lineno}: expected 'path,label' with label 0 or 1")
        img_path = Path(name.strip())
        if not img_path.is_absolute():
            img_path = path.parent / img_path
        rows.append((img_path, int(label)))
    return rows


def _image_features(path: Path, params: LbpParams, grid: RegionGrid,
                    size: Optional[int], label: Optional[int] = None) -> FeatureVector:
    image = read_pgm(path)
    if size is not None:
        image = resize(image, size, size)
    return extract_features(image, params, grid, label)


# ----------------------------------------------------------------- commands


def cmd_synth(args) -> int:
    try:
        cfg = SynthConfig(
            positives=args.positives, negatives=args.negatives, size=args.size,
            contrast=args.contrast, noise=args.noise, seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    manifest = write_corpus(cfg, args.out)
    print(f"wrote {cfg.positives + cfg.negatives} images and {manifest}")
    return EXIT_OK


def cmd_extract(args) -> int:
    params, grid = _lbp_params(args)
    rows = _read_manifest(Path(args.manifest))
    if not rows:
        print("error: empty manifest", file=sys.stderr)
        _write(args.out, "")
        return EXIT_DATA
    vectors, failures = [], []
    for path, label in rows:
        try:
            vectors.append(_image_features(path, params, grid, args.size, label))
        except (OSError, PgmError, ValueError) as exc:
            failures.append(f"{path}: {exc}")
    for msg in failures:
        print(f"error: {msg}", file=sys.stderr)
    _write(args.out, features_to_csv_text(vectors, header=args.header))
    return EXIT_DATA if failures else EXIT_OK


def cmd_split(args) -> int:
    data = _load_dataset(args.features)
    try:
        train, test = train_test_split(data, args.fraction, args.seed)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    _write(args.train_out, features_to_csv_text(train.to_vectors()))
    _write(args.test_out, features_to_csv_text(test.to_vectors()))
    return EXIT_OK


def cmd_train(args) -> int:
    params, grid = _lbp_params(args)
    spec = _spec(args, args.model)
    data = _load_dataset(args.features)
    scaler = scaler_fit(data.X)
    model = spec.train(scaler.transform(data.X), data.y, args.seed)
    doc = {
        "format": MODEL_FORMAT,
        "model": model.to_dict(),
        "scaler": scaler.to_dict(),
        "features": {
            "P": params.P, "R": params.R, "sampling": params.sampling,
            "variant": params.variant, "grid": str(grid), "size": args.size,
        },
        "training": {**spec.to_dict(), "seed": args.seed, "samples": len(data)},
    }
    _write(args.out, _dump_json(doc))
    return EXIT_OK


def _load_model(path: str):
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not a model file ({exc})") from None
    if doc.get("format") != MODEL_FORMAT:
        raise DataError(f"{path}: not a model file")
    return model_from_dict(doc["model"]), ScalerModel.from_dict(doc["scaler"]), doc["features"]


def cmd_predict(args) -> int:
    if len(args.model) not in (1, 3):
        raise UsageError(f"give one model or exactly three; majority voting needs exactly 3 (got {len(args.model)})")
    if (args.image is None) == (args.features is None):
        raise UsageError("give exactly one of --image or --features")
    votes = []
    for path in args.model:
        model, scaler, fconf = _load_model(path)
        if args.image is not None:
            params = LbpParams(fconf["P"], fconf["R"], fconf["sampling"], fconf["variant"])
            try:
                x = _image_features(Path(args.image), params, RegionGrid.parse(fconf["grid"]),
                                    fconf.get("size")).values
            except OSError as exc:
                raise DataError(f"{args.image}: {exc.strerror}") from None
            except (PgmError, ValueError) as exc:
                raise DataError(f"{args.image}: {exc}") from None
        else:
            try:
                x = np.array([float(t) for t in args.features.split(",")])
            except ValueError as exc:
                raise DataError(f"--features: {exc}") from None
        try:
            votes.append(int(model.predict(scaler.transform(x))[0]))
        except ValueError as exc:
            raise DataError(f"{path}: {exc}") from None
    if len(votes) == 1:
        print(f"label={votes[0]}")
    else:
        print(f"votes={','.join(map(str, votes))} label={majority_vote(votes)}")
    return EXIT_OK


def _kinds(model: str) -> list[str]:
    return ["gnb", "mlp", "svm"] if model == "all" else [model]


def cmd_cv(args) -> int:
    data = _load_dataset(args.features)
    if args.folds < 2:
        raise UsageError(f"--folds must be >= 2, got {args.folds}")
    if args.folds > len(data):
        raise UsageError(f"--folds {args.folds} exceeds the {len(data)} samples")
    report = EvalReport(config={
        "command": "cv", "folds": args.folds, "seed": args.seed,
        "stratify": not args.no_stratify, "samples": len(data),
    })
    for kind in _kinds(args.model):
        spec = _spec(args, kind)
        report.config[kind] = spec.to_dict()
        report.cv[kind] = run_cv(data, args.folds, spec, args.seed, not args.no_stratify)
    sys.stdout.write(report.format_cv_table())
    if args.out:
        _write(args.out, report.to_json())
    return EXIT_OK


def cmd_eval(args) -> int:
    train = _load_dataset(args.train)
    test = _load_dataset(args.test)
    specs = [_spec(args, kind) for kind in ("gnb", "mlp", "svm")]
    report = EvalReport(config={
        "command": "eval", "seed": args.seed, "folds": args.folds,
        "stratify": not args.no_stratify, "cv_over": "all" if args.cv_all else "train",
        "train_samples": len(train), "test_samples": len(test),
        **{s.kind: s.to_dict() for s in specs},
    })
    if args.folds:
        cv_data = train
        if args.cv_all:
            cv_data = Dataset(np.vstack([train.X, test.X]), np.concatenate([train.y, test.y]))
        if not 2 <= args.folds <= len(cv_data):
            raise UsageError(f"--folds must lie in [2, {len(cv_data)}], got {args.folds}")
        for spec in specs:
            report.cv[spec.kind] = run_cv(cv_data, args.folds, spec, args.seed, not args.no_stratify)
    report.holdout = run_holdout(train, test, specs, args.seed)
    sys.stdout.write(report.format_text())
    if args.out:
        _write(args.out, report.to_json())
    return EXIT_OK


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ringworm", description="LBP-based ringworm skin classifier")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic PGM corpus and manifest")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--positives", type=int, default=70)
    p.add_argument("--negatives", type=int, default=70)
    p.add_argument("--size", type=int, default=144)
    p.add_argument("--contrast", type=float, default=70.0)
    p.add_argument("--noise", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="manifest of PGM images -> feature CSV")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--header", action="store_true", help="write a header row")
    _add_lbp_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("split", help="stratified train/test split of a feature CSV")
    p.add_argument("--features", required=True)
    p.add_argument("--fraction", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-out", required=True)
    p.add_argument("--test-out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train one classifier on a feature CSV")
    p.add_argument("--features", required=True)
    p.add_argument("--model", choices=("gnb", "mlp", "svm"), required=True)
    p.add_argument("--out", required=True, help="model JSON path")
    _add_classifier_flags(p)
    _add_lbp_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify an image or feature row")
    p.add_argument("--model", action="append", required=True,
                   help="model JSON; repeat three times for majority voting")
    p.add_argument("--image")
    p.add_argument("--features", help="comma-separated feature values")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("cv", help="k-fold cross validation table for one or all classifiers")
    p.add_argument("--features", required=True)
    p.add_argument("--model", choices=("gnb", "mlp", "svm", "all"), default="all")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--no-stratify", action="store_true")
    p.add_argument("--out", help="JSON report path")
    _add_classifier_flags(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("eval", help="holdout test of all three classifiers and the vote")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--folds", type=int, default=10, help="also cross validate; 0 to skip")
    p.add_argument("--cv-all", action="store_true", help="cross validate over train+test")
    p.add_argument("--no-stratify", action="store_true")
    p.add_argument("--out", help="JSON report path")
    _add_classifier_flags(p)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TrainingError as exc:
        print(f"training failed: {exc}", file=sys.stderr)
        return EXIT_TRAINING
    except (DataError, PgmError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
