"""Holdout and k-fold evaluation protocol with plain-text and JSON reports."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .classifiers import ClassifierSpec, majority_vote
from .features import NEGATIVE, POSITIVE, FeatureVector, scaler_fit


class SplitError(ValueError):
    pass


@dataclass(eq=False)
class Dataset:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=np.float64))
        self.y = np.asarray(self.y, dtype=np.int64).ravel()
        if self.y.size == 0:
            raise ValueError("dataset is empty")
        if self.X.shape[0] != self.y.size:
            raise ValueError(f"{self.X.shape[0]} rows but {self.y.size} labels")
        if not np.isin(self.y, (NEGATIVE, POSITIVE)).all():
            raise ValueError("labels must be 0 or 1")

    @classmethod
    def from_vectors(cls, vectors: Sequence[FeatureVector]) -> "Dataset":
        vectors = list(vectors)
        if not vectors:
            raise ValueError("dataset is empty")
        return cls(np.vstack([v.values for v in vectors]), [v.label for v in vectors])

    def to_vectors(self) -> list[FeatureVector]:
        return [FeatureVector(x, int(label)) for x, label in zip(self.X, self.y)]

    def __len__(self):
        return self.y.size

    @property
    def class_counts(self) -> dict[int, int]:
        return {label: int(np.sum(self.y == label)) for label in (NEGATIVE, POSITIVE)}

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.intp)
        return Dataset(self.X[idx], self.y[idx])


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def train_test_split(data: Dataset, fraction: float = 0.5, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Stratified split: each class sends round(fraction * count) samples to train.

    Both halves keep the original sample order.
    """
    if not 0 < fraction < 1:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for label in (NEGATIVE, POSITIVE):
        members = np.flatnonzero(data.y == label)
        n_train = _round_half_up(fraction * members.size)
        if members.size and (n_train == 0 or n_train == members.size):
            raise SplitError(
                f"class {label} with {members.size} samples cannot be split at {fraction}"
            )
        members = rng.permutation(members)
        train_idx.extend(members[:n_train])
        test_idx.extend(members[n_train:])
    return data.subset(np.sort(train_idx)), data.subset(np.sort(test_idx))


@dataclass(eq=False)
class FoldSplit:
    k: int
    assignments: np.ndarray

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def sizes(self) -> list[int]:
        return np.bincount(self.assignments, minlength=self.k).tolist()


def stratified_kfold(data: Dataset, k: int, seed: int = 0, stratify: bool = True) -> FoldSplit:
    """Assign samples to ``k`` folds by dealing them out round-robin.

    With ``stratify`` each class is shuffled separately and the classes are
    dealt one after another, so per-class and overall fold sizes both differ
    by at most one.
    """
    n = len(data)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if k > n:
        raise ValueError(f"k={k} exceeds the {n} available samples")
    rng = np.random.default_rng(seed)
    if stratify:
        order = np.concatenate(
            [rng.permutation(np.flatnonzero(data.y == label)) for label in (NEGATIVE, POSITIVE)]
        )
    else:
        order = rng.permutation(n)
    assignments = np.empty(n, dtype=np.int64)
    assignments[order] = np.arange(n) % k
    return FoldSplit(k, assignments)


def accuracy(predictions, truth) -> float:
    predictions, truth = np.asarray(predictions), np.asarray(truth)
    if predictions.size == 0 or predictions.shape != truth.shape:
        raise ValueError("accuracy needs equal-length, non-empty label sequences")
    return 100.0 * float(np.sum(predictions == truth)) / truth.size


def _fit_predict(spec, train: Dataset, test_X: np.ndarray, seed: int):
    scaler = scaler_fit(train.X)
    model = spec.train(scaler.transform(train.X), train.y, seed)
    return model, np.asarray(model.predict(scaler.transform(test_X)))


@dataclass
class CvResult:
    name: str
    fold_accuracies: list[float]
    fold_seeds: list[int]
    fold_sizes: list[int]
    models: Optional[list] = field(default=None, repr=False)

    @property
    def mean(self) -> float:
        return float(np.mean(self.fold_accuracies))

    @property
    def std(self) -> float:
        return float(np.std(self.fold_accuracies))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "fold_accuracies": self.fold_accuracies,
            "fold_seeds": self.fold_seeds,
            "fold_sizes": self.fold_sizes,
            "mean": self.mean,
            "std": self.std,
        }


def run_cv(
    data: Dataset,
    k: int,
    spec,
    seed: int = 0,
    stratify: bool = True,
    keep_models: bool = False,
) -> CvResult:
    """k-fold cross validation of one classifier.

    ``spec`` needs a ``train(X, y, seed)`` method returning a model with
    ``predict(X)``; :class:`ClassifierSpec` is the usual choice. The scaler
    is refit on each training portion. Fold ``f`` trains with seed
    ``seed + f``. The deviation is the population (divide-by-k) form.
    """
    split = stratified_kfold(data, k, seed, stratify)
    accs, seeds, models = [], [], []
    for fold in range(k):
        test = data.subset(split.test_indices(fold))
        model, pred = _fit_predict(spec, data.subset(split.train_indices(fold)), test.X, seed + fold)
        accs.append(accuracy(pred, test.y))
        seeds.append(seed + fold)
        if keep_models:
            models.append(model)
    name = getattr(spec, "name", type(spec).__name__)
    return CvResult(name, accs, seeds, split.sizes(), models if keep_models else None)


def _agreement_keys(names: Sequence[str]) -> list[str]:
    keys = []
    for r in range(len(names), -1, -1):
        for combo in itertools.combinations(names, r):
            keys.append("+".join(combo) if combo else "none")
    return keys


@dataclass
class HoldoutResult:
    names: list[str]
    accuracies: dict[str, float]
    ensemble_accuracy: float
    agreement: dict[str, int]
    confusion: dict[str, dict[str, int]]
    predictions: dict[str, list[int]]
    truth: list[int]

    def to_dict(self) -> dict:
        return {
            "classifiers": self.names,
            "accuracies": self.accuracies,
            "majority_vote": self.ensemble_accuracy,
            "agreement": self.agreement,
            "confusion": self.confusion,
            "predictions": self.predictions,
            "truth": self.truth,
        }


def _confusion(pred: np.ndarray, truth: np.ndarray) -> dict[str, int]:
    return {
        "tp": int(np.sum((pred == POSITIVE) & (truth == POSITIVE))),
        "fn": int(np.sum((pred == NEGATIVE) & (truth == POSITIVE))),
        "fp": int(np.sum((pred == POSITIVE) & (truth == NEGATIVE))),
        "tn": int(np.sum((pred == NEGATIVE) & (truth == NEGATIVE))),
    }


def holdout_from_predictions(names: Sequence[str], predictions: Sequence, truth) -> HoldoutResult:
    """Score three classifiers and their majority vote on one test set.

    ``agreement`` counts, for every subset of the classifiers, the test
    samples that exactly that subset classified correctly.
    """
    names = list(names)
    truth = np.asarray(truth)
    preds = [np.asarray(p) for p in predictions]
    votes = np.array([majority_vote(v) for v in zip(*preds)])
    correct = [p == truth for p in preds]
    agreement = dict.fromkeys(_agreement_keys(names), 0)
    for n in range(truth.size):
        hit = [name for name, c in zip(names, correct) if c[n]]
        agreement["+".join(hit) if hit else "none"] += 1
    confusion = {name: _confusion(p, truth) for name, p in zip(names, preds)}
    confusion["majority_vote"] = _confusion(votes, truth)
    return HoldoutResult(
        names,
        {name: accuracy(p, truth) for name, p in zip(names, preds)},
        accuracy(votes, truth),
        agreement,
        confusion,
        {**{name: p.tolist() for name, p in zip(names, preds)}, "majority_vote": votes.tolist()},
        truth.tolist(),
    )


def run_holdout(train: Dataset, test: Dataset, specs: Sequence, seed: int = 0) -> HoldoutResult:
    """Train each of the three specs on ``train`` (one shared scaler) and vote."""
    if len(specs) != 3:
        raise ValueError("holdout evaluation needs exactly three classifiers")
    scaler = scaler_fit(train.X)
    Xtr, Xte = scaler.transform(train.X), scaler.transform(test.X)
    preds = [np.asarray(s.train(Xtr, train.y, seed).predict(Xte)) for s in specs]
    return holdout_from_predictions([getattr(s, "name", str(s)) for s in specs], preds, test.y)


@dataclass
class EvalReport:
    """Cross-validation and/or holdout results plus the run configuration."""

    cv: dict[str, CvResult] = field(default_factory=dict)
    holdout: Optional[HoldoutResult] = None
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "cv": {name: r.to_dict() for name, r in self.cv.items()},
            "holdout": None if self.holdout is None else self.holdout.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def format_cv_table(self) -> str:
        names = list(self.cv)
        k = len(next(iter(self.cv.values())).fold_accuracies) if names else 0
        rows = [["Classifier CV Fold", *(_display(n) for n in names)]]
        for f in range(k):
            rows.append([f"Fold {f + 1}", *(_pct(self.cv[n].fold_accuracies[f]) for n in names)])
        rows.append(["Mean", *(_pct(self.cv[n].mean) for n in names)])
        rows.append(["Standard deviation", *(f"{self.cv[n].std:.2f}" for n in names)])
        return _render(rows)

    def format_holdout_table(self) -> str:
        h = self.holdout
        rows = [
            ["", *(_display(n) for n in h.names), "Majority voting"],
            ["Success rate", *(_pct(h.accuracies[n]) for n in h.names), _pct(h.ensemble_accuracy)],
        ]
        table = _render(rows)
        agree = "\n".join(f"  {key}: {count}" for key, count in h.agreement.items())
        return f"{table}\nCorrectly classified by exactly:\n{agree}\n"

    def format_text(self) -> str:
        parts = []
        if self.cv:
            parts.append(self.format_cv_table())
        if self.holdout is not None:
            parts.append(self.format_holdout_table())
        return "\n".join(parts)


_DISPLAY = {"gnb": "Bayesian", "mlp": "MLP", "svm": "SVM"}


def _display(name: str) -> str:
    return _DISPLAY.get(name, name)


def _pct(v: float) -> str:
    return f"{v:.2f}%"


def _render(rows: list[list[str]]) -> str:
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    return "\n".join(lines) + "\n"


def default_specs(**overrides) -> list[ClassifierSpec]:
    return [ClassifierSpec(kind, **overrides) for kind in ("gnb", "mlp", "svm")]
