"""Trained ensembles: prediction replay, JSON persistence and evaluation."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .data import BinMap, RawDataset, bin_matrix, map_labels
from .logit import class_losses, softmax
from .tree import RegressionTree

FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    pass


def recenter(F: np.ndarray) -> None:
    """Subtract each row's mean in place so that every row sums to zero."""
    K = F.shape[1]
    total = np.zeros(F.shape[0])
    for k in range(K):
        total += F[:, k]
    F -= (total / K)[:, None]


def apply_group(F: np.ndarray, outputs, base, nu: float) -> None:
    """Add one boosting iteration's tree outputs to the scores in place.

    Plain iterations carry one output per class. ABC iterations carry
    outputs for the non-base classes in increasing class order; the base
    score is then reset to minus the sum of the others.
    """
    K = F.shape[1]
    if base is None:
        for k in range(K):
            F[:, k] += nu * outputs[k]
        return
    free = [k for k in range(K) if k != base]
    total = np.zeros(F.shape[0])
    for k, out in zip(free, outputs):
        F[:, k] += nu * out
        total += F[:, k]
    F[:, base] = -total


@dataclass
class IterationGroup:
    base_class: int | None
    trees: list


@dataclass
class EnsembleModel:
    method: str
    n_classes: int
    nu: float
    J: int
    bin_map: BinMap
    classes: np.ndarray
    w: int = 0
    s: int | None = None
    g: int | None = None
    groups: list = field(default_factory=list)
    # in-memory only
    records: list = field(default_factory=list, repr=False)
    train_scores: np.ndarray | None = field(default=None, repr=False)
    diagnostic: str | None = None

    @property
    def M(self) -> int:
        return len(self.groups)

    @property
    def n_features(self) -> int:
        return self.bin_map.n_features

    @property
    def base_classes(self) -> list:
        return [grp.base_class for grp in self.groups]

    @property
    def n_trees(self) -> int:
        return sum(len(grp.trees) for grp in self.groups)

    def decision_function(self, X) -> np.ndarray:
        return self.scores_binned(bin_matrix(X, self.bin_map))

    def scores_binned(self, codes: np.ndarray) -> np.ndarray:
        F = np.zeros((codes.shape[0], self.n_classes))
        prev_plain = False
        for grp in self.groups:
            if grp.base_class is not None and prev_plain:
                recenter(F)
            prev_plain = grp.base_class is None
            apply_group(F, [t.predict_binned(codes) for t in grp.trees], grp.base_class, self.nu)
        return F

    def predict_proba(self, X) -> np.ndarray:
        return softmax(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.decision_function(X), axis=1)

    def to_dict(self) -> dict:
        return {
            "version": FORMAT_VERSION,
            "method": self.method,
            "K": int(self.n_classes),
            "nu": float(self.nu),
            "J": int(self.J),
            "M": self.M,
            "w": int(self.w),
            "s": self.s,
            "g": self.g,
            "classes": [float(c) for c in self.classes],
            "bin_map": self.bin_map.to_dict(),
            "iterations": [
                {"base_class": grp.base_class, "trees": [t.to_dict() for t in grp.trees]}
                for grp in self.groups
            ],
        }

    @classmethod
    def from_dict(cls, d) -> "EnsembleModel":
        if not isinstance(d, dict) or "version" not in d:
            raise ModelFormatError("not a model file: missing version field")
        if d["version"] != FORMAT_VERSION:
            raise ModelFormatError(f"unsupported model version {d['version']!r}")
        try:
            model = cls(
                method=d["method"], n_classes=int(d["K"]), nu=float(d["nu"]), J=int(d["J"]),
                bin_map=BinMap.from_dict(d["bin_map"]), classes=np.array(d["classes"], dtype=float),
                w=int(d.get("w", 0)), s=d.get("s"), g=d.get("g"),
            )
            for it in d["iterations"]:
                trees = [RegressionTree.from_dict(t) for t in it["trees"]]
                model.groups.append(IterationGroup(it["base_class"], trees))
        except (KeyError, TypeError) as exc:
            raise ModelFormatError(f"malformed model file: {exc}") from exc
        for grp in model.groups:
            want = model.n_classes if grp.base_class is None else model.n_classes - 1
            if len(grp.trees) != want:
                raise ModelFormatError(f"iteration has {len(grp.trees)} trees, expected {want}")
        if int(d["M"]) != model.M:
            raise ModelFormatError(f"M={d['M']} but {model.M} iterations stored")
        return model


def save_model(model: EnsembleModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(model.to_dict(), fh)


def load_model(path) -> EnsembleModel:
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: {exc}") from exc
    return EnsembleModel.from_dict(d)


def predict(model: EnsembleModel, X):
    """Scores, probabilities and labels (class indices) for raw feature rows."""
    F = model.decision_function(X)
    return F, softmax(F), np.argmax(F, axis=1)


@dataclass
class EvalReport:
    n_test: int
    errors: int
    error_rate: float
    logloss: float
    confusion: np.ndarray

    def summary(self) -> str:
        return f"errors={self.errors} rate={self.error_rate:.6g} logloss={self.logloss:.6g}"


def evaluate(model: EnsembleModel, X, labels=None) -> EvalReport:
    """Misclassification count and log-loss of ``model`` on labeled data.

    ``X`` may be a :class:`RawDataset` (whose labels are taken as class
    indices) or a feature matrix paired with class indices ``labels``.
    """
    if isinstance(X, RawDataset):
        X, labels = X.features, X.labels
    labels = np.asarray(labels, dtype=np.int64)
    F, p, pred = predict(model, X)
    K = model.n_classes
    confusion = np.zeros((K, K), dtype=np.int64)
    np.add.at(confusion, (labels, pred), 1)
    n = len(labels)
    errors = int(np.sum(pred != labels))
    return EvalReport(n, errors, errors / n if n else 0.0, class_losses(p, labels).total, confusion)


def relabel(model: EnsembleModel, raw_labels) -> np.ndarray:
    """Class indices of original label values under the model's class list."""
    return map_labels(raw_labels, model.classes)
