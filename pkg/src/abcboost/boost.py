"""Boosting loops for MART, Robust LogitBoost and the ABC family.

ABC iterations pick a base class ``b`` whose score is pinned by the
sum-to-zero constraint and fit trees only for the other ``K - 1`` classes.
Which bases get tried is controlled by three knobs:

* ``s`` -- on a search iteration, try the ``s`` classes with the largest
  per-class training loss and keep the one giving the lowest total loss.
  ``s = K`` is the exhaustive search, ``s = 1`` the worst-class rule.
* ``g`` -- search only every ``g + 1`` iterations and reuse the previous base
  in between.
* ``w`` -- run ``w`` plain (non-ABC) warm-up iterations first.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import BinMap, RawDataset, apply_bins, fit_bins
from .logit import class_losses, softmax
from .model import EnsembleModel, IterationGroup, apply_group, recenter
from .tree import DAMPING, SplitCriterion, grow_tree

logger = logging.getLogger(__name__)

PLAIN_METHODS = ("mart", "robustlogit")
ABC_METHODS = ("abcmart", "abcrobustlogit")
METHODS = PLAIN_METHODS + ABC_METHODS


class ConfigError(ValueError):
    pass


@dataclass
class BoostConfig:
    method: str = "abcrobustlogit"
    J: int = 20
    nu: float = 0.1
    M: int = 100
    s: int = 2
    g: int = 10
    w: int = 0
    max_bins: int = 256
    # training is deterministic; kept so runs are fully described by the config
    seed: int = 0
    eps: float = DAMPING

    def validate(self, n_classes: int | None = None) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.J < 2:
            raise ConfigError("J must be at least 2")
        if not 0 < self.nu <= 1:
            raise ConfigError("nu must lie in (0, 1]")
        if self.M < 0:
            raise ConfigError("M must be nonnegative")
        if self.s < 1 or self.g < 0 or self.w < 0:
            raise ConfigError("need s >= 1, g >= 0, w >= 0")
        if self.w > 0 and self.w >= self.M:
            raise ConfigError(f"warm-up w={self.w} must be smaller than M={self.M}")
        if self.max_bins < 2:
            raise ConfigError("max_bins must be at least 2")
        if n_classes is not None:
            if n_classes < 2:
                raise ConfigError(f"need at least 2 classes, found {n_classes}")
            if self.method in ABC_METHODS:
                if n_classes < 3:
                    raise ConfigError(
                        f"{self.method} needs K >= 3 classes (found {n_classes}); "
                        "use mart or robustlogit for binary problems"
                    )
                if self.s > n_classes:
                    raise ConfigError(f"s={self.s} exceeds the number of classes K={n_classes}")

    @property
    def warmup_method(self) -> str:
        return {"abcmart": "mart", "abcrobustlogit": "robustlogit"}.get(self.method, self.method)


@dataclass
class IterationRecord:
    m: int
    base_class: int | None
    candidates: tuple
    candidate_losses: dict
    train_loss: float
    trees_trained: int
    searched: bool = False
    test_errors: int | None = None
    scores: np.ndarray | None = field(default=None, repr=False)


@dataclass
class SelectorState:
    """Per-class losses from the last committed iteration and the last base."""

    prev_losses: np.ndarray
    last_base: int | None = None
    m: int = 0

    @classmethod
    def initial(cls, class_counts) -> "SelectorState":
        return cls(np.asarray(class_counts, dtype=np.float64).copy())


def is_search_iteration(m: int, g: int, w: int) -> bool:
    return m > w and (m - w - 1) % (g + 1) == 0


def select_candidates(state: SelectorState, config: BoostConfig, m: int) -> list:
    """Base classes to try at iteration ``m`` (1-based).

    Warm-up iterations get an empty list. Search iterations get the ``s``
    classes with the largest previous loss, ties to the smaller class id.
    Other iterations reuse the previous base class.
    """
    if m <= config.w:
        return []
    if is_search_iteration(m, config.g, config.w):
        L = state.prev_losses
        order = sorted(range(len(L)), key=lambda k: (-L[k], k))
        return order[: config.s]
    return [state.last_base]


def expected_tree_count(K: int, M: int, s: int, g: int, w: int) -> int:
    """Trees trained by a run, counted from the exact search schedule."""
    n_search = sum(1 for m in range(w + 1, M + 1) if is_search_iteration(m, g, w))
    n_reuse = (M - w) - n_search
    return K * w + s * (K - 1) * n_search + (K - 1) * n_reuse


class _Trainer:
    def __init__(self, config, data, bins, test, keep_scores):
        self.config = config
        self.bins = bins
        self.binned = apply_bins(data, bins)
        self.K = data.n_classes
        self.y = data.labels
        # class-major copies keep per-class slices contiguous
        self.rT = np.ascontiguousarray(self.binned.onehot().T)
        self.codes = np.ascontiguousarray(self.binned.codes)
        self.n_bins = self.binned.n_bins
        N = data.n_samples
        self.F = np.zeros((N, self.K))
        self.set_probs(softmax(self.F))
        self.keep_scores = keep_scores
        self.test_codes = None
        if test is not None:
            self.test_codes = apply_bins(test, bins, n_classes=self.K).codes
            self.test_y = test.labels
            self.F_test = np.zeros((test.n_samples, self.K))
        self.model = EnsembleModel(
            method=config.method, n_classes=self.K, nu=config.nu, J=config.J,
            bin_map=bins, classes=data.classes,
            w=config.w if config.method in ABC_METHODS else 0,
            s=config.s if config.method in ABC_METHODS else None,
            g=config.g if config.method in ABC_METHODS else None,
        )
        self.prev_plain = False

    def set_probs(self, p):
        self.p = p
        self.pT = np.ascontiguousarray(p.T)

    def _grow(self, numer, weight, criterion, scale):
        tree, leaves = grow_tree(self.codes, self.n_bins, numer, weight, self.config.J,
                                 criterion, leaf_scale=scale, eps=self.config.eps,
                                 return_leaves=True)
        return tree, tree.value[leaves]

    def plain_step(self, method):
        criterion = (SplitCriterion.MART_FIRST_ORDER if method == "mart"
                     else SplitCriterion.ROBUST_SECOND_ORDER)
        scale = (self.K - 1) / self.K
        trees, outputs = [], []
        for k in range(self.K):
            pk = self.pT[k]
            tree, out = self._grow(self.rT[k] - pk, pk * (1.0 - pk), criterion, scale)
            trees.append(tree)
            outputs.append(out)
        F = self.F.copy()
        apply_group(F, outputs, None, self.config.nu)
        return trees, F

    def abc_candidate(self, b):
        criterion = (SplitCriterion.MART_FIRST_ORDER if self.config.method == "abcmart"
                     else SplitCriterion.ABC_SECOND_ORDER)
        pb = self.pT[b]
        resid_b = self.rT[b] - pb
        hb = pb * (1.0 - pb)
        trees, outputs = [], []
        for k in range(self.K):
            if k == b:
                continue
            pk = self.pT[k]
            numer = (self.rT[k] - pk) - resid_b
            weight = hb + pk * (1.0 - pk) + 2.0 * pb * pk
            tree, out = self._grow(numer, weight, criterion, 1.0)
            trees.append(tree)
            outputs.append(out)
        G = self.F.copy()
        apply_group(G, outputs, b, self.config.nu)
        q = softmax(G)
        return trees, G, q, class_losses(q, self.y)

    def commit(self, trees, F, base, p=None):
        self.F = F
        self.set_probs(softmax(F) if p is None else p)
        self.model.groups.append(IterationGroup(base, trees))
        if self.test_codes is not None:
            if base is not None and self.prev_plain:
                recenter(self.F_test)
            apply_group(self.F_test, [t.predict_binned(self.test_codes) for t in trees],
                        base, self.config.nu)
        self.prev_plain = base is None

    def test_errors(self):
        if self.test_codes is None:
            return None
        return int(np.sum(np.argmax(self.F_test, axis=1) != self.test_y))

    def halt(self, m, why):
        msg = f"training stopped at iteration {m}: {why}"
        self.model.diagnostic = msg
        warnings.warn(msg, RuntimeWarning, stacklevel=3)


def _check(config, data):
    if not isinstance(data, RawDataset):
        raise TypeError("data must be a RawDataset")
    config.validate(data.n_classes)


def _finish(tr):
    tr.model.train_scores = tr.F
    return tr.model


def train_plain(config: BoostConfig, data: RawDataset, test: RawDataset | None = None,
                bins: BinMap | None = None, keep_scores: bool = False) -> EnsembleModel:
    """MART or Robust LogitBoost: ``K`` trees per iteration on ``r - p``."""
    if config.method not in PLAIN_METHODS:
        raise ConfigError(f"train_plain does not handle method {config.method!r}")
    _check(config, data)
    bins = bins if bins is not None else fit_bins(data, config.max_bins)
    tr = _Trainer(config, data, bins, test, keep_scores)
    for m in range(1, config.M + 1):
        trees, F = tr.plain_step(config.method)
        if not np.all(np.isfinite(F)):
            tr.halt(m, "non-finite scores")
            break
        tr.commit(trees, F, None)
        loss = class_losses(tr.p, tr.y)
        tr.model.records.append(IterationRecord(
            m, None, (), {}, loss.total, tr.K, test_errors=tr.test_errors(),
            scores=tr.F.copy() if keep_scores else None))
    return _finish(tr)


def train_abc(config: BoostConfig, data: RawDataset, test: RawDataset | None = None,
              bins: BinMap | None = None, keep_scores: bool = False) -> EnsembleModel:
    """ABC-MART / ABC-RobustLogitBoost with the ``(s, g, w)`` base-class selector.

    Warm-up iterations train the matching plain method. Every ABC iteration
    fits ``K - 1`` trees per candidate base on a private copy of the scores,
    and commits the candidate with the smallest total training loss (ties to
    the smaller class id).
    """
    if config.method not in ABC_METHODS:
        raise ConfigError(f"train_abc does not handle method {config.method!r}")
    _check(config, data)
    bins = bins if bins is not None else fit_bins(data, config.max_bins)
    tr = _Trainer(config, data, bins, test, keep_scores)
    state = SelectorState.initial(tr.binned.class_counts)
    K = tr.K

    for m in range(1, config.M + 1):
        state.m = m
        candidates = select_candidates(state, config, m)
        if not candidates:
            trees, F = tr.plain_step(config.warmup_method)
            if not np.all(np.isfinite(F)):
                tr.halt(m, "non-finite scores during warm-up")
                break
            tr.commit(trees, F, None)
            loss = class_losses(tr.p, tr.y)
            state.prev_losses = loss.per_class
            tr.model.records.append(IterationRecord(
                m, None, (), {}, loss.total, K, test_errors=tr.test_errors(),
                scores=tr.F.copy() if keep_scores else None))
            continue

        if m == config.w + 1 and config.w > 0:
            # plain boosting does not keep scores centered; the shift is
            # invisible to the probabilities
            recenter(tr.F)
            tr.set_probs(softmax(tr.F))

        best = None
        losses = {}
        for b in candidates:
            trees, G, q, loss = tr.abc_candidate(b)
            losses[b] = loss.total
            if not np.isfinite(loss.total):
                continue
            if best is None or (loss.total, b) < (best[4].total, best[0]):
                best = (b, trees, G, q, loss)
        if best is None:
            tr.halt(m, "loss is not finite for any candidate base class")
            break
        b, trees, G, q, loss = best
        tr.commit(trees, G, b, q)
        state.prev_losses = loss.per_class
        state.last_base = b
        tr.model.records.append(IterationRecord(
            m, b, tuple(candidates), losses, loss.total, (K - 1) * len(candidates),
            searched=is_search_iteration(m, config.g, config.w),
            test_errors=tr.test_errors(),
            scores=tr.F.copy() if keep_scores else None))
        logger.debug("iteration %d base %d loss %.6g", m, b, loss.total)
    return _finish(tr)


def train(config: BoostConfig, data: RawDataset, test: RawDataset | None = None,
          bins: BinMap | None = None, keep_scores: bool = False) -> EnsembleModel:
    """Train with whichever loop ``config.method`` calls for."""
    config.validate()
    fn = train_abc if config.method in ABC_METHODS else train_plain
    return fn(config, data, test=test, bins=bins, keep_scores=keep_scores)


def loss_trace(model: EnsembleModel) -> list:
    """Per-iteration records kept by the trainer, in iteration order."""
    if not model.records and model.M:
        raise ValueError("model carries no training records (was it loaded from disk?)")
    return list(model.records)
