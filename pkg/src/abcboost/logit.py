"""Multi-class logistic probabilities, losses and derivatives.

``F`` holds one real score per class, ``p = softmax(F)``. The classical
derivatives treat every ``F_k`` as free; the ABC derivatives eliminate a base
class ``b`` through the sum-to-zero constraint ``F_b = -sum_{k != b} F_k``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PROB_FLOOR = 1e-300


def softmax(F) -> np.ndarray:
    """Row-wise class probabilities for a score vector or an ``N x K`` matrix."""
    F = np.asarray(F, dtype=np.float64)
    z = F - F.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_probs(F_row) -> np.ndarray:
    return softmax(np.asarray(F_row, dtype=np.float64).reshape(-1))


@dataclass
class ClassLossVector:
    """Training loss split by true class; ``total`` is the sum of ``per_class``."""

    per_class: np.ndarray
    total: float


def class_losses(p, labels) -> ClassLossVector:
    """Negative log-likelihood restricted to each class's own samples.

    ``per_class[k] = -sum_{i: y_i = k} log p[i, k]``. Probabilities below
    ``1e-300`` are floored so a diverging model shows up as a huge but finite
    loss.
    """
    p = np.asarray(p, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    K = p.shape[1]
    picked = p[np.arange(len(labels)), labels]
    nll = -np.log(np.maximum(picked, PROB_FLOOR))
    per_class = np.bincount(labels, weights=nll, minlength=K)
    return ClassLossVector(per_class, float(per_class.sum()))


total_and_class_losses = class_losses


def classical_derivs(p_row, r_row, k: int) -> tuple[float, float]:
    """First and second derivative of the sample loss in ``F_k``, others fixed."""
    pk = float(p_row[k])
    return -(float(r_row[k]) - pk), pk * (1.0 - pk)


def abc_derivs(p_row, r_row, k: int, b: int) -> tuple[float, float]:
    """Derivatives in ``F_k`` when class ``b`` absorbs the sum-to-zero constraint."""
    if k == b:
        raise ValueError(f"class {k} is the base class; it has no free score")
    pk, pb = float(p_row[k]), float(p_row[b])
    g = (float(r_row[b]) - pb) - (float(r_row[k]) - pk)
    h = pb * (1.0 - pb) + pk * (1.0 - pk) + 2.0 * pb * pk
    return g, h


def classical_hessian(p_row) -> np.ndarray:
    p = np.asarray(p_row, dtype=np.float64)
    return np.diag(p) - np.outer(p, p)


def abc_hessian(p_row, b: int) -> np.ndarray:
    """``(K-1) x (K-1)`` Hessian over the free scores ``{F_k}_{k != b}``.

    Off-diagonal entries follow from ``dp_k/dF_s = p_k (p_b - p_s)`` and
    ``dp_b/dF_s = p_b (p_b - p_s - 1)``.
    """
    p = np.asarray(p_row, dtype=np.float64)
    free = [k for k in range(len(p)) if k != b]
    pb = p[b]
    H = np.empty((len(free), len(free)))
    for a, k in enumerate(free):
        for c, s in enumerate(free):
            if k == s:
                H[a, c] = pb * (1 - pb) + p[k] * (1 - p[k]) + 2 * pb * p[k]
            else:
                H[a, c] = pb * (1 - pb) + pb * p[s] + p[k] * pb - p[k] * p[s]
    return H


def hessian_det(p_row, b: int) -> float:
    """Determinant of :func:`abc_hessian`; the same for every base class."""
    p = np.asarray(p_row, dtype=np.float64)
    if not 0 <= b < len(p):
        raise ValueError(f"base class {b} out of range")
    return float(np.linalg.det(abc_hessian(p, b)))
