"""Histogram-based regression trees grown best-first to ``J`` leaves.

Each sample carries a numerator ``n_i`` (the negated first derivative) and a
weight ``d_i`` (the second derivative). A node split at bin ``t`` sends
``bin <= t`` left and scores

    Gain(t) = (sum_L n)^2 / sum_L d + (sum_R n)^2 / sum_R d - (sum n)^2 / sum d

which is the drop in weighted squared error of the responses ``n_i / d_i``.
The first-order criterion uses sample counts in place of ``d``.
Leaf values are Newton steps ``scale * sum n / (eps + sum d)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from numba import njit

DAMPING = 1e-10
NO_SPLIT = -1


class SplitCriterion(enum.Enum):
    MART_FIRST_ORDER = "mart"
    ROBUST_SECOND_ORDER = "robust"
    ABC_SECOND_ORDER = "abc"


@njit(cache=True)
def _scan_feature(hist_n, hist_d, hist_c, n_bins):
    """Best threshold of one feature's histogram, or (-1, 0.0).

    Children must be nonempty and have a positive denominator.
    """
    tot_n = 0.0
    tot_d = 0.0
    tot_c = 0.0
    for t in range(n_bins):
        tot_n += hist_n[t]
        tot_d += hist_d[t]
        tot_c += hist_c[t]
    best_t = -1
    best_gain = 0.0
    if tot_d <= 0.0:
        return best_t, best_gain
    parent = tot_n * tot_n / tot_d
    ln = 0.0
    ld = 0.0
    lc = 0.0
    for t in range(n_bins - 1):
        ln += hist_n[t]
        ld += hist_d[t]
        lc += hist_c[t]
        if lc <= 0.0 or lc >= tot_c:
            continue
        rd = tot_d - ld
        if ld <= 0.0 or rd <= 0.0:
            continue
        rn = tot_n - ln
        gain = ln * ln / ld + rn * rn / rd - parent
        if gain > best_gain:
            best_gain = gain
            best_t = t
    return best_t, best_gain


@njit(cache=True)
def _build_hist(codes, idx, start, stop, numer, gden, hist):
    n_features = codes.shape[1]
    hist[:] = 0.0
    # sample-major loop: consecutive updates hit different features, which
    # avoids store-to-load stalls on the same bin
    for j in range(start, stop):
        i = idx[j]
        a = numer[i]
        g = gden[i]
        row = codes[i]
        for f in range(n_features):
            b = row[f]
            hist[f, b, 0] += a
            hist[f, b, 1] += g
            hist[f, b, 2] += 1.0


@njit(cache=True)
def _best_split(hist, n_bins):
    best_f = -1
    best_t = -1
    best_gain = 0.0
    for f in range(hist.shape[0]):
        nb = n_bins[f]
        if nb < 2:
            continue
        t, gain = _scan_feature(hist[f, :nb, 0], hist[f, :nb, 1], hist[f, :nb, 2], nb)
        if t >= 0 and gain > best_gain:
            best_gain = gain
            best_f = f
            best_t = t
    return best_f, best_t, best_gain


@njit(cache=True)
def _grow(codes, n_bins, numer, gden, lden, max_leaves, eps, scale):
    n_samples = codes.shape[0]
    n_features = codes.shape[1]
    max_nodes = 2 * max_leaves - 1
    max_b = 1
    for f in range(n_features):
        if n_bins[f] > max_b:
            max_b = n_bins[f]

    feature = np.full(max_nodes, -1, np.int64)
    threshold = np.full(max_nodes, -1, np.int64)
    left = np.full(max_nodes, -1, np.int64)
    right = np.full(max_nodes, -1, np.int64)
    value = np.zeros(max_nodes)
    count = np.zeros(max_nodes, np.int64)
    start = np.zeros(max_nodes, np.int64)
    stop = np.zeros(max_nodes, np.int64)
    # split proposal of each open leaf and the histogram slot it owns
    cand_f = np.full(max_nodes, -1, np.int64)
    cand_t = np.full(max_nodes, -1, np.int64)
    cand_gain = np.zeros(max_nodes)
    slot = np.full(max_nodes, -1, np.int64)
    is_open = np.zeros(max_nodes, np.bool_)

    pool = np.zeros((max_leaves + 1, n_features, max_b, 4))
    free_slots = np.arange(max_leaves + 1)[::-1].copy()
    n_free = max_leaves + 1

    idx = np.arange(n_samples)
    buf = np.empty(n_samples, np.int64)

    n_nodes = 1
    stop[0] = n_samples
    n_free -= 1
    slot[0] = free_slots[n_free]
    _build_hist(codes, idx, 0, n_samples, numer, gden, pool[slot[0]])
    f0, t0, g0 = _best_split(pool[slot[0]], n_bins)
    cand_f[0] = f0
    cand_t[0] = t0
    cand_gain[0] = g0
    is_open[0] = True
    n_leaves = 1

    while n_leaves < max_leaves:
        node = -1
        best = 0.0
        for v in range(n_nodes):
            if is_open[v] and cand_f[v] >= 0 and cand_gain[v] > best:
                best = cand_gain[v]
                node = v
        if node < 0:
            break
        f = cand_f[node]
        t = cand_t[node]
        s0 = start[node]
        s1 = stop[node]
        # stable partition of the node's samples
        nl = 0
        nr = 0
        for j in range(s0, s1):
            i = idx[j]
            if codes[i, f] <= t:
                idx[s0 + nl] = i
                nl += 1
            else:
                buf[nr] = i
                nr += 1
        for j in range(nr):
            idx[s0 + nl + j] = buf[j]

        lc = n_nodes
        rc = n_nodes + 1
        n_nodes += 2
        feature[node] = f
        threshold[node] = t
        left[node] = lc
        right[node] = rc
        is_open[node] = False
        start[lc] = s0
        stop[lc] = s0 + nl
        start[rc] = s0 + nl
        stop[rc] = s1
        n_leaves += 1

        parent_slot = slot[node]
        n_free -= 1
        other = free_slots[n_free]
        # direct histogram for the smaller child, subtraction for the larger
        if nl <= nr:
            small, large = lc, rc
        else:
            small, large = rc, lc
        slot[small] = other
        slot[large] = parent_slot
        is_open[lc] = True
        is_open[rc] = True
        if n_leaves == max_leaves:
            break
        _build_hist(codes, idx, start[small], stop[small], numer, gden, pool[other])
        pool[parent_slot] -= pool[other]
        for c in (lc, rc):
            cf, ct, cg = _best_split(pool[slot[c]], n_bins)
            cand_f[c] = cf
            cand_t[c] = ct
            cand_gain[c] = cg

    leaf_of = np.empty(n_samples, np.int64)
    for v in range(n_nodes):
        if left[v] >= 0:
            continue
        sn = 0.0
        sd = 0.0
        for j in range(start[v], stop[v]):
            i = idx[j]
            sn += numer[i]
            sd += lden[i]
            leaf_of[i] = v
        value[v] = scale * sn / (eps + sd)
        count[v] = stop[v] - start[v]
    return (feature[:n_nodes], threshold[:n_nodes], left[:n_nodes],
            right[:n_nodes], value[:n_nodes], count[:n_nodes], leaf_of)


@njit(cache=True)
def _route(codes, feature, threshold, left, right):
    n = codes.shape[0]
    out = np.empty(n, np.int64)
    for i in range(n):
        v = 0
        while left[v] >= 0:
            if codes[i, feature[v]] <= threshold[v]:
                v = left[v]
            else:
                v = right[v]
        out[i] = v
    return out


@dataclass
class RegressionTree:
    """Flat node arrays; node 0 is the root, ``left[v] == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    count: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.left)

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.left < 0))

    def leaves(self, codes: np.ndarray) -> np.ndarray:
        """Leaf id reached by every row of binned ``codes``."""
        return _route(codes, self.feature, self.threshold, self.left, self.right)

    def predict_binned(self, codes: np.ndarray) -> np.ndarray:
        return self.value[self.leaves(codes)]

    def to_dict(self) -> dict:
        nodes = []
        for v in range(self.n_nodes):
            if self.left[v] < 0:
                nodes.append({"leaf_value": float(self.value[v]), "count": int(self.count[v])})
            else:
                nodes.append({
                    "feature": int(self.feature[v]),
                    "threshold_bin": int(self.threshold[v]),
                    "left": int(self.left[v]),
                    "right": int(self.right[v]),
                })
        return {"nodes": nodes}

    @classmethod
    def from_dict(cls, d) -> "RegressionTree":
        nodes = d["nodes"]
        n = len(nodes)
        tree = cls(
            np.full(n, -1, np.int64), np.full(n, -1, np.int64), np.full(n, -1, np.int64),
            np.full(n, -1, np.int64), np.zeros(n), np.zeros(n, np.int64),
        )
        for v, node in enumerate(nodes):
            if "leaf_value" in node:
                tree.value[v] = float(node["leaf_value"])
                tree.count[v] = int(node.get("count", 0))
            else:
                tree.feature[v] = int(node["feature"])
                tree.threshold[v] = int(node["threshold_bin"])
                tree.left[v] = int(node["left"])
                tree.right[v] = int(node["right"])
        return tree


def scan_gain(numerators, weights, counts, criterion=SplitCriterion.ROBUST_SECOND_ORDER):
    """Best split threshold over per-bin sums of one feature.

    Parameters
    ----------
    numerators, weights, counts : array-like
        Per-bin sums of the sample numerators, weights and sample counts,
        in bin order.
    criterion : SplitCriterion
        ``MART_FIRST_ORDER`` ignores ``weights`` and divides by counts.

    Returns
    -------
    threshold : int
        Largest bin id sent left, or ``-1`` when no split improves the node.
    gain : float
    """
    n = np.ascontiguousarray(numerators, dtype=np.float64)
    c = np.ascontiguousarray(counts, dtype=np.float64)
    if SplitCriterion(criterion) is SplitCriterion.MART_FIRST_ORDER:
        d = c
    else:
        d = np.ascontiguousarray(weights, dtype=np.float64)
    t, gain = _scan_feature(n, d, c, len(n))
    return int(t), float(gain)


def split_gain(numerators, denominators, t: int) -> float:
    """Gain of sending entries ``0..t`` left, from per-entry sums."""
    n = np.asarray(numerators, dtype=np.float64)
    d = np.asarray(denominators, dtype=np.float64)
    ln, ld = n[: t + 1].sum(), d[: t + 1].sum()
    rn, rd = n[t + 1:].sum(), d[t + 1:].sum()
    return ln * ln / ld + rn * rn / rd - n.sum() ** 2 / d.sum()


def grow_tree(codes, n_bins, numerators, weights, J: int,
              criterion=SplitCriterion.ROBUST_SECOND_ORDER, *,
              leaf_scale: float = 1.0, eps: float = DAMPING, return_leaves: bool = False):
    """Fit a ``J``-leaf tree on binned ``codes`` of shape ``(N, n_features)``.

    Leaves are split best-first by largest positive gain; growth stops early
    when no leaf can improve. ``leaf_scale`` multiplies every leaf value
    (``(K-1)/K`` for plain multi-class boosting, 1 for ABC).

    With ``return_leaves`` the leaf id of every training sample is returned
    as well.
    """
    if J < 2:
        raise ValueError("J must be at least 2")
    codes = np.ascontiguousarray(codes)
    numer = np.ascontiguousarray(numerators, dtype=np.float64)
    lden = np.ascontiguousarray(weights, dtype=np.float64)
    if codes.ndim != 2 or codes.shape[0] != len(numer) or len(lden) != len(numer):
        raise ValueError("codes, numerators and weights disagree on sample count")
    if len(numer) < 1:
        raise ValueError("cannot grow a tree on zero samples")
    if SplitCriterion(criterion) is SplitCriterion.MART_FIRST_ORDER:
        gden = np.ones_like(numer)
    else:
        gden = lden
    out = _grow(codes, np.asarray(n_bins, dtype=np.int64), numer, gden, lden,
                int(J), float(eps), float(leaf_scale))
    tree = RegressionTree(*out[:6])
    if return_leaves:
        return tree, out[6]
    return tree


def predict_tree(tree: RegressionTree, binned_row) -> float:
    """Value of the leaf reached by a single binned feature row."""
    row = np.asarray(binned_row)
    v = 0
    while tree.left[v] >= 0:
        v = tree.left[v] if row[tree.feature[v]] <= tree.threshold[v] else tree.right[v]
    return float(tree.value[v])
