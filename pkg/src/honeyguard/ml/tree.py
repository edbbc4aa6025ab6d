"""
CART trees: Gini classification trees and squared-error regression trees
"""

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from ..core.errors import NoValidSplit

# Gains closer than this are treated as equal so the first candidate wins.
GAIN_TOLERANCE = 1e-12
LEAF = -1


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    gain: float


def gini(benign: int, malicious: int) -> float:
    n = benign + malicious
    if n == 0:
        return 0.0
    return 2.0 * benign * malicious / (n * n)


def _midpoint(low: float, high: float) -> float:
    threshold = (low + high) / 2.0
    # adjacent floats can round the midpoint up onto `high`
    return low if threshold >= high else threshold


def _candidates(column: np.ndarray):
    """Sort order and boundary positions i where sorted[i] != sorted[i + 1]"""
    order = np.argsort(column, kind='stable')
    ordered = column[order]
    boundaries = np.nonzero(ordered[1:] != ordered[:-1])[0]
    return order, ordered, boundaries


def _search(X: np.ndarray, features: Optional[Sequence[int]],
            score: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> Split:
    if X.shape[0] < 2:
        raise NoValidSplit("fewer than 2 rows")
    feature_ids = range(X.shape[1]) if features is None else sorted(int(f) for f in features)

    best: Optional[Split] = None
    for f in feature_ids:
        order, ordered, boundaries = _candidates(X[:, f])
        if boundaries.size == 0:
            continue
        gains = score(order, boundaries)
        j = int(np.argmax(gains >= gains.max() - GAIN_TOLERANCE))
        gain = float(gains[j])
        if best is None or gain > best.gain + GAIN_TOLERANCE:
            i = boundaries[j]
            best = Split(f, _midpoint(float(ordered[i]), float(ordered[i + 1])), gain)

    if best is None:
        raise NoValidSplit("no feature has two distinct values")
    return best


def best_split(X, y, features: Optional[Sequence[int]] = None) -> Split:
    """Gini-optimal split over midpoints of consecutive distinct values

    Ties go to the lower feature index, then the lower threshold.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(y, dtype=np.int64)
    n = len(y)
    total_m = int(y.sum())
    parent = gini(n - total_m, total_m)

    def score(order: np.ndarray, boundaries: np.ndarray) -> np.ndarray:
        cum_m = np.cumsum(y[order])
        n_left = (boundaries + 1).astype(np.float64)
        m_left = cum_m[boundaries].astype(np.float64)
        b_left = n_left - m_left
        n_right = n - n_left
        m_right = total_m - m_left
        b_right = n_right - m_right
        impurity = (2.0 * b_left * m_left / n_left + 2.0 * b_right * m_right / n_right) / n
        return parent - impurity

    return _search(X, features, score)


def best_regression_split(X: np.ndarray, target: np.ndarray,
                          features: Optional[Sequence[int]] = None) -> Split:
    """Squared-error split; gain is the mean reduction in squared error"""
    n = len(target)
    total = float(target.sum())
    parent_term = total * total / n

    def score(order: np.ndarray, boundaries: np.ndarray) -> np.ndarray:
        cum = np.cumsum(target[order])
        n_left = (boundaries + 1).astype(np.float64)
        s_left = cum[boundaries]
        s_right = total - s_left
        return (s_left * s_left / n_left + s_right * s_right / (n - n_left) - parent_term) / n

    return _search(X, features, score)


class _TreeArrays:
    """Flat node storage; feature == LEAF marks a leaf"""

    def __init__(self):
        self.feature: List[int] = []
        self.threshold: List[float] = []
        self.left: List[int] = []
        self.right: List[int] = []

    def new_node(self) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        return len(self.feature) - 1

    def set_split(self, node: int, split: Split, left: int, right: int) -> None:
        self.feature[node] = split.feature
        self.threshold[node] = split.threshold
        self.left[node] = left
        self.right[node] = right


def apply_tree(feature: np.ndarray, threshold: np.ndarray, left: np.ndarray,
               right: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Leaf index reached by every row (x <= threshold goes left)"""
    node = np.zeros(X.shape[0], dtype=np.int64)
    active = np.nonzero(feature[node] != LEAF)[0]
    while active.size:
        current = node[active]
        go_left = X[active, feature[current]] <= threshold[current]
        node[active] = np.where(go_left, left[current], right[current])
        active = active[feature[node[active]] != LEAF]
    return node


class DecisionTree:
    """Unpruned CART classifier (Gini), optionally with per-node feature sampling"""

    def __init__(self, max_depth: Optional[int] = None, max_features: Optional[int] = None,
                 rng: Optional[np.random.Generator] = None):
        self.max_depth = max_depth
        self.max_features = max_features
        self.rng = rng
        self.feature = np.empty(0, dtype=np.int32)
        self.threshold = np.empty(0, dtype=np.float64)
        self.left = np.empty(0, dtype=np.int32)
        self.right = np.empty(0, dtype=np.int32)
        self.counts = np.empty((0, 2), dtype=np.int64)

    def _find_split(self, X: np.ndarray, y: np.ndarray) -> Optional[Split]:
        n_features = X.shape[1]
        if self.max_features is None or self.max_features >= n_features:
            groups = [None]
        else:
            perm = self.rng.permutation(n_features)
            groups = [perm[:self.max_features], perm[self.max_features:]]
        for group in groups:
            try:
                return best_split(X, y, group)
            except NoValidSplit:
                continue
        return None

    def fit(self, X, y) -> "DecisionTree":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        arrays = _TreeArrays()
        counts: List[tuple] = []

        def make(idx: np.ndarray) -> int:
            node = arrays.new_node()
            m = int(y[idx].sum())
            counts.append((len(idx) - m, m))
            return node

        root_idx = np.arange(len(y))
        stack = [(make(root_idx), root_idx, 0)]
        while stack:
            node, idx, depth = stack.pop()
            benign, malicious = counts[node]
            if benign == 0 or malicious == 0 or len(idx) < 2:
                continue
            if self.max_depth is not None and depth >= self.max_depth:
                continue
            split = self._find_split(X[idx], y[idx])
            if split is None:
                continue
            mask = X[idx, split.feature] <= split.threshold
            left_idx, right_idx = idx[mask], idx[~mask]
            left, right = make(left_idx), make(right_idx)
            arrays.set_split(node, split, left, right)
            stack.append((right, right_idx, depth + 1))
            stack.append((left, left_idx, depth + 1))

        self.feature = np.asarray(arrays.feature, dtype=np.int32)
        self.threshold = np.asarray(arrays.threshold, dtype=np.float64)
        self.left = np.asarray(arrays.left, dtype=np.int32)
        self.right = np.asarray(arrays.right, dtype=np.int32)
        self.counts = np.asarray(counts, dtype=np.int64).reshape(-1, 2)
        return self

    @property
    def node_count(self) -> int:
        return len(self.feature)

    def leaves(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return apply_tree(self.feature, self.threshold, self.left, self.right, X)

    def predict_labels(self, X) -> np.ndarray:
        """True = malicious; a leaf tie resolves to benign"""
        leaf_counts = self.counts[self.leaves(X)]
        return leaf_counts[:, 1] > leaf_counts[:, 0]

    def predict_scores(self, X) -> np.ndarray:
        leaf_counts = self.counts[self.leaves(X)].astype(np.float64)
        return leaf_counts[:, 1] / leaf_counts.sum(axis=1)


class RegressionTree:
    """Depth-limited squared-error tree with Newton-step leaf values (boosting stage)"""

    def __init__(self, max_depth: int = 3):
        self.max_depth = max_depth
        self.feature = np.empty(0, dtype=np.int32)
        self.threshold = np.empty(0, dtype=np.float64)
        self.left = np.empty(0, dtype=np.int32)
        self.right = np.empty(0, dtype=np.int32)
        self.value = np.empty(0, dtype=np.float64)

    def fit(self, X: np.ndarray, residual: np.ndarray, hessian: np.ndarray) -> "RegressionTree":
        arrays = _TreeArrays()
        values: List[float] = []

        def make(idx: np.ndarray) -> int:
            node = arrays.new_node()
            denominator = float(hessian[idx].sum())
            numerator = float(residual[idx].sum())
            values.append(numerator / denominator if abs(denominator) > 1e-150 else 0.0)
            return node

        root_idx = np.arange(len(residual))
        stack = [(make(root_idx), root_idx, 0)]
        while stack:
            node, idx, depth = stack.pop()
            if depth >= self.max_depth or len(idx) < 2:
                continue
            target = residual[idx]
            if np.all(target == target[0]):
                continue
            try:
                split = best_regression_split(X[idx], target)
            except NoValidSplit:
                continue
            mask = X[idx, split.feature] <= split.threshold
            left_idx, right_idx = idx[mask], idx[~mask]
            left, right = make(left_idx), make(right_idx)
            arrays.set_split(node, split, left, right)
            stack.append((right, right_idx, depth + 1))
            stack.append((left, left_idx, depth + 1))

        self.feature = np.asarray(arrays.feature, dtype=np.int32)
        self.threshold = np.asarray(arrays.threshold, dtype=np.float64)
        self.left = np.asarray(arrays.left, dtype=np.int32)
        self.right = np.asarray(arrays.right, dtype=np.int32)
        self.value = np.asarray(values, dtype=np.float64)
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[apply_tree(self.feature, self.threshold, self.left, self.right, X)]
