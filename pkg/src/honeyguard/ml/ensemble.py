"""
Tree ensembles: bagged random forest and logistic gradient boosting
"""

from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

import numpy as np

from .tree import DecisionTree, RegressionTree

# keeps p in (0, 1) for the initial log-odds
_PROBA_CLIP = 1e-9


def sigmoid(raw: np.ndarray) -> np.ndarray:
    with np.errstate(over='ignore'):
        return 1.0 / (1.0 + np.exp(-raw))


class RandomForest:
    """Bagged Gini trees with per-node feature sampling; tree t is seeded by (seed, t)"""

    def __init__(self, n_trees: int = 100, max_features: Optional[int] = 3,
                 bootstrap: bool = True, seed: int = 0, n_jobs: int = 1,
                 max_depth: Optional[int] = None):
        self.n_trees = n_trees
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.seed = seed
        self.n_jobs = n_jobs
        self.max_depth = max_depth
        self.trees: List[DecisionTree] = []

    def _fit_tree(self, index: int, X: np.ndarray, y: np.ndarray) -> DecisionTree:
        rng = np.random.default_rng([self.seed, index])
        if self.bootstrap:
            sample = rng.integers(0, len(y), len(y))
            X, y = X[sample], y[sample]
        tree = DecisionTree(max_depth=self.max_depth, max_features=self.max_features, rng=rng)
        return tree.fit(X, y)

    def fit(self, X, y) -> "RandomForest":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        indices = range(self.n_trees)
        if self.n_jobs > 1:
            with ThreadPoolExecutor(max_workers=self.n_jobs) as pool:
                # map yields in submission order, so the forest is independent of n_jobs
                self.trees = list(pool.map(lambda t: self._fit_tree(t, X, y), indices))
        else:
            self.trees = [self._fit_tree(t, X, y) for t in indices]
        return self

    def votes(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        total = np.zeros(X.shape[0], dtype=np.int64)
        for tree in self.trees:
            total += tree.predict_labels(X)
        return total

    def predict_labels(self, X) -> np.ndarray:
        """Majority vote; an even split resolves to benign"""
        return self.votes(X) * 2 > len(self.trees)

    def predict_scores(self, X) -> np.ndarray:
        return self.votes(X) / float(len(self.trees))


class GradientBoosting:
    """Binary log-loss boosting over depth-limited regression trees (no subsampling)"""

    def __init__(self, n_stages: int = 100, learning_rate: float = 0.1, max_depth: int = 3):
        self.n_stages = n_stages
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.init = 0.0
        self.stages: List[RegressionTree] = []

    def fit(self, X, y) -> "GradientBoosting":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        p = float(np.clip(y.mean(), _PROBA_CLIP, 1.0 - _PROBA_CLIP))
        self.init = float(np.log(p / (1.0 - p)))

        raw = np.full(len(y), self.init)
        self.stages = []
        for _ in range(self.n_stages):
            proba = sigmoid(raw)
            residual = y - proba
            stage = RegressionTree(self.max_depth).fit(X, residual, proba * (1.0 - proba))
            raw += self.learning_rate * stage.predict(X)
            self.stages.append(stage)
        return self

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        raw = np.full(X.shape[0], self.init)
        for stage in self.stages:
            raw += self.learning_rate * stage.predict(X)
        return raw

    def predict_scores(self, X) -> np.ndarray:
        return sigmoid(self.decision_function(X))

    def predict_labels(self, X) -> np.ndarray:
        return self.predict_scores(X) >= 0.5
