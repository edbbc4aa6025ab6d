"""
k-nearest-neighbour classifier (Euclidean, unweighted majority, no scaling)
"""

import numpy as np

# bound on query x train x feature cells held in memory per chunk
_CHUNK_CELLS = 1 << 22


class KNearestNeighbors:
    """Stores the training table; distance ties go to the earlier training row"""

    def __init__(self, k: int = 5):
        self.k = k
        self.X = np.empty((0, 0), dtype=np.float64)
        self.y = np.empty(0, dtype=np.int8)

    def fit(self, X, y) -> "KNearestNeighbors":
        self.X = np.ascontiguousarray(X, dtype=np.float64)
        self.y = np.ascontiguousarray(y, dtype=np.int8)
        return self

    @property
    def k_effective(self) -> int:
        return min(self.k, len(self.y))

    def neighbors(self, X) -> np.ndarray:
        """Training indices of the k nearest rows for each query, nearest first"""
        X = np.asarray(X, dtype=np.float64)
        k = self.k_effective
        result = np.empty((X.shape[0], k), dtype=np.int64)
        step = max(1, _CHUNK_CELLS // max(1, self.X.size))
        for start in range(0, X.shape[0], step):
            chunk = X[start:start + step]
            diff = chunk[:, None, :] - self.X[None, :, :]
            distances = np.einsum('qnf,qnf->qn', diff, diff)
            result[start:start + len(chunk)] = np.argsort(distances, axis=1, kind='stable')[:, :k]
        return result

    def votes(self, X) -> np.ndarray:
        return self.y[self.neighbors(X)].sum(axis=1, dtype=np.int64)

    def predict_labels(self, X) -> np.ndarray:
        return self.votes(X) * 2 > self.k_effective

    def predict_scores(self, X) -> np.ndarray:
        return self.votes(X) / float(self.k_effective)
