"""
Trained detection models: training, prediction and provenance
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.errors import EmptyWindow, SchemaMismatch
from ..core.logger import logger
from ..core.types import Label, TimeWindow
from ..features.dataset import LabeledDataset
from ..features.extract import FeatureVector
from ..utils.performance import OperationTimer, PerformanceMonitor
from .algorithms import AlgorithmKind, AlgorithmSpec
from .ensemble import GradientBoosting, RandomForest
from .knn import KNearestNeighbors
from .tree import DecisionTree

Estimator = Union[KNearestNeighbors, DecisionTree, RandomForest, GradientBoosting]


@dataclass(frozen=True)
class DetectionModel:
    """Immutable after construction; safe to hand between the updater and the gateway"""
    algorithm: AlgorithmSpec
    schema_hash: int
    trained_at: float
    train_window: TimeWindow
    class_counts: Tuple[int, int]
    estimator: Estimator = field(compare=False, repr=False)
    # wall-clock seconds; not part of the serialized model
    train_seconds: float = field(default=0.0, compare=False)

    @property
    def is_constant(self) -> bool:
        """Trained on a single class, so every input gets the same label"""
        benign, malicious = self.class_counts
        return benign == 0 or malicious == 0

    @property
    def rows(self) -> int:
        return sum(self.class_counts)

    def _check_schema(self, schema_hash: int) -> None:
        if schema_hash != self.schema_hash:
            raise SchemaMismatch(self.schema_hash, schema_hash, "feature vector")

    def predict_array(self, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(malicious mask, score) for a raw feature matrix already in schema order"""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[0] == 0:
            return np.zeros(0, dtype=bool), np.zeros(0, dtype=np.float64)
        return self.estimator.predict_labels(X), self.estimator.predict_scores(X)


def _make_estimator(spec: AlgorithmSpec) -> Estimator:
    if spec.kind is AlgorithmKind.KNN:
        return KNearestNeighbors(k=spec.k)
    if spec.kind is AlgorithmKind.DECISION_TREE:
        return DecisionTree(max_depth=spec.dt_max_depth)
    if spec.kind is AlgorithmKind.RANDOM_FOREST:
        return RandomForest(n_trees=spec.n_trees, max_features=spec.max_features,
                            bootstrap=spec.bootstrap, seed=spec.seed, n_jobs=spec.n_jobs)
    return GradientBoosting(n_stages=spec.n_stages, learning_rate=spec.learning_rate,
                            max_depth=spec.gbdt_max_depth)


def train(spec: AlgorithmSpec, ds: LabeledDataset, trained_at: Optional[float] = None,
          monitor: Optional[PerformanceMonitor] = None) -> DetectionModel:
    """Fit the selected algorithm on a labeled dataset

    trained_at defaults to the end of the dataset window (simulated time).
    """
    if len(ds) == 0:
        raise EmptyWindow("cannot train on an empty dataset")
    hashes = {row.vector.schema_hash for row in ds.rows}
    if len(hashes) > 1:
        raise SchemaMismatch(ds.schema_hash, next(h for h in hashes if h != ds.schema_hash),
                             "dataset")

    X, y = ds.X, ds.y
    estimator = _make_estimator(spec)
    with OperationTimer(f"train.{spec.kind.value}", monitor, rows=len(y)) as timer:
        estimator.fit(X, y)

    model = DetectionModel(
        algorithm=spec,
        schema_hash=ds.schema_hash,
        trained_at=ds.window.end if trained_at is None else float(trained_at),
        train_window=ds.window,
        class_counts=ds.class_counts,
        estimator=estimator,
        train_seconds=timer.duration,
    )
    if model.is_constant:
        logger.warning("Single-class training set; model is a constant predictor",
                       algorithm=spec.kind.value, class_counts=model.class_counts)
    logger.debug("Model trained", algorithm=spec.kind.value, rows=len(y),
                 class_counts=model.class_counts, seconds=round(timer.duration, 6))
    return model


def predict(model: DetectionModel, vector: FeatureVector) -> Tuple[Label, float]:
    model._check_schema(vector.schema_hash)
    labels, scores = model.predict_array(vector.as_array().reshape(1, -1))
    return (Label.MALICIOUS if labels[0] else Label.BENIGN), float(scores[0])


def predict_many(model: DetectionModel,
                 vectors: Sequence[FeatureVector]) -> List[Tuple[Label, float]]:
    """Batch form of predict; one matrix pass per call"""
    if not vectors:
        return []
    for vector in vectors:
        model._check_schema(vector.schema_hash)
    X = np.array([vector.values for vector in vectors], dtype=np.float64)
    labels, scores = model.predict_array(X)
    return [(Label.MALICIOUS if flag else Label.BENIGN, float(score))
            for flag, score in zip(labels, scores)]
