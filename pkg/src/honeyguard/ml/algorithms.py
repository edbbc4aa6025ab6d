"""
Algorithm selection and hyperparameters
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from ..core.errors import ConfigError
from ..features.extract import N_FEATURES


class AlgorithmKind(Enum):
    KNN = "knn"
    DECISION_TREE = "dt"
    RANDOM_FOREST = "rf"
    GBDT = "gbdt"

    @property
    def wire_id(self) -> int:
        return _WIRE_IDS[self]

    @classmethod
    def from_wire_id(cls, value: int) -> "AlgorithmKind":
        for kind, wire_id in _WIRE_IDS.items():
            if wire_id == value:
                return kind
        raise ValueError(f"unknown algorithm id {value}")

    @classmethod
    def parse(cls, value) -> "AlgorithmKind":
        if isinstance(value, AlgorithmKind):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError as e:
            raise ConfigError(f"unknown algorithm {value!r}; expected one of "
                              f"{[k.value for k in cls]}") from e


_WIRE_IDS = {
    AlgorithmKind.KNN: 1,
    AlgorithmKind.DECISION_TREE: 2,
    AlgorithmKind.RANDOM_FOREST: 3,
    AlgorithmKind.GBDT: 4,
}


@dataclass(frozen=True)
class AlgorithmSpec:
    """Classifier choice plus library-default hyperparameters"""
    kind: AlgorithmKind
    k: int = 5
    n_trees: int = 100
    max_features: int = int(math.floor(math.sqrt(N_FEATURES)))
    bootstrap: bool = True
    n_stages: int = 100
    learning_rate: float = 0.1
    gbdt_max_depth: int = 3
    dt_max_depth: Optional[int] = None
    seed: int = 0
    n_jobs: int = field(default=1, compare=False)

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.n_trees < 1 or self.n_stages < 1:
            raise ConfigError("n_trees and n_stages must be >= 1")
        if not 1 <= self.max_features <= N_FEATURES:
            raise ConfigError(f"max_features must be in [1, {N_FEATURES}]")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.gbdt_max_depth < 1 or (self.dt_max_depth is not None and self.dt_max_depth < 1):
            raise ConfigError("tree depths must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must fit in 64 bits")

    @classmethod
    def from_config(cls, cfg, kind=None) -> "AlgorithmSpec":
        """Build from the `learning` section; kind overrides learning.algorithm"""
        dt_max_depth = cfg.get('learning.dt_max_depth')
        return cls(
            kind=AlgorithmKind.parse(kind if kind is not None else cfg.get('learning.algorithm', 'dt')),
            k=int(cfg.get('learning.k', 5)),
            n_trees=int(cfg.get('learning.n_trees', 100)),
            max_features=int(cfg.get('learning.max_features', 3)),
            bootstrap=bool(cfg.get('learning.bootstrap', True)),
            n_stages=int(cfg.get('learning.n_stages', 100)),
            learning_rate=float(cfg.get('learning.learning_rate', 0.1)),
            gbdt_max_depth=int(cfg.get('learning.gbdt_max_depth', 3)),
            dt_max_depth=None if dt_max_depth is None else int(dt_max_depth),
            seed=int(cfg.get('learning.seed', 0)),
            n_jobs=int(cfg.get('learning.n_jobs', 1)),
        )

    def with_kind(self, kind) -> "AlgorithmSpec":
        return replace(self, kind=AlgorithmKind.parse(kind))
