"""
Labeled training datasets built from a traffic-store window
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..core.errors import EmptyWindow
from ..core.logger import logger
from ..core.types import HostKey, Label, NetConfig, TimeWindow
from ..ingest.labeling import label_hosts
from ..ingest.store import TrafficStore
from .extract import (FEATURE_NAMES, SCHEMA_HASH, FeatureVector, encode,
                      extract_features, group_by_host)


@dataclass(frozen=True)
class DatasetRow:
    vector: FeatureVector
    label: Label
    host: HostKey


@dataclass
class LabeledDataset:
    rows: List[DatasetRow]
    window: TimeWindow

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def class_counts(self) -> Tuple[int, int]:
        """(benign, malicious)"""
        malicious = sum(1 for row in self.rows if row.label is Label.MALICIOUS)
        return len(self.rows) - malicious, malicious

    @property
    def schema_hash(self) -> int:
        return self.rows[0].vector.schema_hash if self.rows else SCHEMA_HASH

    @property
    def X(self) -> np.ndarray:
        if not self.rows:
            return np.empty((0, len(FEATURE_NAMES)), dtype=np.float64)
        return np.array([row.vector.values for row in self.rows], dtype=np.float64)

    @property
    def y(self) -> np.ndarray:
        return np.array([row.label.value for row in self.rows], dtype=np.int8)

    def to_dataframe(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.X, columns=list(FEATURE_NAMES))
        frame['label'] = [row.label.name.lower() for row in self.rows]
        frame['host'] = [row.host.addr for row in self.rows]
        return frame

    def to_csv(self, path: Union[str, Path]) -> None:
        self.to_dataframe().to_csv(path, index=False, lineterminator='\n')


def build_dataset(store: TrafficStore, window: TimeWindow, cfg: NetConfig) -> LabeledDataset:
    """One row per labeled remote host active in the window; unlabeled hosts are dropped"""
    records = store.snapshot(window)
    labels = label_hosts(records, cfg)
    if not len(labels):
        raise EmptyWindow(f"no labeled hosts in [{window.start}, {window.end})")

    groups = group_by_host(records)
    rows = []
    for host in sorted(groups):
        label = labels.label_of(host)
        if label is None:
            continue
        features = extract_features(groups[host], window)
        rows.append(DatasetRow(encode(features), label, host))

    dataset = LabeledDataset(rows, window)
    benign, malicious = dataset.class_counts
    logger.debug("Dataset built", window_start=window.start, window_end=window.end,
                 rows=len(rows), benign=benign, malicious=malicious,
                 unlabeled=len(groups) - len(rows))
    return dataset


def balance_dataset(dataset: LabeledDataset, ratio: Optional[float],
                    seed: int = 0) -> LabeledDataset:
    """Downsample the majority class to at most ratio x the minority class"""
    if ratio is None or len(dataset) == 0:
        return dataset
    if ratio < 1:
        raise ValueError(f"balance ratio must be >= 1, got {ratio}")

    benign, malicious = dataset.class_counts
    if min(benign, malicious) == 0:
        return dataset
    majority = Label.BENIGN if benign > malicious else Label.MALICIOUS
    limit = int(ratio * min(benign, malicious))
    majority_idx = [i for i, row in enumerate(dataset.rows) if row.label is majority]
    if len(majority_idx) <= limit:
        return dataset

    rng = np.random.default_rng(seed)
    keep = set(rng.choice(majority_idx, size=limit, replace=False).tolist())
    rows = [row for i, row in enumerate(dataset.rows) if row.label is not majority or i in keep]
    logger.debug("Dataset balanced", majority=majority.name, kept=limit,
                 dropped=len(majority_idx) - limit)
    return LabeledDataset(rows, dataset.window)
