"""
T_duration sweep: last-window F1 and training cost per algorithm and window length
"""

import math
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import pandas as pd

from ..adapt.policy import UpdatePolicy
from ..core.logger import logger
from ..core.types import HostKey, Label, NetConfig, PacketRecord
from ..ml.algorithms import AlgorithmKind, AlgorithmSpec
from .replay import replay

SWEEP_COLUMNS = ['algorithm', 't_duration', 'last_f1', 'train_rows', 'updates',
                 'train_seconds_mean', 'train_seconds_variance']


@dataclass(frozen=True)
class SweepRow:
    algorithm: str
    t_duration: float
    last_f1: Optional[float]
    train_rows: int
    updates: int
    train_seconds_mean: float
    train_seconds_variance: float

    def to_dict(self, include_timings: bool = True) -> Dict[str, object]:
        return {
            'algorithm': self.algorithm,
            't_duration': 'inf' if math.isinf(self.t_duration) else self.t_duration,
            'last_f1': self.last_f1,
            'train_rows': self.train_rows,
            'updates': self.updates,
            'train_seconds_mean': self.train_seconds_mean if include_timings else None,
            'train_seconds_variance': self.train_seconds_variance if include_timings else None,
        }


def duration_sweep(records: Sequence[PacketRecord], cfg: NetConfig,
                   algorithms: Iterable[AlgorithmKind], durations: Iterable[float],
                   base_spec: AlgorithmSpec, t_update: float, eval_window: float, *,
                   truth: Optional[Dict[HostKey, Label]] = None,
                   origin: Optional[float] = None) -> List[SweepRow]:
    """One DUM replay per (algorithm, t_duration); durations may include math.inf"""
    records = list(records)
    rows = []
    for kind in algorithms:
        spec = base_spec.with_kind(kind)
        for t_duration in durations:
            policy = UpdatePolicy.dum(t_duration, t_update)
            report = replay(records, policy, spec, cfg, eval_window, truth=truth,
                            origin=origin, top_ports=None)
            timings = report.training_times
            seconds = [tt.seconds for tt in timings]
            row = SweepRow(
                algorithm=spec.kind.value,
                t_duration=float(t_duration),
                last_f1=report.last_f1(),
                train_rows=timings[-1].rows if timings else 0,
                updates=len(timings),
                train_seconds_mean=statistics.fmean(seconds) if seconds else 0.0,
                train_seconds_variance=statistics.pvariance(seconds) if seconds else 0.0,
            )
            logger.info("Sweep point", algorithm=row.algorithm, t_duration=t_duration,
                        last_f1=row.last_f1, train_rows=row.train_rows)
            rows.append(row)
    return rows


def write_sweep(path: Union[str, Path], rows: List[SweepRow],
                include_timings: bool = True) -> None:
    frame = pd.DataFrame([row.to_dict(include_timings) for row in rows], columns=SWEEP_COLUMNS)
    frame.to_csv(path, index=False, lineterminator='\n', na_rep='')
