"""
Model updater: periodic retraining over the traffic store
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional

from ..core.errors import ChannelUnavailable, EmptyWindow, HoneyguardError
from ..core.logger import logger
from ..core.types import NetConfig, TimeWindow
from ..features.dataset import balance_dataset, build_dataset
from ..ingest.store import TrafficStore
from ..ml.algorithms import AlgorithmSpec
from ..ml.model import DetectionModel, train
from ..utils.performance import PerformanceMonitor
from .channel import ModelChannel
from .policy import PolicyKind, UpdatePolicy, training_window

SKIP_EMPTY_WINDOW = "empty_window"
SKIP_SINGLE_CLASS = "single_class"
SKIP_CHANNEL = "channel_unavailable"


@dataclass(frozen=True)
class UpdateEvent:
    """One scheduled update; times are relative to the replay origin"""
    t: float
    window: TimeWindow
    rows: int
    benign: int
    malicious: int
    train_seconds: float
    published: bool
    skip_reason: Optional[str] = None

    def to_dict(self, include_timings: bool = True) -> Dict[str, Any]:
        return {
            't': self.t,
            'window_start': self.window.start,
            'window_end': self.window.end,
            'rows': self.rows,
            'benign': self.benign,
            'malicious': self.malicious,
            'train_seconds': self.train_seconds if include_timings else None,
            'published': self.published,
            'skip_reason': self.skip_reason,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "UpdateEvent":
        return cls(
            t=float(data['t']),
            window=TimeWindow(float(data['window_start']), float(data['window_end'])),
            rows=int(data['rows']),
            benign=int(data['benign']),
            malicious=int(data['malicious']),
            train_seconds=float(data.get('train_seconds') or 0.0),
            published=bool(data['published']),
            skip_reason=data.get('skip_reason'),
        )


class ModelUpdater:
    """Builds, trains and publishes a model at every scheduled time

    Times passed to step() are relative to `origin`; store timestamps are absolute.
    Failures are recorded as unpublished events so the gateway keeps its previous model.
    """

    def __init__(self, store: TrafficStore, policy: UpdatePolicy, spec: AlgorithmSpec,
                 channel: ModelChannel, net_cfg: NetConfig, origin: float = 0.0,
                 retain_on_single_class: bool = True, balance_ratio: Optional[float] = None,
                 monitor: Optional[PerformanceMonitor] = None):
        self.store = store
        self.policy = policy
        self.spec = spec
        self.channel = channel
        self.net_cfg = net_cfg
        self.origin = origin
        self.retain_on_single_class = retain_on_single_class
        self.balance_ratio = balance_ratio
        self.monitor = monitor
        self.events: List[UpdateEvent] = []
        self.last_model: Optional[DetectionModel] = None
        self._scm_done = False

    @property
    def accepting(self) -> bool:
        """SCM stops capturing once its only model exists"""
        return not self._scm_done

    def step(self, t: float) -> Optional[UpdateEvent]:
        window = training_window(self.policy, t)
        if window is None:
            return None

        absolute = window.shift(self.origin)
        event = self._update(t, window, absolute)
        self.events.append(event)

        if self.policy.kind is PolicyKind.SCM:
            self._scm_done = True
            removed = self.store.evict_before(self.origin + t)
            logger.info("SCM capture finished; store emptied", t=t, removed=removed)
        elif self.policy.evicts:
            self.store.evict_before(self.origin + max(0.0, t - self.policy.t_duration))
        return event

    def _update(self, t: float, window: TimeWindow, absolute: TimeWindow) -> UpdateEvent:
        def skipped(reason: str, rows: int = 0, benign: int = 0, malicious: int = 0,
                    seconds: float = 0.0) -> UpdateEvent:
            logger.info("Update skipped; keeping previous model", t=t, reason=reason,
                        window_start=window.start, window_end=window.end, rows=rows)
            return UpdateEvent(t, window, rows, benign, malicious, seconds, False, reason)

        try:
            dataset = build_dataset(self.store, absolute, self.net_cfg)
        except EmptyWindow:
            return skipped(SKIP_EMPTY_WINDOW)
        dataset = balance_dataset(dataset, self.balance_ratio, self.spec.seed)
        benign, malicious = dataset.class_counts

        try:
            model = train(self.spec, dataset, monitor=self.monitor)
        except (HoneyguardError, ValueError, FloatingPointError) as e:
            logger.log_error(e, "model training", t=t)
            return skipped(f"error: {e}", len(dataset), benign, malicious)

        if model.is_constant and self.retain_on_single_class:
            return skipped(SKIP_SINGLE_CLASS, len(dataset), benign, malicious, model.train_seconds)

        try:
            self.channel.publish(model)
        except ChannelUnavailable as e:
            logger.warning("Model channel unavailable; retrying next cycle", t=t, error=str(e))
            return UpdateEvent(t, window, len(dataset), benign, malicious,
                               model.train_seconds, False, SKIP_CHANNEL)

        self.last_model = model
        logger.info("Model published", t=t, algorithm=self.spec.kind.value,
                    window_start=window.start, window_end=window.end,
                    rows=len(dataset), benign=benign, malicious=malicious)
        return UpdateEvent(t, window, len(dataset), benign, malicious, model.train_seconds, True)


def run_updater(store: TrafficStore, policy: UpdatePolicy, spec: AlgorithmSpec,
                channel: ModelChannel, clock: Iterable[float], net_cfg: NetConfig,
                origin: float = 0.0, **kwargs) -> List[UpdateEvent]:
    """Drive an updater over a monotone clock and return its update log"""
    updater = ModelUpdater(store, policy, spec, channel, net_cfg, origin=origin, **kwargs)
    last = -math.inf
    for t in clock:
        if t < last:
            raise ValueError(f"clock went backwards: {t} after {last}")
        last = t
        updater.step(t)
    return updater.events
