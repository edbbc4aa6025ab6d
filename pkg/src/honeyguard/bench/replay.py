"""
End-to-end replay: store, updater and gateway driven by packet time
"""

import math
from dataclasses import dataclass, field
from itertools import chain
from typing import Any, Dict, Iterable, List, Optional

from ..adapt.channel import InProcessChannel, ModelChannel
from ..adapt.policy import UpdatePolicy, next_update_after
from ..adapt.updater import ModelUpdater, UpdateEvent
from ..core.logger import logger
from ..core.types import (HostKey, IngestStats, Label, NetConfig, PacketRecord, TimeWindow,
                          direction_of, remote_host)
from ..gateway.detector import Gateway, HandlingPolicy
from ..gateway.malicious_list import MaliciousList
from ..ingest.labeling import label_hosts
from ..ingest.store import TrafficStore
from ..ml.algorithms import AlgorithmSpec
from ..ml.metrics import EvalMetrics, f1
from ..utils.performance import OperationTimer, PerformanceMonitor
from .ports import FlowCounter, PortShare


@dataclass(frozen=True)
class WindowResult:
    """One evaluation window; metrics is None when the window was deferred"""
    window: TimeWindow
    metrics: Optional[EvalMetrics]
    active_hosts: int
    labeled_hosts: int
    model_trained_at: Optional[float]

    @property
    def deferred(self) -> bool:
        return self.metrics is None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'window_start': self.window.start,
            'window_end': self.window.end,
            'metrics': None if self.metrics is None else self.metrics.to_dict(),
            'active_hosts': self.active_hosts,
            'labeled_hosts': self.labeled_hosts,
            'model_trained_at': self.model_trained_at,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "WindowResult":
        metrics = data.get('metrics')
        return cls(
            window=TimeWindow(float(data['window_start']), float(data['window_end'])),
            metrics=None if metrics is None else EvalMetrics.from_dict(metrics),
            active_hosts=int(data['active_hosts']),
            labeled_hosts=int(data['labeled_hosts']),
            model_trained_at=data.get('model_trained_at'),
        )


@dataclass(frozen=True)
class TrainingTime:
    t: float
    rows: int
    seconds: float


@dataclass
class EvaluationReport:
    windows: List[WindowResult] = field(default_factory=list)
    updates: List[UpdateEvent] = field(default_factory=list)
    port_distribution: List[PortShare] = field(default_factory=list)
    malicious_list: MaliciousList = field(default_factory=MaliciousList)
    verdict_counts: Dict[str, int] = field(default_factory=dict)
    ingest_stats: Dict[str, int] = field(default_factory=dict)
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def training_times(self) -> List[TrainingTime]:
        """Every update that actually trained a model"""
        return [TrainingTime(e.t, e.rows, e.train_seconds)
                for e in self.updates if e.rows > 0 and not str(e.skip_reason).startswith('error')]

    @property
    def deferred_windows(self) -> int:
        return sum(1 for w in self.windows if w.deferred)

    def scored_windows(self, start: float = -math.inf, end: float = math.inf) -> List[WindowResult]:
        """Non-deferred, non-degenerate windows lying inside [start, end]"""
        return [w for w in self.windows
                if not w.deferred and not w.metrics.degenerate
                and w.window.start >= start and w.window.end <= end]

    def mean_f1(self, start: float = -math.inf, end: float = math.inf) -> Optional[float]:
        scored = self.scored_windows(start, end)
        if not scored:
            return None
        return sum(w.metrics.f1 for w in scored) / len(scored)

    def last_f1(self) -> Optional[float]:
        scored = self.scored_windows()
        return scored[-1].metrics.f1 if scored else None

    def to_dict(self, include_timings: bool = True) -> Dict[str, Any]:
        return {
            'params': self.params,
            'windows': [w.to_dict() for w in self.windows],
            'updates': [e.to_dict(include_timings) for e in self.updates],
            'port_distribution': [s.to_dict() for s in self.port_distribution],
            'malicious_list': self.malicious_list.to_dict(),
            'verdict_counts': dict(sorted(self.verdict_counts.items())),
            'ingest_stats': self.ingest_stats,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EvaluationReport":
        return cls(
            windows=[WindowResult.from_dict(w) for w in data.get('windows', [])],
            updates=[UpdateEvent.from_dict(e) for e in data.get('updates', [])],
            port_distribution=[PortShare.from_dict(s) for s in data.get('port_distribution', [])],
            malicious_list=MaliciousList.from_dict(data.get('malicious_list', {})),
            verdict_counts=dict(data.get('verdict_counts', {})),
            ingest_stats=dict(data.get('ingest_stats', {})),
            params=dict(data.get('params', {})),
        )


def default_origin(first_ts: float, eval_window: float) -> float:
    """First packet time aligned down to the evaluation-window grid"""
    return math.floor(first_ts / eval_window) * eval_window


def _score(verdicts, truth: Dict[HostKey, Label]) -> tuple:
    preds, truths = [], []
    for host, label, _ in verdicts:
        expected = truth.get(host)
        if expected is not None:
            preds.append(label)
            truths.append(expected)
    return f1(preds, truths), len(truths)


def replay(source: Iterable[PacketRecord], policy: UpdatePolicy, spec: AlgorithmSpec,
           cfg: NetConfig, eval_window: float, *,
           truth: Optional[Dict[HostKey, Label]] = None,
           origin: Optional[float] = None,
           duration: Optional[float] = None,
           handling: HandlingPolicy = HandlingPolicy.RECORD_AND_PASS,
           channel: Optional[ModelChannel] = None,
           retain_on_single_class: bool = True,
           balance_ratio: Optional[float] = None,
           top_ports: Optional[int] = 10,
           stats: Optional[IngestStats] = None,
           monitor: Optional[PerformanceMonitor] = None) -> EvaluationReport:
    """Replay a time-ordered packet stream and score every evaluation window

    Without `truth`, ground truth is honeypot-contact labeling over the whole
    stream (the stream is materialized first). At a time where a window closes
    and an update is due, the window is classified before the update runs.
    """
    stats = stats if stats is not None else IngestStats()
    if truth is None:
        source = list(source)
        truth = label_hosts(source, cfg).labels()

    packets = iter(source)
    first = next(packets, None)
    if origin is None:
        origin = 0.0 if first is None else default_origin(first.ts, eval_window)

    channel = channel if channel is not None else InProcessChannel()
    channel.reset()
    store = TrafficStore(stats)
    updater = ModelUpdater(store, policy, spec, channel, cfg, origin=origin,
                           retain_on_single_class=retain_on_single_class,
                           balance_ratio=balance_ratio, monitor=monitor)
    gateway = Gateway(cfg, channel, eval_window, handling, origin=origin, stats=stats)
    flows = FlowCounter()
    windows: List[WindowResult] = []

    next_eval = eval_window
    next_update = next_update_after(policy, 0.0)

    def advance(t: float) -> None:
        """Fire every boundary at or before t (relative)"""
        nonlocal next_eval, next_update
        while True:
            due_eval = next_eval <= t
            due_update = next_update is not None and next_update <= t
            if not (due_eval or due_update):
                return
            if due_eval and (not due_update or next_eval <= next_update):
                result = gateway.classify_active_hosts(next_eval)
                if result.deferred:
                    windows.append(WindowResult(result.window, None, result.active_hosts,
                                                0, None))
                else:
                    metrics, labeled = _score(result.verdicts, truth)
                    windows.append(WindowResult(result.window, metrics, result.active_hosts,
                                                labeled, result.model_trained_at))
                next_eval += eval_window
            else:
                updater.step(next_update)
                next_update = next_update_after(policy, next_update)

    last_rel = None
    with OperationTimer("replay", monitor) as timer:
        for p in chain([first], packets) if first is not None else ():
            rel = p.ts - origin
            if rel < 0 or (last_rel is not None and rel < last_rel):
                stats.out_of_order += 1
                logger.warning("Packet out of order; skipped", ts=p.ts, origin=origin)
                continue
            last_rel = rel
            advance(rel)

            direction = direction_of(p, cfg)
            if direction is None:
                stats.not_applicable += 1
                continue
            flows.add(p, direction)
            if updater.accepting:
                store.append(p, direction, remote_host(p, direction))
            gateway.handle(p)

        end = 0.0 if last_rel is None else (math.floor(last_rel / eval_window) + 1) * eval_window
        if duration is not None:
            end = max(end, duration)
        advance(end)

    report = EvaluationReport(
        windows=windows,
        updates=list(updater.events),
        port_distribution=flows.distribution(top_ports),
        malicious_list=gateway.malicious_list,
        verdict_counts={v.value: n for v, n in gateway.verdict_counts.items()},
        ingest_stats=stats.as_dict(),
        params={
            'policy': policy.kind.value,
            't_duration': 'inf' if policy.is_infinite else policy.t_duration,
            't_update': policy.t_update,
            'algorithm': spec.kind.value,
            'seed': spec.seed,
            'eval_window': eval_window,
            'origin': origin,
            'handling': gateway.handling.value,
        },
    )
    scored = report.mean_f1()
    logger.info("Replay finished", policy=policy.label(), algorithm=spec.kind.value,
                windows=len(windows), deferred=report.deferred_windows,
                updates=len(report.updates), mean_f1=scored,
                seconds=round(timer.duration, 3))
    return report
