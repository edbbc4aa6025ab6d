"""
Gateway detector: per-window host classification and traffic handling
"""

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from ..adapt.channel import ModelChannel
from ..core.errors import ChannelUnavailable, ConfigError, SchemaMismatch
from ..core.logger import logger
from ..core.types import (HostKey, IngestStats, Label, NetConfig, PacketRecord, TimeWindow,
                          direction_of, remote_host)
from ..features.extract import SCHEMA_HASH, HostTraffic, encode, extract_features
from ..ml.model import DetectionModel, predict_many
from .malicious_list import MaliciousList


class HandlingPolicy(Enum):
    RECORD_AND_PASS = "record_and_pass"
    FILTER_DROP = "filter_drop"

    @classmethod
    def parse(cls, value) -> "HandlingPolicy":
        if isinstance(value, HandlingPolicy):
            return value
        try:
            return cls(str(value).strip().lower().replace('-', '_'))
        except ValueError as e:
            raise ConfigError(f"unknown handling policy {value!r}") from e


class Verdict(Enum):
    FORWARD = "forward"
    DROP = "drop"
    MIRROR = "mirror"


def apply_policy(p: PacketRecord, malicious: MaliciousList, policy: HandlingPolicy) -> Verdict:
    """Forward unlisted traffic; listed hosts are dropped or mirrored to the honeypot"""
    if p.src_addr not in malicious and p.dst_addr not in malicious:
        return Verdict.FORWARD
    return Verdict.DROP if policy is HandlingPolicy.FILTER_DROP else Verdict.MIRROR


@dataclass
class ClassificationResult:
    """Verdicts for one closed evaluation window (times relative to the origin)"""
    window: TimeWindow
    verdicts: List[Tuple[HostKey, Label, float]] = field(default_factory=list)
    deferred: bool = False
    model_trained_at: Optional[float] = None
    active_hosts: int = 0


class Gateway:
    def __init__(self, net_cfg: NetConfig, channel: Optional[ModelChannel] = None,
                 eval_window: float = 3600.0,
                 handling: HandlingPolicy = HandlingPolicy.RECORD_AND_PASS,
                 origin: float = 0.0, stats: Optional[IngestStats] = None):
        if eval_window <= 0:
            raise ConfigError(f"eval_window must be positive, got {eval_window}")
        self.net_cfg = net_cfg
        self.channel = channel
        self.eval_window = eval_window
        self.handling = HandlingPolicy.parse(handling)
        self.origin = origin
        self.stats = stats if stats is not None else IngestStats()
        self.malicious_list = MaliciousList()
        self.model: Optional[DetectionModel] = None
        self.verdict_counts: Counter = Counter()
        self.deferred_windows = 0
        self._hosts: Dict[HostKey, HostTraffic] = {}

    @property
    def active_hosts(self) -> List[HostKey]:
        return sorted(self._hosts)

    def observe(self, p: PacketRecord) -> None:
        """Accumulate a packet into the open window; not-applicable packets are counted"""
        direction = direction_of(p, self.net_cfg)
        if direction is None:
            self.stats.not_applicable += 1
            return
        host = remote_host(p, direction)
        traffic = self._hosts.get(host)
        if traffic is None:
            traffic = self._hosts[host] = HostTraffic(host)
        traffic.add(p, direction)

    def handle(self, p: PacketRecord) -> Verdict:
        """Observe the packet, then decide what happens to it"""
        self.observe(p)
        verdict = apply_policy(p, self.malicious_list, self.handling)
        self.verdict_counts[verdict] += 1
        return verdict

    def swap_model(self, model: DetectionModel) -> None:
        if model.schema_hash != SCHEMA_HASH:
            raise SchemaMismatch(SCHEMA_HASH, model.schema_hash, "gateway model")
        if model is not self.model:
            logger.info("Gateway model swapped", trained_at=model.trained_at,
                        algorithm=model.algorithm.kind.value, rows=model.rows)
        self.model = model

    def _refresh_model(self) -> None:
        if self.channel is None:
            return
        try:
            latest = self.channel.latest()
        except ChannelUnavailable as e:
            logger.warning("Model channel unreadable; keeping current model", error=str(e),
                           has_model=self.model is not None)
            return
        if latest is not None and latest is not self.model:
            self.swap_model(latest)

    def classify_active_hosts(self, t_end: float) -> ClassificationResult:
        """Close the window ending at t_end (relative) and classify every host seen in it"""
        self._refresh_model()
        window = TimeWindow(t_end - self.eval_window, t_end)
        hosts, self._hosts = self._hosts, {}

        if self.model is None:
            self.deferred_windows += 1
            logger.info("No model yet; window deferred", window_start=window.start,
                        window_end=window.end, active_hosts=len(hosts))
            return ClassificationResult(window, deferred=True, active_hosts=len(hosts))

        model = self.model
        ordered = sorted(hosts)
        absolute = window.shift(self.origin)
        vectors = [encode(extract_features(hosts[host], absolute)) for host in ordered]
        predictions = predict_many(model, vectors)

        verdicts = []
        for host, (label, score) in zip(ordered, predictions):
            verdicts.append((host, label, score))
            if label is Label.MALICIOUS:
                self.malicious_list.flag(host, t_end)
        logger.debug("Window classified", window_end=t_end, active_hosts=len(verdicts),
                     flagged=sum(1 for _, label, _ in verdicts if label is Label.MALICIOUS))
        return ClassificationResult(window, verdicts, False, model.trained_at - self.origin,
                                    len(verdicts))
