"""
Per-host traffic features (incoming/outgoing header statistics)
"""

import hashlib
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from ..core.errors import EmptyHost
from ..core.types import Direction, HostKey, PacketRecord, TimeWindow

FEATURE_NAMES: Tuple[str, ...] = (
    'in_min_interval',
    'in_max_len',
    'in_min_len',
    'in_proto',
    'in_dst_port',
    'in_ttl',
    'out_min_interval',
    'out_max_len',
    'out_min_len',
)
N_FEATURES = len(FEATURE_NAMES)


def schema_hash(names: Sequence[str] = FEATURE_NAMES) -> int:
    """64-bit hash of the ordered feature-name list"""
    digest = hashlib.blake2b("\x1f".join(names).encode('utf-8'), digest_size=8).digest()
    return int.from_bytes(digest, 'little')


SCHEMA_HASH = schema_hash()


@dataclass
class HostTraffic:
    """Packets of one remote host, split by direction"""
    host: HostKey
    incoming: List[PacketRecord] = field(default_factory=list)
    outgoing: List[PacketRecord] = field(default_factory=list)

    def add(self, packet: PacketRecord, direction: Direction) -> None:
        if direction is Direction.INCOMING:
            self.incoming.append(packet)
        else:
            self.outgoing.append(packet)

    @property
    def packet_count(self) -> int:
        return len(self.incoming) + len(self.outgoing)


@dataclass(frozen=True)
class HostWindowFeatures:
    host: HostKey
    window: TimeWindow
    in_min_interval: float
    in_max_len: int
    in_min_len: int
    in_proto: int
    in_dst_port: int
    in_ttl: int
    out_min_interval: float
    out_max_len: int
    out_min_len: int
    in_count: int
    out_count: int


@dataclass(frozen=True)
class FeatureVector:
    values: Tuple[float, ...]
    schema_hash: int = SCHEMA_HASH

    def __post_init__(self) -> None:
        if len(self.values) != N_FEATURES:
            raise ValueError(f"expected {N_FEATURES} features, got {len(self.values)}")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError(f"non-finite feature value in {self.values}")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


def group_by_host(records: Iterable) -> Dict[HostKey, HostTraffic]:
    """Group (packet, direction, host) records into HostTraffic accumulators"""
    groups: Dict[HostKey, HostTraffic] = {}
    for packet, direction, host in records:
        traffic = groups.get(host)
        if traffic is None:
            traffic = groups[host] = HostTraffic(host)
        traffic.add(packet, direction)
    return groups


def min_interval(timestamps: Sequence[float], sentinel: float) -> float:
    """Smallest gap between successive timestamps; sentinel for fewer than 2"""
    if len(timestamps) < 2:
        return sentinel
    ordered = np.sort(np.asarray(timestamps, dtype=np.float64))
    return float(np.diff(ordered).min())


def mode(values: Iterable[int]) -> int:
    """Most frequent value, smallest value on ties; 0 for no values"""
    counts = Counter(values)
    if not counts:
        return 0
    return min(counts.items(), key=lambda item: (-item[1], item[0]))[0]


def extract_features(traffic: HostTraffic, window: TimeWindow) -> HostWindowFeatures:
    """Compute the per-host feature row for one window"""
    incoming, outgoing = traffic.incoming, traffic.outgoing
    if not incoming and not outgoing:
        raise EmptyHost(f"host {traffic.host} has no packets in {window}")

    in_lengths = [p.length for p in incoming]
    out_lengths = [p.length for p in outgoing]

    return HostWindowFeatures(
        host=traffic.host,
        window=window,
        in_min_interval=min_interval([p.ts for p in incoming], window.duration),
        in_max_len=max(in_lengths, default=0),
        in_min_len=min(in_lengths, default=0),
        in_proto=mode(p.proto for p in incoming),
        in_dst_port=mode(p.dst_port for p in incoming),
        in_ttl=mode(p.ttl for p in incoming),
        out_min_interval=min_interval([p.ts for p in outgoing], window.duration),
        out_max_len=max(out_lengths, default=0),
        out_min_len=min(out_lengths, default=0),
        in_count=len(incoming),
        out_count=len(outgoing),
    )


def encode(features: HostWindowFeatures) -> FeatureVector:
    """Raw numeric vector in FEATURE_NAMES order (no scaling)"""
    return FeatureVector(tuple(float(getattr(features, name)) for name in FEATURE_NAMES))
