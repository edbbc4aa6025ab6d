"""
Domain types shared by every honeyguard module (no I/O)
"""

from __future__ import annotations

import ipaddress
import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterable, Optional, Tuple

from .errors import ConfigError, InvalidRecord

TCP = 6
UDP = 17
PORTED_PROTOCOLS = (TCP, UDP)
MIN_IPV4_LENGTH = 20


class Direction(Enum):
    """Incoming = remote -> local, Outgoing = local -> remote"""
    INCOMING = "incoming"
    OUTGOING = "outgoing"


class Label(Enum):
    """Host label; MALICIOUS is the positive class everywhere"""
    BENIGN = 0
    MALICIOUS = 1

    @classmethod
    def parse(cls, value: Any) -> "Label":
        if isinstance(value, Label):
            return value
        text = str(value).strip().lower()
        if text in ('1', 'malicious', 'm'):
            return cls.MALICIOUS
        if text in ('0', 'benign', 'b'):
            return cls.BENIGN
        raise ValueError(f"unknown label: {value!r}")


@dataclass(frozen=True)
class PacketRecord:
    """One normalized IPv4 packet observation"""
    ts: float
    src_addr: str
    dst_addr: str
    src_port: int
    dst_port: int
    proto: int
    length: int
    ttl: int

    def __post_init__(self) -> None:
        if not isinstance(self.ts, (int, float)) or not math.isfinite(self.ts) or self.ts < 0:
            raise InvalidRecord(f"timestamp must be finite and non-negative: {self.ts!r}")
        for name in ('src_port', 'dst_port', 'proto', 'length', 'ttl'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise InvalidRecord(f"{name} must be an integer: {value!r}")
        if not 0 <= self.proto <= 255:
            raise InvalidRecord(f"protocol out of range: {self.proto}")
        if not 0 <= self.ttl <= 255:
            raise InvalidRecord(f"ttl out of range: {self.ttl}")
        if self.length < MIN_IPV4_LENGTH:
            raise InvalidRecord(f"length below IPv4 header size: {self.length}")
        for name in ('src_port', 'dst_port'):
            port = getattr(self, name)
            if not 0 <= port <= 65535:
                raise InvalidRecord(f"{name} out of range: {port}")
            if self.proto not in PORTED_PROTOCOLS and port != 0:
                raise InvalidRecord(f"{name} must be 0 for protocol {self.proto}")
        for name in ('src_addr', 'dst_addr'):
            try:
                ipaddress.IPv4Address(getattr(self, name))
            except (ipaddress.AddressValueError, ValueError) as e:
                raise InvalidRecord(f"{name} is not an IPv4 address: {getattr(self, name)!r}") from e

    def swap(self) -> "PacketRecord":
        """Same packet with endpoints exchanged"""
        return replace(
            self,
            src_addr=self.dst_addr, dst_addr=self.src_addr,
            src_port=self.dst_port, dst_port=self.src_port,
        )

    def to_dict(self) -> Dict[str, Any]:
        """NDJSON representation (wire key names)"""
        return {
            'ts': self.ts,
            'src_ip': self.src_addr,
            'dst_ip': self.dst_addr,
            'src_port': self.src_port,
            'dst_port': self.dst_port,
            'proto': self.proto,
            'len': self.length,
            'ttl': self.ttl,
        }

    @property
    def five_tuple(self) -> Tuple[str, str, int, int, int]:
        return (self.src_addr, self.dst_addr, self.src_port, self.dst_port, self.proto)


@dataclass(frozen=True, order=True)
class HostKey:
    """The remote (internet-side) endpoint a feature row describes"""
    addr: str

    def __str__(self) -> str:
        return self.addr


@dataclass(frozen=True)
class TimeWindow:
    """Half-open interval [start, end) in seconds"""
    start: float
    end: float

    def __post_init__(self) -> None:
        if not (self.end > self.start):
            raise ValueError(f"window end must exceed start: [{self.start}, {self.end})")

    @property
    def duration(self) -> float:
        return self.end - self.start

    def contains(self, ts: float) -> bool:
        return self.start <= ts < self.end

    def shift(self, offset: float) -> "TimeWindow":
        return TimeWindow(self.start + offset, self.end + offset)


@dataclass(frozen=True)
class NetConfig:
    """Local networks plus the honeypot and device address sets"""
    local_nets: Tuple[ipaddress.IPv4Network, ...]
    honeypot_addrs: FrozenSet[str]
    device_addrs: FrozenSet[str]
    _local_cache: Dict[str, bool] = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self) -> None:
        if not self.local_nets:
            raise ConfigError("at least one local network is required")
        overlap = self.honeypot_addrs & self.device_addrs
        if overlap:
            raise ConfigError(f"addresses are both honeypot and device: {sorted(overlap)}")
        for addr in self.honeypot_addrs | self.device_addrs:
            if not self.is_local(addr):
                raise ConfigError(f"{addr} is not inside the local networks")

    @classmethod
    def build(cls, local_nets: Iterable[str], honeypots: Iterable[str],
              devices: Iterable[str]) -> "NetConfig":
        try:
            nets = tuple(ipaddress.IPv4Network(str(n), strict=False) for n in local_nets)
            honeypot_addrs = frozenset(str(ipaddress.IPv4Address(str(a))) for a in honeypots)
            device_addrs = frozenset(str(ipaddress.IPv4Address(str(a))) for a in devices)
        except ValueError as e:
            raise ConfigError(f"invalid network configuration: {e}") from e
        return cls(nets, honeypot_addrs, device_addrs)

    @classmethod
    def from_config(cls, cfg) -> "NetConfig":
        """Build from the `network` section of a Config"""
        def as_list(value):
            if value is None:
                return []
            if isinstance(value, str):
                return [part.strip() for part in value.split(',') if part.strip()]
            return list(value)

        return cls.build(
            as_list(cfg.get('network.local_nets')),
            as_list(cfg.get('network.honeypots')),
            as_list(cfg.get('network.devices')),
        )

    def is_local(self, addr: str) -> bool:
        cached = self._local_cache.get(addr)
        if cached is None:
            ip = ipaddress.IPv4Address(addr)
            cached = any(ip in net for net in self.local_nets)
            self._local_cache[addr] = cached
        return cached


@dataclass
class IngestStats:
    """Counters for packets skipped or dropped along the ingest path"""
    packets: int = 0
    non_ipv4: int = 0
    ipv6: int = 0
    truncated: int = 0
    malformed_lines: int = 0
    invalid_records: int = 0
    not_applicable: int = 0
    out_of_order: int = 0

    def as_dict(self) -> Dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def direction_of(p: PacketRecord, cfg: NetConfig) -> Optional[Direction]:
    """Direction of a packet, or None when both or neither endpoint is local"""
    src_local = cfg.is_local(p.src_addr)
    dst_local = cfg.is_local(p.dst_addr)
    if dst_local and not src_local:
        return Direction.INCOMING
    if src_local and not dst_local:
        return Direction.OUTGOING
    return None


def remote_host(p: PacketRecord, direction: Direction) -> HostKey:
    return HostKey(p.src_addr if direction is Direction.INCOMING else p.dst_addr)


def local_endpoint(p: PacketRecord, direction: Direction) -> str:
    return p.dst_addr if direction is Direction.INCOMING else p.src_addr
