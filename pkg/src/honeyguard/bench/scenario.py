"""
Synthetic IoT traffic scenarios with known host roles
"""

import ipaddress
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..core.errors import InvalidScenario
from ..core.logger import logger
from ..core.types import TCP, HostKey, Label, NetConfig, PacketRecord

EPHEMERAL_PORTS = (32768, 61000)
MIN_TCP_LENGTH = 40


@dataclass(frozen=True)
class BenignParams:
    """Remote service talking to one device; the device answers every packet

    Packets are roughly periodic: each gap is mean_interval scaled by
    uniform(1 - jitter, 1 + jitter).
    """
    mean_interval: float = 20.0
    jitter: float = 0.5
    length_range: Tuple[int, int] = (200, 1500)
    dst_ports: Tuple[int, ...] = (443, 80)
    ttl_range: Tuple[int, int] = (40, 64)
    reply_delay: Tuple[float, float] = (0.01, 0.2)


@dataclass(frozen=True)
class MaliciousParams:
    """Scanner sending bursts, mostly at the honeypot"""
    scan_ports: Tuple[int, ...] = (23,)
    length_range: Tuple[int, int] = (40, 60)
    burst_interval: float = 90.0
    jitter: float = 0.5
    burst_size: int = 5
    intra_burst: float = 0.2
    honeypot_bias: float = 0.7
    ttl_range: Tuple[int, int] = (40, 64)
    reply_delay: Tuple[float, float] = (0.01, 0.2)


def _check_range(name: str, bounds, low: float, high: float) -> None:
    if len(bounds) != 2 or not low <= bounds[0] <= bounds[1] <= high:
        raise InvalidScenario(f"{name} must be an ordered pair within [{low}, {high}]: {bounds}")


def _check_ports(name: str, ports) -> None:
    if not ports or any(not 1 <= int(p) <= 65535 for p in ports):
        raise InvalidScenario(f"{name} must be a non-empty list of ports in 1..65535: {ports}")


def _validate_benign(params: BenignParams) -> None:
    if params.mean_interval <= 0:
        raise InvalidScenario("benign mean_interval must be positive")
    if not 0 <= params.jitter < 1:
        raise InvalidScenario("benign jitter must be in [0, 1)")
    _check_range("benign length_range", params.length_range, MIN_TCP_LENGTH, 65535)
    _check_ports("benign dst_ports", params.dst_ports)
    _check_range("benign ttl_range", params.ttl_range, 0, 255)
    _check_range("benign reply_delay", params.reply_delay, 0, float('inf'))


def _validate_malicious(params: MaliciousParams, prefix: str = "malicious") -> None:
    if params.burst_interval <= 0 or params.intra_burst <= 0:
        raise InvalidScenario(f"{prefix} burst_interval and intra_burst must be positive")
    if not 0 <= params.jitter < 1:
        raise InvalidScenario(f"{prefix} jitter must be in [0, 1)")
    if params.burst_size < 1:
        raise InvalidScenario(f"{prefix} burst_size must be >= 1")
    if not 0.0 < params.honeypot_bias <= 1.0:
        raise InvalidScenario(f"{prefix} honeypot_bias must be in (0, 1]")
    _check_range(f"{prefix} length_range", params.length_range, MIN_TCP_LENGTH, 65535)
    _check_ports(f"{prefix} scan_ports", params.scan_ports)
    _check_range(f"{prefix} ttl_range", params.ttl_range, 0, 255)
    _check_range(f"{prefix} reply_delay", params.reply_delay, 0, float('inf'))


@dataclass(frozen=True)
class ScenarioConfig:
    duration: float
    n_benign: int = 12
    n_malicious: int = 8
    benign: BenignParams = field(default_factory=BenignParams)
    malicious: MaliciousParams = field(default_factory=MaliciousParams)
    shift_at: Optional[float] = None
    post_shift: Optional[MaliciousParams] = None
    quiet_periods: Tuple[Tuple[float, float], ...] = ()
    seed: int = 0
    start_time: float = 0.0
    local_net: str = "192.168.1.0/24"
    honeypots: Tuple[str, ...] = ("192.168.1.100",)
    devices: Tuple[str, ...] = tuple(f"192.168.1.{i}" for i in range(10, 20))
    benign_base: str = "198.51.100.1"
    malicious_base: str = "203.0.113.1"

    def __post_init__(self) -> None:
        if not self.duration > 0:
            raise InvalidScenario(f"duration must be positive, got {self.duration}")
        if self.n_benign < 0 or self.n_malicious < 0:
            raise InvalidScenario("host counts must be non-negative")
        if self.start_time < 0:
            raise InvalidScenario("start_time must be non-negative")
        if not self.devices:
            raise InvalidScenario("at least one device address is required")
        if self.n_malicious and not self.honeypots:
            raise InvalidScenario("malicious hosts need at least one honeypot")
        _validate_benign(self.benign)
        _validate_malicious(self.malicious)
        if self.shift_at is not None:
            if not 0 < self.shift_at < self.duration:
                raise InvalidScenario(f"shift_at must lie inside (0, {self.duration})")
            if self.post_shift is None:
                raise InvalidScenario("shift_at requires post_shift parameters")
            _validate_malicious(self.post_shift, "post_shift")
        for start, end in self.quiet_periods:
            if not 0 <= start < end:
                raise InvalidScenario(f"bad quiet period [{start}, {end})")

    @property
    def net_config(self) -> NetConfig:
        return NetConfig.build([self.local_net], self.honeypots, self.devices)

    def host_addrs(self) -> Tuple[List[str], List[str]]:
        benign = ipaddress.IPv4Address(self.benign_base)
        malicious = ipaddress.IPv4Address(self.malicious_base)
        return ([str(benign + i) for i in range(self.n_benign)],
                [str(malicious + i) for i in range(self.n_malicious)])

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScenarioConfig":
        """Build from plain (YAML) data; nested parameter blocks are dicts"""
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidScenario(f"unknown scenario keys: {sorted(unknown)}")
        values = dict(data)
        try:
            if isinstance(values.get('benign'), dict):
                values['benign'] = BenignParams(**_tuples(values['benign']))
            for key in ('malicious', 'post_shift'):
                if isinstance(values.get(key), dict):
                    values[key] = MaliciousParams(**_tuples(values[key]))
            for key in ('honeypots', 'devices'):
                if key in values:
                    values[key] = tuple(values[key])
            if 'quiet_periods' in values:
                values['quiet_periods'] = tuple(tuple(p) for p in values['quiet_periods'])
            return cls(**values)
        except TypeError as e:
            raise InvalidScenario(str(e)) from e


def _tuples(block: Dict[str, Any]) -> Dict[str, Any]:
    return {k: tuple(v) if isinstance(v, list) else v for k, v in block.items()}


@dataclass
class SyntheticTraffic:
    records: List[PacketRecord]
    roles: Dict[HostKey, Label]
    config: ScenarioConfig


class _Emitter:
    """Collects packets, dropping those outside the run or inside quiet periods"""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.items: List[Tuple[float, int, PacketRecord]] = []

    def active(self, t: float) -> bool:
        if not 0 <= t < self.cfg.duration:
            return False
        return not any(start <= t < end for start, end in self.cfg.quiet_periods)

    def emit(self, t: float, src: str, dst: str, sport: int, dport: int, length: int, ttl: int):
        if not self.active(t):
            return
        record = PacketRecord(
            ts=round(self.cfg.start_time + t, 6),
            src_addr=src, dst_addr=dst,
            src_port=int(sport), dst_port=int(dport),
            proto=TCP, length=int(length), ttl=int(ttl),
        )
        self.items.append((record.ts, len(self.items), record))

    def exchange(self, rng: np.random.Generator, t: float, remote: str, local: str, dport: int,
                 lengths: Tuple[int, int], ttl: int, delay: Tuple[float, float]) -> None:
        """Remote packet plus the local reply"""
        sport = int(rng.integers(*EPHEMERAL_PORTS))
        self.emit(t, remote, local, sport, dport, rng.integers(lengths[0], lengths[1] + 1), ttl)
        reply_at = t + float(rng.uniform(*delay))
        self.emit(reply_at, local, remote, dport, sport,
                  rng.integers(lengths[0], lengths[1] + 1), 64)

    def records(self) -> List[PacketRecord]:
        return [record for _, _, record in sorted(self.items, key=lambda item: (item[0], item[1]))]


def _gap(rng: np.random.Generator, mean: float, jitter: float) -> float:
    return mean * float(rng.uniform(1.0 - jitter, 1.0 + jitter))


def _benign_host(rng, out: _Emitter, addr: str, cfg: ScenarioConfig) -> None:
    params = cfg.benign
    device = cfg.devices[int(rng.integers(len(cfg.devices)))]
    port = int(params.dst_ports[int(rng.integers(len(params.dst_ports)))])
    ttl = int(rng.integers(params.ttl_range[0], params.ttl_range[1] + 1))
    t = float(rng.uniform(0, params.mean_interval))
    while t < cfg.duration:
        out.exchange(rng, t, addr, device, port, params.length_range, ttl, params.reply_delay)
        t += _gap(rng, params.mean_interval, params.jitter)


def _malicious_host(rng, out: _Emitter, addr: str, cfg: ScenarioConfig) -> None:
    ttl = int(rng.integers(cfg.malicious.ttl_range[0], cfg.malicious.ttl_range[1] + 1))
    first = True
    t = float(rng.uniform(0, cfg.malicious.burst_interval))
    while t < cfg.duration:
        shifted = cfg.shift_at is not None and t >= cfg.shift_at
        params = cfg.post_shift if shifted else cfg.malicious
        # the first burst always hits a honeypot so every scanner is labelable
        if first or rng.random() < params.honeypot_bias:
            target = cfg.honeypots[int(rng.integers(len(cfg.honeypots)))]
        else:
            target = cfg.devices[int(rng.integers(len(cfg.devices)))]
        first = False
        burst_t = t
        for _ in range(params.burst_size):
            port = int(params.scan_ports[int(rng.integers(len(params.scan_ports)))])
            out.exchange(rng, burst_t, addr, target, port, params.length_range, ttl,
                         params.reply_delay)
            burst_t += float(rng.exponential(params.intra_burst))
        t += _gap(rng, params.burst_interval, params.jitter)


def generate_synthetic(cfg: ScenarioConfig) -> SyntheticTraffic:
    """Deterministic packet stream (time-ordered) plus each remote host's role"""
    rng = np.random.default_rng(cfg.seed)
    out = _Emitter(cfg)
    benign_addrs, malicious_addrs = cfg.host_addrs()
    roles: Dict[HostKey, Label] = {}

    for addr in benign_addrs:
        _benign_host(rng, out, addr, cfg)
        roles[HostKey(addr)] = Label.BENIGN
    for addr in malicious_addrs:
        _malicious_host(rng, out, addr, cfg)
        roles[HostKey(addr)] = Label.MALICIOUS

    records = out.records()
    logger.info("Synthetic scenario generated", seed=cfg.seed, duration=cfg.duration,
                packets=len(records), benign_hosts=len(benign_addrs),
                malicious_hosts=len(malicious_addrs), shift_at=cfg.shift_at)
    return SyntheticTraffic(records, roles, cfg)


def separable_scenario(seed: int = 0, duration: float = 4 * 3600.0, **overrides) -> ScenarioConfig:
    """Tiny port-23 scans against large 443/80 sessions; no drift"""
    return ScenarioConfig(duration=duration, seed=seed, **overrides)


def shift_scenario(seed: int = 0, duration: float = 10 * 3600.0,
                   shift_at: Optional[float] = None, **overrides) -> ScenarioConfig:
    """Scanners switch halfway to port 5555 with benign-looking sizes and timing"""
    benign = overrides.pop('benign', BenignParams())
    post_shift = overrides.pop('post_shift', MaliciousParams(
        scan_ports=(5555,),
        length_range=benign.length_range,
        burst_interval=benign.mean_interval,
        jitter=benign.jitter,
        burst_size=1,
        intra_burst=benign.mean_interval,
    ))
    return ScenarioConfig(
        duration=duration,
        seed=seed,
        benign=benign,
        shift_at=duration / 2 if shift_at is None else shift_at,
        post_shift=post_shift,
        **overrides,
    )
