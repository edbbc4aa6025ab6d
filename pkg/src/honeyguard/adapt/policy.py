"""
SCM / DUM update policies and training-window algebra

All times here are relative to the replay origin (t = 0 at system start).
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

from ..core.errors import ConfigError
from ..core.types import TimeWindow

INFINITE = math.inf
# relative tolerance when deciding whether t sits on the update grid
_GRID_TOLERANCE = 1e-9


class PolicyKind(Enum):
    SCM = "scm"
    DUM = "dum"

    @classmethod
    def parse(cls, value) -> "PolicyKind":
        if isinstance(value, PolicyKind):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError as e:
            raise ConfigError(f"unknown update policy {value!r}; expected scm or dum") from e


def parse_seconds(value) -> float:
    """Seconds as float; 'inf', 'infinite' and '∞' map to INFINITE"""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    text = str(value).strip().lower()
    if text in ('inf', 'infinite', 'infinity', '∞'):
        return INFINITE
    try:
        return float(text)
    except ValueError as e:
        raise ConfigError(f"not a duration in seconds: {value!r}") from e


@dataclass(frozen=True)
class UpdatePolicy:
    kind: PolicyKind
    t_duration: float
    t_update: Optional[float] = None

    def __post_init__(self) -> None:
        if math.isnan(self.t_duration) or self.t_duration <= 0:
            raise ConfigError(f"t_duration must be positive, got {self.t_duration}")
        if self.kind is PolicyKind.SCM:
            if math.isinf(self.t_duration):
                raise ConfigError("an infinite t_duration is only valid for DUM")
        else:
            if self.t_update is None or not (0 < self.t_update < INFINITE):
                raise ConfigError(f"DUM requires a finite positive t_update, got {self.t_update}")

    @classmethod
    def scm(cls, t_duration: float) -> "UpdatePolicy":
        return cls(PolicyKind.SCM, float(t_duration))

    @classmethod
    def dum(cls, t_duration: float, t_update: float) -> "UpdatePolicy":
        return cls(PolicyKind.DUM, float(t_duration), float(t_update))

    @classmethod
    def from_config(cls, cfg) -> "UpdatePolicy":
        kind = PolicyKind.parse(cfg.get('adapt.policy', 'dum'))
        t_duration = parse_seconds(cfg.get('adapt.t_duration', 3600))
        if kind is PolicyKind.SCM:
            return cls(kind, t_duration)
        return cls(kind, t_duration, parse_seconds(cfg.get('adapt.t_update', 3600)))

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.t_duration)

    @property
    def evicts(self) -> bool:
        """Only finite DUM can drop traffic older than its window"""
        return self.kind is PolicyKind.DUM and not self.is_infinite

    def label(self) -> str:
        duration = 'inf' if self.is_infinite else f"{self.t_duration:g}"
        if self.kind is PolicyKind.SCM:
            return f"scm({duration})"
        return f"dum({duration}/{self.t_update:g})"


def _on_grid(t: float, step: float) -> bool:
    k = round(t / step)
    return k >= 1 and abs(t - k * step) <= _GRID_TOLERANCE * max(1.0, abs(t))


def training_window(policy: UpdatePolicy, t: float) -> Optional[TimeWindow]:
    """Window to train on at time t, or None when no update is due at t

    SCM fires once at t = t_duration on [0, t_duration). DUM fires at every
    positive multiple of t_update on [max(0, t - t_duration), t).
    """
    if t <= 0:
        return None
    if policy.kind is PolicyKind.SCM:
        if abs(t - policy.t_duration) <= _GRID_TOLERANCE * max(1.0, t):
            return TimeWindow(0.0, policy.t_duration)
        return None
    if not _on_grid(t, policy.t_update):
        return None
    if policy.is_infinite:
        return TimeWindow(0.0, t)
    return TimeWindow(max(0.0, t - policy.t_duration), t)


def update_times(policy: UpdatePolicy, end: float) -> List[float]:
    """Every scheduled update time in (0, end]"""
    if policy.kind is PolicyKind.SCM:
        return [policy.t_duration] if policy.t_duration <= end else []
    times = []
    k = 1
    while k * policy.t_update <= end * (1 + _GRID_TOLERANCE):
        times.append(k * policy.t_update)
        k += 1
    return times


def next_update_after(policy: UpdatePolicy, t: float) -> Optional[float]:
    """First scheduled update time strictly after t (None once SCM has fired)"""
    if policy.kind is PolicyKind.SCM:
        return policy.t_duration if t < policy.t_duration else None
    k = max(1, math.floor(t / policy.t_update) + 1)
    candidate = k * policy.t_update
    while candidate <= t:
        k += 1
        candidate = k * policy.t_update
    return candidate
