"""
Append-only traffic store with front eviction
"""

import bisect
import threading
from typing import Iterator, List, NamedTuple, Optional, Tuple

from ..core.errors import OutOfOrderTimestamp, WindowOutOfRange
from ..core.logger import logger
from ..core.types import (Direction, HostKey, IngestStats, NetConfig, PacketRecord,
                          TimeWindow, direction_of, remote_host)


class StoredRecord(NamedTuple):
    packet: PacketRecord
    direction: Direction
    host: HostKey


class TrafficStore:
    """Time-ordered (packet, direction, host) records; single writer, snapshot readers"""

    _COMPACT_THRESHOLD = 4096

    def __init__(self, stats: Optional[IngestStats] = None):
        self.stats = stats if stats is not None else IngestStats()
        self._ts: List[float] = []
        self._records: List[StoredRecord] = []
        self._offset = 0
        self._horizon = 0.0
        self._last_ts: Optional[float] = None
        self._lock = threading.Lock()

    @property
    def horizon(self) -> float:
        return self._horizon

    @property
    def last_ts(self) -> Optional[float]:
        return self._last_ts

    def __len__(self) -> int:
        return len(self._records) - self._offset

    def append(self, packet: PacketRecord, direction: Direction, host: HostKey) -> None:
        """Append in time order; older timestamps are rejected and counted"""
        floor = self._horizon if self._last_ts is None else max(self._last_ts, self._horizon)
        if packet.ts < floor:
            self.stats.out_of_order += 1
            raise OutOfOrderTimestamp(packet.ts, floor)
        with self._lock:
            self._ts.append(packet.ts)
            self._records.append(StoredRecord(packet, direction, host))
            self._last_ts = packet.ts

    def ingest(self, packet: PacketRecord, cfg: NetConfig) -> Optional[StoredRecord]:
        """Resolve direction and host, then append; None for not-applicable packets"""
        direction = direction_of(packet, cfg)
        if direction is None:
            self.stats.not_applicable += 1
            return None
        host = remote_host(packet, direction)
        self.append(packet, direction, host)
        return StoredRecord(packet, direction, host)

    def evict_before(self, t: float) -> int:
        """Drop records with ts < t and move the horizon to t; returns records removed"""
        if t <= self._horizon:
            return 0
        with self._lock:
            cut = bisect.bisect_left(self._ts, t, lo=self._offset)
            removed = cut - self._offset
            self._offset = cut
            self._horizon = t
            if self._offset >= self._COMPACT_THRESHOLD and self._offset * 2 >= len(self._records):
                del self._ts[:self._offset]
                del self._records[:self._offset]
                self._offset = 0
        if removed:
            logger.debug("Store evicted records", before=t, removed=removed, retained=len(self))
        return removed

    def snapshot(self, window: Optional[TimeWindow] = None) -> Tuple[StoredRecord, ...]:
        """Consistent copy of the records in [window.start, window.end)"""
        if window is not None and window.start < self._horizon:
            raise WindowOutOfRange(
                f"window starts at {window.start} but store horizon is {self._horizon}")
        with self._lock:
            if window is None:
                return tuple(self._records[self._offset:])
            lo = bisect.bisect_left(self._ts, window.start, lo=self._offset)
            hi = bisect.bisect_left(self._ts, window.end, lo=lo)
            return tuple(self._records[lo:hi])

    def __iter__(self) -> Iterator[StoredRecord]:
        return iter(self.snapshot())
