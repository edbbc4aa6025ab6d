"""
Per-flow destination-port distribution of incoming traffic
"""

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Set, Tuple, Union

import pandas as pd

from ..core.types import Direction, NetConfig, PacketRecord, direction_of

OTHERS = "others"
PORT_COLUMNS = ['dst_port', 'flow_count', 'fraction']

FiveTuple = Tuple[str, str, int, int, int]


@dataclass(frozen=True)
class PortShare:
    """dst_port is None for the aggregated "others" bucket"""
    dst_port: Optional[int]
    flow_count: int
    fraction: float

    @property
    def label(self) -> str:
        return OTHERS if self.dst_port is None else str(self.dst_port)

    def to_dict(self) -> Dict[str, object]:
        return {'dst_port': self.label, 'flow_count': self.flow_count, 'fraction': self.fraction}

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "PortShare":
        port = data['dst_port']
        return cls(None if port == OTHERS else int(port), int(data['flow_count']),
                   float(data['fraction']))


class FlowCounter:
    """Distinct incoming 5-tuples, accumulated packet by packet"""

    def __init__(self):
        self.flows: Set[FiveTuple] = set()

    def add(self, p: PacketRecord, direction: Optional[Direction]) -> None:
        if direction is Direction.INCOMING:
            self.flows.add(p.five_tuple)

    def __len__(self) -> int:
        return len(self.flows)

    def distribution(self, top_n: Optional[int] = None) -> List[PortShare]:
        """Ports by descending flow count (ties: lower port first), rest folded into others"""
        total = len(self.flows)
        if total == 0:
            return []
        counts = Counter(flow[3] for flow in self.flows)
        ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
        head = ranked if top_n is None else ranked[:max(0, top_n)]
        shares = [PortShare(port, count, count / total) for port, count in head]
        rest = sum(count for _, count in ranked[len(head):])
        if rest:
            shares.append(PortShare(None, rest, rest / total))
        return shares


def port_distribution(records: Iterable, cfg: NetConfig,
                      top_n: Optional[int] = None) -> List[PortShare]:
    """Per-flow dst_port shares over incoming records

    Accepts bare PacketRecords or (packet, direction, host) triples.
    """
    counter = FlowCounter()
    for item in records:
        if isinstance(item, PacketRecord):
            counter.add(item, direction_of(item, cfg))
        else:
            counter.add(item[0], item[1])
    return counter.distribution(top_n)


def write_port_distribution(path: Union[str, Path], shares: List[PortShare]) -> None:
    frame = pd.DataFrame([share.to_dict() for share in shares], columns=PORT_COLUMNS)
    frame.to_csv(path, index=False, lineterminator='\n')
