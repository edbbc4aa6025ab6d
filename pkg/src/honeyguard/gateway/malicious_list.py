"""
Malicious-IP list kept by the gateway
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, List, Tuple, Union

import pandas as pd

from ..core.types import HostKey

LIST_COLUMNS = ['addr', 'first_flagged', 'last_flagged', 'flag_count']


@dataclass(frozen=True)
class ListEntry:
    first_flagged: float
    last_flagged: float
    flag_count: int


def _addr(host: Union[str, HostKey]) -> str:
    return host.addr if isinstance(host, HostKey) else str(host)


class MaliciousList:
    """Addresses ever classified malicious; entries persist for the whole replay"""

    def __init__(self):
        self._entries: Dict[str, ListEntry] = {}

    def flag(self, host: Union[str, HostKey], t: float) -> ListEntry:
        addr = _addr(host)
        entry = self._entries.get(addr)
        if entry is None:
            entry = ListEntry(t, t, 1)
        else:
            if t < entry.last_flagged:
                raise ValueError(f"flag time {t} precedes last flag {entry.last_flagged} for {addr}")
            entry = ListEntry(entry.first_flagged, t, entry.flag_count + 1)
        self._entries[addr] = entry
        return entry

    def get(self, host: Union[str, HostKey]):
        return self._entries.get(_addr(host))

    def __contains__(self, host) -> bool:
        return _addr(host) in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self._entries))

    def items(self) -> List[Tuple[str, ListEntry]]:
        return sorted(self._entries.items())

    def to_dataframe(self) -> pd.DataFrame:
        rows = [(addr, e.first_flagged, e.last_flagged, e.flag_count) for addr, e in self.items()]
        return pd.DataFrame(rows, columns=LIST_COLUMNS)

    def to_csv(self, path: Union[str, Path]) -> None:
        self.to_dataframe().to_csv(path, index=False, lineterminator='\n')

    def to_dict(self) -> Dict[str, Dict[str, float]]:
        return {addr: {'first_flagged': e.first_flagged, 'last_flagged': e.last_flagged,
                       'flag_count': e.flag_count} for addr, e in self.items()}

    @classmethod
    def from_dict(cls, data: Dict[str, Dict[str, float]]) -> "MaliciousList":
        instance = cls()
        for addr, e in data.items():
            instance._entries[addr] = ListEntry(float(e['first_flagged']),
                                                float(e['last_flagged']), int(e['flag_count']))
        return instance
