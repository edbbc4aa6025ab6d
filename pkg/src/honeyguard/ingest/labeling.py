"""
Ground-truth host labels from honeypot/device contact
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Iterator, Optional, Tuple, Union

from ..core.errors import InputError
from ..core.types import (Direction, HostKey, Label, NetConfig, PacketRecord,
                          direction_of, local_endpoint, remote_host)


@dataclass(frozen=True)
class HostContact:
    label: Label
    contacted_honeypot: bool
    contacted_device: bool
    first_seen: float


class HostLabelMap:
    """HostKey -> HostContact for hosts that touched a honeypot or a device"""

    def __init__(self, entries: Optional[Dict[HostKey, HostContact]] = None):
        self.entries: Dict[HostKey, HostContact] = dict(entries or {})

    def __contains__(self, host: HostKey) -> bool:
        return host in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, HostLabelMap) and self.entries == other.entries

    def __getitem__(self, host: HostKey) -> HostContact:
        return self.entries[host]

    def get(self, host: HostKey) -> Optional[HostContact]:
        return self.entries.get(host)

    def label_of(self, host: HostKey) -> Optional[Label]:
        contact = self.entries.get(host)
        return contact.label if contact else None

    def items(self) -> Iterator[Tuple[HostKey, HostContact]]:
        return iter(sorted(self.entries.items()))

    def labels(self) -> Dict[HostKey, Label]:
        return {host: contact.label for host, contact in self.entries.items()}

    def counts(self) -> Tuple[int, int]:
        """(benign, malicious)"""
        malicious = sum(1 for c in self.entries.values() if c.label is Label.MALICIOUS)
        return len(self.entries) - malicious, malicious


def label_hosts(records: Iterable, cfg: NetConfig) -> HostLabelMap:
    """Label remote hosts: any honeypot contact -> Malicious, device-only -> Benign

    Accepts bare PacketRecords or (PacketRecord, Direction, HostKey) triples.
    Packets without exactly one local endpoint are ignored.
    """
    honeypot: Dict[HostKey, bool] = {}
    device: Dict[HostKey, bool] = {}
    first_seen: Dict[HostKey, float] = {}

    for item in records:
        if isinstance(item, PacketRecord):
            packet = item
            direction = direction_of(packet, cfg)
            if direction is None:
                continue
            host = remote_host(packet, direction)
        else:
            packet, direction, host = item[0], item[1], item[2]

        local = local_endpoint(packet, direction)
        if local in cfg.honeypot_addrs:
            honeypot[host] = True
        elif local in cfg.device_addrs:
            device[host] = True
        else:
            continue
        seen = first_seen.get(host)
        if seen is None or packet.ts < seen:
            first_seen[host] = packet.ts

    entries: Dict[HostKey, HostContact] = {}
    for host, ts in first_seen.items():
        hit_honeypot = honeypot.get(host, False)
        hit_device = device.get(host, False)
        label = Label.MALICIOUS if hit_honeypot else Label.BENIGN
        entries[host] = HostContact(label, hit_honeypot, hit_device, ts)
    return HostLabelMap(entries)


def write_roles(path: Union[str, Path], roles: Dict[HostKey, Label]) -> None:
    """Ground-truth CSV: addr,label"""
    with open(path, 'w', newline='', encoding='utf-8') as fh:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(['addr', 'label'])
        for host in sorted(roles):
            writer.writerow([host.addr, roles[host].name.lower()])


def load_roles(path: Union[str, Path]) -> Dict[HostKey, Label]:
    roles: Dict[HostKey, Label] = {}
    try:
        with open(path, newline='', encoding='utf-8') as fh:
            for row in csv.DictReader(fh):
                roles[HostKey(row['addr'].strip())] = Label.parse(row['label'])
    except (OSError, KeyError, ValueError) as e:
        raise InputError(f"cannot read roles file {path}: {e}") from e
    return roles
