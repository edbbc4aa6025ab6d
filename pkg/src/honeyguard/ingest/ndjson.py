"""
NDJSON packet format: one JSON object per line
"""

import json
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

from ..core.errors import InvalidRecord, MalformedFile, MalformedLine
from ..core.logger import logger
from ..core.types import IngestStats, PacketRecord
from .pcap import normalize_ts, read_pcap

NDJSON_KEYS = ('ts', 'src_ip', 'dst_ip', 'src_port', 'dst_port', 'proto', 'len', 'ttl')

PathLike = Union[str, Path]


def parse_line(line: Union[bytes, str], line_number: int) -> PacketRecord:
    """Parse one NDJSON line; unknown keys are ignored"""
    if isinstance(line, bytes):
        try:
            line = line.decode('utf-8')
        except UnicodeDecodeError as e:
            raise MalformedLine(line_number, f"invalid UTF-8 at byte {e.start}") from e
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise MalformedLine(line_number, f"invalid JSON ({e.msg})") from e
    if not isinstance(obj, dict):
        raise MalformedLine(line_number, "expected a JSON object")

    missing = [key for key in NDJSON_KEYS if key not in obj]
    if missing:
        raise MalformedLine(line_number, f"missing keys {missing}")

    ts = obj['ts']
    if isinstance(ts, bool) or not isinstance(ts, (int, float)):
        raise MalformedLine(line_number, f"ts must be numeric: {ts!r}")

    try:
        return PacketRecord(
            ts=normalize_ts(ts),
            src_addr=obj['src_ip'],
            dst_addr=obj['dst_ip'],
            src_port=obj['src_port'],
            dst_port=obj['dst_port'],
            proto=obj['proto'],
            length=obj['len'],
            ttl=obj['ttl'],
        )
    except InvalidRecord as e:
        raise MalformedLine(line_number, str(e)) from e


def read_ndjson(path: PathLike, stats: Optional[IngestStats] = None,
                strict: bool = False) -> Iterator[PacketRecord]:
    """Yield records in line order; invalid lines are skipped and counted unless strict"""
    stats = stats if stats is not None else IngestStats()
    try:
        fh = open(path, 'rb')
    except OSError as e:
        raise MalformedFile(f"cannot open {path}: {e}") from e

    with fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = parse_line(line, line_number)
            except MalformedLine as e:
                if strict:
                    raise
                stats.malformed_lines += 1
                logger.warning("Skipping malformed NDJSON line", path=str(path),
                               line=e.line_number, reason=e.reason)
                continue
            stats.packets += 1
            yield record


def format_record(record: PacketRecord) -> str:
    return json.dumps(record.to_dict(), separators=(',', ':'))


def write_ndjson(path: PathLike, records: Iterable[PacketRecord]) -> int:
    """Canonical NDJSON output (fixed key order, compact, repr-exact floats)"""
    count = 0
    with open(path, 'w', encoding='utf-8', newline='\n') as fh:
        for record in records:
            fh.write(format_record(record))
            fh.write('\n')
            count += 1
    return count


def is_pcap(path: PathLike) -> bool:
    with open(path, 'rb') as fh:
        head = fh.read(4)
    return head in (
        bytes.fromhex('a1b2c3d4'), bytes.fromhex('d4c3b2a1'),
        bytes.fromhex('a1b23c4d'), bytes.fromhex('4d3cb2a1'),
    )


def read_packets(path: PathLike, stats: Optional[IngestStats] = None) -> Iterator[PacketRecord]:
    """Read a capture in either supported format, sniffing the pcap magic"""
    try:
        pcap = is_pcap(path)
    except OSError as e:
        raise MalformedFile(f"cannot open {path}: {e}") from e
    if pcap:
        return read_pcap(path, stats)
    return read_ndjson(path, stats)
