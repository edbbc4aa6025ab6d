"""
Classic pcap reading and writing (Ethernet link layer, IPv4 only)
"""

import socket
import struct
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator, Optional, Tuple, Union

import dpkt

from ..core.errors import InvalidRecord, MalformedFile
from ..core.logger import logger
from ..core.types import TCP, UDP, IngestStats, PacketRecord

PCAP_MAGIC_MICRO = 0xA1B2C3D4
PCAP_MAGIC_NANO = 0xA1B23C4D
LINKTYPE_ETHERNET = 1
SNAPLEN = 65535
TS_DIGITS = 6

PathLike = Union[str, Path]


def normalize_ts(ts: float) -> float:
    """Microsecond resolution shared by every reader"""
    return round(float(ts), TS_DIGITS)


def decode_frame(ts: float, buf: bytes, stats: IngestStats) -> Optional[PacketRecord]:
    """Decode one Ethernet frame; None (and a counter bump) when it is skipped"""
    try:
        eth = dpkt.ethernet.Ethernet(buf)
    except dpkt.UnpackError:
        stats.truncated += 1
        return None

    ip = eth.data
    if isinstance(ip, dpkt.ip6.IP6) or eth.type == dpkt.ethernet.ETH_TYPE_IP6:
        stats.ipv6 += 1
        return None
    if eth.type != dpkt.ethernet.ETH_TYPE_IP:
        stats.non_ipv4 += 1
        return None
    if not isinstance(ip, dpkt.ip.IP):
        stats.truncated += 1
        return None

    src_port = dst_port = 0
    if ip.p in (TCP, UDP):
        transport = ip.data
        if not isinstance(transport, (dpkt.tcp.TCP, dpkt.udp.UDP)):
            stats.truncated += 1
            return None
        src_port, dst_port = transport.sport, transport.dport

    try:
        return PacketRecord(
            ts=normalize_ts(ts),
            src_addr=socket.inet_ntoa(ip.src),
            dst_addr=socket.inet_ntoa(ip.dst),
            src_port=int(src_port),
            dst_port=int(dst_port),
            proto=int(ip.p),
            length=int(ip.len),
            ttl=int(ip.ttl),
        )
    except InvalidRecord as e:
        stats.invalid_records += 1
        logger.debug("Skipping invalid pcap record", reason=str(e))
        return None


def read_pcap(path: PathLike, stats: Optional[IngestStats] = None) -> Iterator[PacketRecord]:
    """Yield one PacketRecord per IPv4 packet, in file order"""
    stats = stats if stats is not None else IngestStats()
    with open(path, 'rb') as fh:
        try:
            reader = dpkt.pcap.Reader(fh)
        except (ValueError, dpkt.UnpackError) as e:
            raise MalformedFile(f"{path}: not a classic pcap file ({e})") from e

        if reader.datalink() != dpkt.pcap.DLT_EN10MB:
            raise MalformedFile(f"{path}: unsupported link type {reader.datalink()}")

        try:
            for ts, buf in reader:
                record = decode_frame(ts, buf, stats)
                if record is not None:
                    stats.packets += 1
                    yield record
        except dpkt.UnpackError as e:
            raise MalformedFile(f"{path}: truncated packet header ({e})") from e

    logger.debug("pcap read", path=str(path), **stats.as_dict())


def build_frame(record: PacketRecord) -> bytes:
    """Ethernet/IPv4 frame whose IP total length equals record.length"""
    if record.proto == TCP:
        transport = dpkt.tcp.TCP(sport=record.src_port, dport=record.dst_port, flags=dpkt.tcp.TH_SYN)
        header_len = 20
    elif record.proto == UDP:
        transport = dpkt.udp.UDP(sport=record.src_port, dport=record.dst_port)
        header_len = 8
    else:
        transport = None
        header_len = 0

    payload_len = record.length - 20 - header_len
    if payload_len < 0:
        raise ValueError(f"length {record.length} too small for protocol {record.proto}")

    payload = b"\x00" * payload_len
    if transport is not None:
        transport.data = payload
        if isinstance(transport, dpkt.udp.UDP):
            transport.ulen = header_len + payload_len
        data = transport
    else:
        data = payload

    ip = dpkt.ip.IP(
        src=socket.inet_aton(record.src_addr),
        dst=socket.inet_aton(record.dst_addr),
        p=record.proto,
        ttl=record.ttl,
        len=record.length,
        data=data,
    )
    eth = dpkt.ethernet.Ethernet(
        src=b"\x02\x00\x00\x00\x00\x01",
        dst=b"\x02\x00\x00\x00\x00\x02",
        type=dpkt.ethernet.ETH_TYPE_IP,
        data=ip,
    )
    return bytes(eth)


def _write_header(fh: BinaryIO, order: str, nanosecond: bool) -> None:
    magic = PCAP_MAGIC_NANO if nanosecond else PCAP_MAGIC_MICRO
    fh.write(struct.pack(f"{order}IHHiIII", magic, 2, 4, 0, 0, SNAPLEN, LINKTYPE_ETHERNET))


def write_pcap_frames(path: PathLike, frames: Iterable[Tuple[float, bytes]],
                      byteorder: str = "little", nanosecond: bool = False) -> int:
    """Write raw frames; byteorder picks which magic ordering lands on disk"""
    order = "<" if byteorder == "little" else ">"
    scale = 1_000_000_000 if nanosecond else 1_000_000
    count = 0
    with open(path, 'wb') as fh:
        _write_header(fh, order, nanosecond)
        for ts, frame in frames:
            seconds = int(ts)
            fraction = int(round((ts - seconds) * scale))
            if fraction >= scale:
                seconds, fraction = seconds + 1, fraction - scale
            fh.write(struct.pack(f"{order}IIII", seconds, fraction, len(frame), len(frame)))
            fh.write(frame)
            count += 1
    return count


def write_pcap(path: PathLike, records: Iterable[PacketRecord],
               byteorder: str = "little", nanosecond: bool = False) -> int:
    """Write PacketRecords as a classic Ethernet pcap"""
    return write_pcap_frames(
        path, ((r.ts, build_frame(r)) for r in records),
        byteorder=byteorder, nanosecond=nanosecond,
    )
