"""
Test pcap and NDJSON ingestion
"""

import pytest
import sys
from pathlib import Path

import dpkt

sys.path.insert(0, str(Path(__file__).parent.parent.parent / 'src'))

from honeyguard.core.errors import MalformedFile, MalformedLine
from honeyguard.core.types import IngestStats
from honeyguard.ingest.ndjson import (format_record, parse_line, read_ndjson, read_packets,
                                      write_ndjson)
from honeyguard.ingest.pcap import build_frame, read_pcap, write_pcap, write_pcap_frames

SAMPLE_LINE = ('{"ts":1.5,"src_ip":"1.2.3.4","dst_ip":"192.168.1.5","src_port":4444,'
               '"dst_port":23,"proto":6,"len":60,"ttl":51}')


def _arp_frame() -> bytes:
    return bytes(dpkt.ethernet.Ethernet(
        src=b"\x02\x00\x00\x00\x00\x01", dst=b"\xff" * 6,
        type=dpkt.ethernet.ETH_TYPE_ARP, data=dpkt.arp.ARP()))


class TestPcap:
    """Classic pcap decoding"""

    def _udp_records(self, packet):
        return [packet(10.0 + i * 0.25, '1.2.3.4', '192.168.1.10', src_port=5000 + i,
                       dst_port=53, proto=17, length=80 + i, ttl=50) for i in range(3)]

    def test_udp_packets_decoded(self, tmp_path, packet):
        """Test decoding of UDP frames written by the pcap helper"""
        records = self._udp_records(packet)
        path = tmp_path / 'udp.pcap'
        assert write_pcap(path, records) == 3

        stats = IngestStats()
        decoded = list(read_pcap(path, stats))
        assert decoded == records
        assert all(r.proto == 17 for r in decoded)
        assert stats.packets == 3

    def test_arp_frame_skipped(self, tmp_path, packet):
        """Test that non-IPv4 frames are skipped and counted"""
        records = self._udp_records(packet)[:2]
        frames = [(r.ts, build_frame(r)) for r in records]
        frames.insert(1, (10.1, _arp_frame()))
        path = tmp_path / 'mixed.pcap'
        write_pcap_frames(path, frames)

        stats = IngestStats()
        decoded = list(read_pcap(path, stats))
        assert decoded == records
        assert stats.non_ipv4 == 1

    def test_truncated_frame_counted(self, tmp_path, packet):
        """Test that truncated frames are skipped and counted"""
        record = self._udp_records(packet)[0]
        path = tmp_path / 'short.pcap'
        write_pcap_frames(path, [(record.ts, build_frame(record)), (11.0, b"\x00" * 5)])

        stats = IngestStats()
        assert list(read_pcap(path, stats)) == [record]
        assert stats.truncated == 1

    def test_byte_order_independent(self, tmp_path, packet):
        """Test reading pcaps of either byte order"""
        records = self._udp_records(packet) + [
            packet(12.123456, '192.168.1.10', '1.2.3.4', src_port=443, dst_port=50000, length=1400)]
        little, big = tmp_path / 'le.pcap', tmp_path / 'be.pcap'
        write_pcap(little, records, byteorder='little')
        write_pcap(big, records, byteorder='big')
        assert little.read_bytes()[:4] != big.read_bytes()[:4]
        assert list(read_pcap(little)) == list(read_pcap(big)) == records

    def test_nanosecond_timestamps_rounded(self, tmp_path, packet):
        """Test nanosecond pcaps rounded to microseconds"""
        record = packet(100.000001, '1.2.3.4', '192.168.1.10')
        path = tmp_path / 'ns.pcap'
        write_pcap(path, [record], nanosecond=True)
        assert list(read_pcap(path)) == [record]

    def test_ip_length_preserved(self, tmp_path, packet):
        """Test that the IP total length is kept"""
        records = [packet(0.0, '1.2.3.4', '192.168.1.10', length=40),
                   packet(1.0, '1.2.3.4', '192.168.1.10', proto=17, length=28),
                   packet(2.0, '1.2.3.4', '192.168.1.10', length=1500)]
        path = tmp_path / 'len.pcap'
        write_pcap(path, records)
        assert [r.length for r in read_pcap(path)] == [40, 28, 1500]

    def test_not_a_pcap(self, tmp_path):
        """Test that a file without pcap magic is rejected"""
        path = tmp_path / 'bogus.pcap'
        path.write_bytes(b"\x00" * 64)
        with pytest.raises(MalformedFile):
            list(read_pcap(path))


class TestNdjson:
    """NDJSON parsing and canonical output"""

    def test_parse_sample_line(self):
        """Test parsing one NDJSON line"""
        record = parse_line(SAMPLE_LINE, 1)
        assert record.ts == 1.5
        assert record.src_addr == '1.2.3.4'
        assert record.dst_port == 23
        assert record.length == 60
        assert record.ttl == 51

    def test_unknown_keys_ignored(self):
        """Test that extra keys are ignored"""
        line = SAMPLE_LINE[:-1] + ',"comment":"extra"}'
        assert parse_line(line, 1) == parse_line(SAMPLE_LINE, 1)

    @pytest.mark.parametrize('line', [
        SAMPLE_LINE.replace('"len":60', '"len":10'),
        SAMPLE_LINE.replace('"ttl":51,', ''),
        SAMPLE_LINE.replace('"ts":1.5', '"ts":"1.5"'),
        '[1, 2, 3]',
        '{"ts":',
    ])
    def test_bad_lines(self, line):
        """Test rejection of invalid NDJSON lines"""
        with pytest.raises(MalformedLine):
            parse_line(line, 7)

    def test_bad_line_skipped_and_counted(self, tmp_path):
        """Test skipping and counting of malformed lines"""
        path = tmp_path / 'packets.ndjson'
        path.write_text(SAMPLE_LINE + '\n'
                        + SAMPLE_LINE.replace('"len":60', '"len":10') + '\n'
                        + '\n'
                        + SAMPLE_LINE.replace('"ts":1.5', '"ts":2.5') + '\n')
        stats = IngestStats()
        records = list(read_ndjson(path, stats))
        assert [r.ts for r in records] == [1.5, 2.5]
        assert stats.malformed_lines == 1
        assert stats.packets == 2

    def test_invalid_utf8_line_skipped(self, tmp_path):
        """Test that a line of undecodable bytes is counted as malformed"""
        path = tmp_path / 'packets.ndjson'
        path.write_bytes(SAMPLE_LINE.encode() + b'\n\xff\xfe garbage\n'
                         + SAMPLE_LINE.replace('"ts":1.5', '"ts":2.5').encode() + b'\n')
        stats = IngestStats()
        records = list(read_packets(path, stats))
        assert [r.ts for r in records] == [1.5, 2.5]
        assert stats.malformed_lines == 1
        assert stats.packets == 2

    def test_invalid_utf8_strict(self):
        """Test that strict parsing reports undecodable bytes as a malformed line"""
        with pytest.raises(MalformedLine) as excinfo:
            parse_line(b'{"ts":1.5,"src_ip":"\xff"}', 3)
        assert excinfo.value.line_number == 3

    def test_strict_mode_raises(self, tmp_path):
        """Test that strict mode raises on the first bad line"""
        path = tmp_path / 'packets.ndjson'
        path.write_text('{"ts":1}\n')
        with pytest.raises(MalformedLine) as excinfo:
            list(read_ndjson(path, strict=True))
        assert excinfo.value.line_number == 1

    def test_empty_file(self, tmp_path):
        """Test reading an empty capture"""
        path = tmp_path / 'empty.ndjson'
        path.write_text('')
        assert list(read_packets(path)) == []

    def test_canonical_output(self, tmp_path):
        """Test canonical NDJSON output"""
        record = parse_line(SAMPLE_LINE, 1)
        assert format_record(record) == SAMPLE_LINE
        path = tmp_path / 'out.ndjson'
        assert write_ndjson(path, [record, record]) == 2
        assert path.read_text() == SAMPLE_LINE + '\n' + SAMPLE_LINE + '\n'

    def test_timestamps_rounded_to_microseconds(self):
        """Test NDJSON timestamp rounding"""
        line = SAMPLE_LINE.replace('"ts":1.5', '"ts":1.50000049')
        assert parse_line(line, 1).ts == 1.5


class TestReadPackets:
    """Format sniffing"""

    def test_pcap_and_ndjson_agree(self, tmp_path, packet):
        """Test that both formats yield the same records"""
        records = [packet(float(i), '1.2.3.4', '192.168.1.10', length=60 + i) for i in range(5)]
        write_pcap(tmp_path / 'a.pcap', records)
        write_ndjson(tmp_path / 'a.ndjson', records)
        assert list(read_packets(tmp_path / 'a.pcap')) == list(read_packets(tmp_path / 'a.ndjson'))

    def test_missing_file(self, tmp_path):
        """Test that a missing capture raises MalformedFile"""
        with pytest.raises(MalformedFile):
            read_packets(tmp_path / 'absent.ndjson')


if __name__ == '__main__':
    pytest.main([__file__])
