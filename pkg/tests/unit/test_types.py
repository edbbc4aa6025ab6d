"""
Test domain types and direction resolution
"""

import pytest
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent.parent / 'src'))

from honeyguard.core.errors import ConfigError, InvalidRecord
from honeyguard.core.types import (Direction, HostKey, Label, NetConfig, TimeWindow,
                                   direction_of, local_endpoint, remote_host)


class TestPacketRecord:
    """PacketRecord invariants"""

    def test_valid_record(self, packet):
        """Test a valid packet record"""
        p = packet(1.5, '1.2.3.4', '192.168.1.5', src_port=4444, dst_port=23, length=60, ttl=51)
        assert p.five_tuple == ('1.2.3.4', '192.168.1.5', 4444, 23, 6)
        assert p.to_dict()['len'] == 60

    @pytest.mark.parametrize('changes', [
        {'length': 10},
        {'ts': -1.0},
        {'ts': float('nan')},
        {'ttl': 256},
        {'proto': 1, 'src_port': 5},
        {'dst_port': 70000},
        {'src': '1.2.3'},
        {'src': '::1'},
    ])
    def test_invalid_record_rejected(self, packet, changes):
        """Test rejection of invalid packet fields"""
        kwargs = dict(ts=0.0, src='1.2.3.4', dst='192.168.1.5')
        kwargs.update(changes)
        with pytest.raises(InvalidRecord):
            packet(**kwargs)

    def test_portless_protocol_allows_zero_ports(self, packet):
        """Test zero ports for protocols without ports"""
        p = packet(0.0, '1.2.3.4', '192.168.1.5', src_port=0, dst_port=0, proto=1, length=84)
        assert p.proto == 1

    def test_swap(self, packet):
        """Test swapping packet endpoints"""
        p = packet(0.0, '1.2.3.4', '192.168.1.5', src_port=1, dst_port=2)
        s = p.swap()
        assert (s.src_addr, s.dst_addr, s.src_port, s.dst_port) == ('192.168.1.5', '1.2.3.4', 2, 1)
        assert s.swap() == p


class TestDirection:
    """Direction of a packet relative to the local networks"""

    def test_incoming(self, net_config, packet):
        """Test incoming direction"""
        p = packet(0.0, '8.8.8.8', '192.168.1.10')
        assert direction_of(p, net_config) is Direction.INCOMING
        assert remote_host(p, Direction.INCOMING) == HostKey('8.8.8.8')
        assert local_endpoint(p, Direction.INCOMING) == '192.168.1.10'

    def test_outgoing(self, net_config, packet):
        """Test outgoing direction"""
        p = packet(0.0, '192.168.1.10', '8.8.8.8')
        assert direction_of(p, net_config) is Direction.OUTGOING
        assert remote_host(p, Direction.OUTGOING) == HostKey('8.8.8.8')

    def test_both_local_not_applicable(self, net_config, packet):
        """Test that local-to-local packets have no direction"""
        assert direction_of(packet(0.0, '192.168.1.10', '192.168.1.11'), net_config) is None

    def test_both_remote_not_applicable(self, net_config, packet):
        """Test that remote-to-remote packets have no direction"""
        assert direction_of(packet(0.0, '1.1.1.1', '8.8.8.8'), net_config) is None

    def test_multiple_local_networks(self, packet):
        """Test several local networks"""
        cfg = NetConfig.build(['10.0.0.0/8', '192.168.0.0/16'], [], [])
        assert direction_of(packet(0.0, '10.1.2.3', '192.168.4.4'), cfg) is None
        assert direction_of(packet(0.0, '10.1.2.3', '8.8.8.8'), cfg) is Direction.OUTGOING


class TestNetConfig:
    """NetConfig validation"""

    def test_requires_local_network(self):
        """Test that at least one local network is required"""
        with pytest.raises(ConfigError):
            NetConfig.build([], [], [])

    def test_honeypot_and_device_disjoint(self):
        """Test that honeypots and devices may not overlap"""
        with pytest.raises(ConfigError):
            NetConfig.build(['192.168.1.0/24'], ['192.168.1.10'], ['192.168.1.10'])

    def test_roles_must_be_local(self):
        """Test that honeypots and devices must be local"""
        with pytest.raises(ConfigError):
            NetConfig.build(['192.168.1.0/24'], ['10.0.0.1'], [])

    def test_invalid_cidr(self):
        """Test rejection of an invalid network"""
        with pytest.raises(ConfigError):
            NetConfig.build(['192.168.1.0/33'], [], [])

    def test_from_config_accepts_comma_strings(self):
        """Test comma-separated addresses from configuration"""
        class Source:
            values = {
                'network.local_nets': '192.168.1.0/24',
                'network.honeypots': '192.168.1.100',
                'network.devices': '192.168.1.10, 192.168.1.11',
            }

            def get(self, key, default=None):
                return self.values.get(key, default)

        cfg = NetConfig.from_config(Source())
        assert cfg.device_addrs == frozenset({'192.168.1.10', '192.168.1.11'})


class TestSmallTypes:
    """TimeWindow and Label"""

    def test_window_half_open(self):
        """Test half-open window membership"""
        w = TimeWindow(0.0, 3600.0)
        assert w.contains(0.0)
        assert not w.contains(3600.0)
        assert w.duration == 3600.0
        assert w.shift(100.0) == TimeWindow(100.0, 3700.0)

    def test_empty_window_rejected(self):
        """Test rejection of empty windows"""
        with pytest.raises(ValueError):
            TimeWindow(5.0, 5.0)

    @pytest.mark.parametrize('text,label', [
        ('malicious', Label.MALICIOUS), ('Benign', Label.BENIGN), ('1', Label.MALICIOUS),
        ('0', Label.BENIGN), (Label.BENIGN, Label.BENIGN),
    ])
    def test_label_parse(self, text, label):
        """Test parsing labels"""
        assert Label.parse(text) is label

    def test_label_parse_unknown(self):
        """Test rejection of unknown labels"""
        with pytest.raises(ValueError):
            Label.parse('suspicious')


if __name__ == '__main__':
    pytest.main([__file__])
