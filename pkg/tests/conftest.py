"""
Shared fixtures for the honeyguard test suite
"""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from honeyguard.core.types import NetConfig, PacketRecord  # noqa: E402

HONEYPOT = '192.168.1.100'
DEVICE = '192.168.1.10'


def make_packet(ts, src, dst, src_port=40000, dst_port=443, proto=6, length=100, ttl=64):
    return PacketRecord(ts=ts, src_addr=src, dst_addr=dst, src_port=src_port,
                        dst_port=dst_port, proto=proto, length=length, ttl=ttl)


@pytest.fixture
def net_config():
    return NetConfig.build(['192.168.1.0/24'], [HONEYPOT],
                           [f'192.168.1.{i}' for i in range(10, 20)])


@pytest.fixture
def packet():
    return make_packet
