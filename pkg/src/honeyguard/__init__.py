"""
honeyguard - self-adaptive anomaly detection for IoT gateway traffic
"""

__version__ = "1.0.0"
__description__ = "Honeypot-labeled IoT traffic classification with SCM/DUM model updates"

from .core.config import Config
from .core.logger import Logger
from .bench.replay import replay

__all__ = ["Config", "Logger", "replay"]
