"""
Model channels: how a freshly trained model reaches the gateway
"""

import os
import tempfile
import threading
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Optional, Union

from ..core.errors import ChannelUnavailable, ConfigError, ModelFormatError
from ..core.logger import logger
from ..ml.model import DetectionModel
from ..ml.serialization import deserialize_model, serialize_model


class ModelChannel(ABC):
    """publish(model) then latest() returns that model; readers only ever see whole models"""

    @abstractmethod
    def publish(self, model: DetectionModel) -> None:
        ...

    @abstractmethod
    def latest(self) -> Optional[DetectionModel]:
        ...

    def reset(self) -> None:
        """Start a new generation: nothing published before this call is visible"""
        self._published = 0

    @property
    def published_count(self) -> int:
        return getattr(self, '_published', 0)


class InProcessChannel(ModelChannel):
    """Reference handoff between threads of one process"""

    def __init__(self):
        self._model: Optional[DetectionModel] = None
        self._published = 0
        self._lock = threading.Lock()

    def publish(self, model: DetectionModel) -> None:
        with self._lock:
            self._model = model
            self._published += 1

    def latest(self) -> Optional[DetectionModel]:
        with self._lock:
            return self._model

    def reset(self) -> None:
        with self._lock:
            self._model = None
            self._published = 0


class FileDropChannel(ModelChannel):
    """Serialized model at a fixed path, replaced by rename of a temp file in the same directory"""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self._published = 0
        self._cache_key = None
        self._cache: Optional[DetectionModel] = None
        self._stale_key = None

    def _file_key(self):
        try:
            stat = os.stat(self.path)
        except OSError:
            return None
        return (stat.st_ino, stat.st_mtime_ns, stat.st_size)

    def reset(self) -> None:
        """Ignore whatever file sits at the path now until a newer one replaces it"""
        self._published = 0
        self._cache_key, self._cache = None, None
        self._stale_key = self._file_key()
        if self._stale_key is not None:
            logger.info("Ignoring model left at drop path", path=str(self.path))

    def publish(self, model: DetectionModel) -> None:
        data = serialize_model(model)
        tmp_name = None
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp_name = tempfile.mkstemp(prefix=f".{self.path.name}.", suffix=".tmp",
                                            dir=str(self.path.parent))
            with os.fdopen(fd, 'wb') as f:
                f.write(data)
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp_name, self.path)
            tmp_name = None
            self._stale_key = None
        except OSError as e:
            raise ChannelUnavailable(f"cannot publish model to {self.path}: {e}") from e
        finally:
            if tmp_name is not None:
                try:
                    os.unlink(tmp_name)
                except OSError:
                    pass
        self._published += 1
        logger.debug("Model dropped", path=str(self.path), size=len(data))

    def latest(self) -> Optional[DetectionModel]:
        try:
            with open(self.path, 'rb') as f:
                stat = os.fstat(f.fileno())
                key = (stat.st_ino, stat.st_mtime_ns, stat.st_size)
                if key == self._stale_key:
                    return None
                self._stale_key = None
                if key == self._cache_key:
                    return self._cache
                data = f.read()
        except FileNotFoundError:
            return None
        except OSError as e:
            raise ChannelUnavailable(f"cannot read model from {self.path}: {e}") from e
        try:
            model = deserialize_model(data)
        except ModelFormatError as e:
            raise ChannelUnavailable(f"unreadable model at {self.path}: {e}") from e
        self._cache_key, self._cache = key, model
        return model


def make_channel(kind: str, path: Union[str, Path, None] = None) -> ModelChannel:
    kind = str(kind).strip().lower()
    if kind == 'memory':
        return InProcessChannel()
    if kind == 'file':
        if not path:
            raise ConfigError("file channel requires adapt.channel_path")
        return FileDropChannel(path)
    raise ConfigError(f"unknown channel kind {kind!r}; expected memory or file")
