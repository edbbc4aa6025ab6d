"""
Binary model file format

    magic "SADM" | version u16 | algorithm id u8 | schema_hash u64 |
    trained_at f64 | payload length u32 | payload | CRC32 of everything before it

All integers are little-endian. The payload carries the hyperparameters,
the training window and class counts, then the estimator arrays.
"""

import struct
import zlib
from pathlib import Path
from typing import List, Union

import numpy as np

from ..core.errors import BadMagic, CorruptPayload, SchemaMismatch, UnsupportedVersion
from ..core.types import TimeWindow
from ..features.extract import SCHEMA_HASH
from .algorithms import AlgorithmKind, AlgorithmSpec
from .ensemble import GradientBoosting, RandomForest
from .knn import KNearestNeighbors
from .model import DetectionModel
from .tree import DecisionTree, RegressionTree

MAGIC = b"SADM"
FORMAT_VERSION = 1

_HEADER = struct.Struct('<4sHBQdI')
_CRC = struct.Struct('<I')
_SPEC = struct.Struct('<IIIBIdIiQ')
_WINDOW = struct.Struct('<ddII')
_U32 = struct.Struct('<I')
_F64 = struct.Struct('<d')


class _Writer:
    def __init__(self):
        self.parts: List[bytes] = []

    def pack(self, fmt: struct.Struct, *values) -> None:
        self.parts.append(fmt.pack(*values))

    def array(self, values: np.ndarray, dtype: str) -> None:
        data = np.ascontiguousarray(values, dtype=dtype)
        self.parts.append(struct.pack('<B', data.ndim))
        self.parts.append(struct.pack(f'<{data.ndim}I', *data.shape))
        self.parts.append(data.tobytes())

    def getvalue(self) -> bytes:
        return b"".join(self.parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, size: int) -> bytes:
        if self.pos + size > len(self.data):
            raise CorruptPayload("payload ends early")
        chunk = self.data[self.pos:self.pos + size]
        self.pos += size
        return chunk

    def unpack(self, fmt: struct.Struct) -> tuple:
        return fmt.unpack(self.take(fmt.size))

    def array(self, dtype: str) -> np.ndarray:
        (ndim,) = struct.unpack('<B', self.take(1))
        shape = struct.unpack(f'<{ndim}I', self.take(4 * ndim))
        dt = np.dtype(dtype)
        count = int(np.prod(shape, dtype=np.int64)) if ndim else 1
        raw = self.take(count * dt.itemsize)
        return np.frombuffer(raw, dtype=dt).reshape(shape).astype(dt.newbyteorder('='))

    def finish(self) -> None:
        if self.pos != len(self.data):
            raise CorruptPayload(f"{len(self.data) - self.pos} trailing payload bytes")


def _write_tree(w: _Writer, tree: DecisionTree) -> None:
    w.array(tree.feature, '<i4')
    w.array(tree.threshold, '<f8')
    w.array(tree.left, '<i4')
    w.array(tree.right, '<i4')
    w.array(tree.counts, '<i8')


def _read_tree(r: _Reader, tree: DecisionTree) -> DecisionTree:
    tree.feature = r.array('<i4')
    tree.threshold = r.array('<f8')
    tree.left = r.array('<i4')
    tree.right = r.array('<i4')
    tree.counts = r.array('<i8')
    return tree


def _write_estimator(w: _Writer, model: DetectionModel) -> None:
    est = model.estimator
    kind = model.algorithm.kind
    if kind is AlgorithmKind.KNN:
        w.array(est.X, '<f8')
        w.array(est.y, '<i1')
    elif kind is AlgorithmKind.DECISION_TREE:
        _write_tree(w, est)
    elif kind is AlgorithmKind.RANDOM_FOREST:
        w.pack(_U32, len(est.trees))
        for tree in est.trees:
            _write_tree(w, tree)
    else:
        w.pack(_F64, est.init)
        w.pack(_U32, len(est.stages))
        for stage in est.stages:
            w.array(stage.feature, '<i4')
            w.array(stage.threshold, '<f8')
            w.array(stage.left, '<i4')
            w.array(stage.right, '<i4')
            w.array(stage.value, '<f8')


def _read_estimator(r: _Reader, spec: AlgorithmSpec):
    kind = spec.kind
    if kind is AlgorithmKind.KNN:
        est = KNearestNeighbors(k=spec.k)
        est.X = r.array('<f8')
        est.y = r.array('<i1')
        return est
    if kind is AlgorithmKind.DECISION_TREE:
        return _read_tree(r, DecisionTree(max_depth=spec.dt_max_depth))
    if kind is AlgorithmKind.RANDOM_FOREST:
        est = RandomForest(n_trees=spec.n_trees, max_features=spec.max_features,
                           bootstrap=spec.bootstrap, seed=spec.seed)
        (count,) = r.unpack(_U32)
        est.trees = [_read_tree(r, DecisionTree(max_features=spec.max_features))
                     for _ in range(count)]
        return est
    est = GradientBoosting(n_stages=spec.n_stages, learning_rate=spec.learning_rate,
                           max_depth=spec.gbdt_max_depth)
    (est.init,) = r.unpack(_F64)
    (count,) = r.unpack(_U32)
    for _ in range(count):
        stage = RegressionTree(spec.gbdt_max_depth)
        stage.feature = r.array('<i4')
        stage.threshold = r.array('<f8')
        stage.left = r.array('<i4')
        stage.right = r.array('<i4')
        stage.value = r.array('<f8')
        est.stages.append(stage)
    return est


def serialize_model(model: DetectionModel) -> bytes:
    spec = model.algorithm
    w = _Writer()
    w.pack(_SPEC, spec.k, spec.n_trees, spec.max_features, int(spec.bootstrap),
           spec.n_stages, spec.learning_rate, spec.gbdt_max_depth,
           -1 if spec.dt_max_depth is None else spec.dt_max_depth, spec.seed)
    w.pack(_WINDOW, model.train_window.start, model.train_window.end, *model.class_counts)
    _write_estimator(w, model)
    payload = w.getvalue()

    body = _HEADER.pack(MAGIC, FORMAT_VERSION, spec.kind.wire_id, model.schema_hash,
                        model.trained_at, len(payload)) + payload
    return body + _CRC.pack(zlib.crc32(body))


def deserialize_model(data: bytes, expected_schema: int = SCHEMA_HASH) -> DetectionModel:
    """Decode a model file; checks run magic, version, length/CRC, then schema"""
    data = bytes(data)
    if data[:len(MAGIC)] != MAGIC:
        raise BadMagic(f"bad magic {data[:len(MAGIC)]!r}")
    if len(data) < _HEADER.size + _CRC.size:
        raise CorruptPayload(f"model file too short ({len(data)} bytes)")

    _, version, algo_id, schema, trained_at, length = _HEADER.unpack_from(data)
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"model format version {version} (supported: {FORMAT_VERSION})")
    if _HEADER.size + length + _CRC.size != len(data):
        raise CorruptPayload(f"payload length {length} does not match file size {len(data)}")
    body, (crc,) = data[:-_CRC.size], _CRC.unpack_from(data, len(data) - _CRC.size)
    if zlib.crc32(body) != crc:
        raise CorruptPayload("checksum mismatch")
    if schema != expected_schema:
        raise SchemaMismatch(expected_schema, schema, "model file")

    try:
        kind = AlgorithmKind.from_wire_id(algo_id)
    except ValueError as e:
        raise CorruptPayload(str(e)) from e

    r = _Reader(body[_HEADER.size:])
    k, n_trees, max_features, bootstrap, n_stages, lr, gbdt_depth, dt_depth, seed = r.unpack(_SPEC)
    spec = AlgorithmSpec(kind=kind, k=k, n_trees=n_trees, max_features=max_features,
                         bootstrap=bool(bootstrap), n_stages=n_stages, learning_rate=lr,
                         gbdt_max_depth=gbdt_depth,
                         dt_max_depth=None if dt_depth < 0 else dt_depth, seed=seed)
    start, end, benign, malicious = r.unpack(_WINDOW)
    estimator = _read_estimator(r, spec)
    r.finish()

    return DetectionModel(
        algorithm=spec,
        schema_hash=schema,
        trained_at=trained_at,
        train_window=TimeWindow(start, end),
        class_counts=(benign, malicious),
        estimator=estimator,
    )


def save_model(path: Union[str, Path], model: DetectionModel) -> int:
    data = serialize_model(model)
    Path(path).write_bytes(data)
    return len(data)


def load_model(path: Union[str, Path], expected_schema: int = SCHEMA_HASH) -> DetectionModel:
    return deserialize_model(Path(path).read_bytes(), expected_schema)
