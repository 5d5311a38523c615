"""On-disk store of per-usage contextualized target-word vectors.

Records keep one float32 vector per (layer, subword token) so pooling and
layer aggregation stay sweepable without re-running model inference.

Binary layout (little-endian throughout):

    magic   8 bytes  b"LSCDEMB1"
    count   u32      number of records
    record  u16 id byte-length, id UTF-8 bytes,
            u16 L, u16 T, u32 D,
            L*T*D IEEE-754 f32 values, layer-major then token then dim

A JSON-lines twin of the format exists for eyeballing records; it is a
debugging aid, not an interchange format.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import ConfigError, CorruptStoreError

MAGIC = b"LSCDEMB1"

SUBWORD_POOLINGS = ("mean", "max", "first")
LAYER_AGGREGATIONS = ("average", "concatenate")


@dataclass(frozen=True)
class EmbeddingRecord:
    """Per-usage target-word vectors: shape (layers, tokens, dim), float32."""

    usage_id: str
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float32)
        if values.ndim != 3 or min(values.shape) < 1:
            raise ValueError(
                f"record {self.usage_id!r}: values must be a non-empty L x T x D array, "
                f"got shape {values.shape}"
            )
        if not np.isfinite(values).all():
            raise ValueError(f"record {self.usage_id!r}: non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def layers(self) -> int:
        return self.values.shape[0]

    @property
    def tokens(self) -> int:
        return self.values.shape[1]

    @property
    def dim(self) -> int:
        return self.values.shape[2]


@dataclass(frozen=True)
class PoolingSpec:
    """How to turn a record into one vector.

    ``layer_selection`` is an ordered list of layer indices; negative
    indices count from the last layer.  The default (mean subword pooling,
    last layer, averaging) is the simplest and most common choice.
    """

    subword_pooling: str = "mean"
    layer_selection: tuple[int, ...] = (-1,)
    layer_aggregation: str = "average"

    def __post_init__(self):
        if self.subword_pooling not in SUBWORD_POOLINGS:
            raise ConfigError(f"unknown subword pooling {self.subword_pooling!r}")
        if self.layer_aggregation not in LAYER_AGGREGATIONS:
            raise ConfigError(f"unknown layer aggregation {self.layer_aggregation!r}")
        if not self.layer_selection:
            raise ConfigError("layer selection must not be empty")
        object.__setattr__(self, "layer_selection", tuple(int(i) for i in self.layer_selection))

    def resolve_layers(self, n_layers: int) -> list[int]:
        resolved = []
        for idx in self.layer_selection:
            real = idx + n_layers if idx < 0 else idx
            if not (0 <= real < n_layers):
                raise ConfigError(
                    f"layer index {idx} out of range for a record with {n_layers} layers"
                )
            resolved.append(real)
        return resolved


def write_store(records: Iterable[EmbeddingRecord], path: str | Path) -> None:
    """Write records to a binary store; single writer, ids must be unique."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    seen: set[str] = set()
    count = 0
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", 0))  # patched after the stream is drained
        for record in records:
            if record.usage_id in seen:
                raise CorruptStoreError(f"duplicate usage id {record.usage_id!r} in store write")
            seen.add(record.usage_id)
            id_bytes = record.usage_id.encode("utf-8")
            if len(id_bytes) > 0xFFFF:
                raise CorruptStoreError(f"usage id too long for store: {record.usage_id[:32]!r}...")
            fh.write(struct.pack("<H", len(id_bytes)))
            fh.write(id_bytes)
            fh.write(struct.pack("<HHI", record.layers, record.tokens, record.dim))
            fh.write(np.ascontiguousarray(record.values, dtype="<f4").tobytes())
            count += 1
        fh.seek(len(MAGIC))
        fh.write(struct.pack("<I", count))


def read_store(path: str | Path) -> dict[str, EmbeddingRecord]:
    """Read a binary store, validating magic, counts and finiteness."""
    path = Path(path)
    data = path.read_bytes()
    if len(data) < len(MAGIC) + 4:
        raise CorruptStoreError(f"{path}: truncated header ({len(data)} bytes)", offset=0)
    if data[: len(MAGIC)] != MAGIC:
        raise CorruptStoreError(f"{path}: bad magic {data[:len(MAGIC)]!r}", offset=0)
    (count,) = struct.unpack_from("<I", data, len(MAGIC))
    offset = len(MAGIC) + 4
    records: dict[str, EmbeddingRecord] = {}
    for i in range(count):
        if offset + 2 > len(data):
            raise CorruptStoreError(f"{path}: truncated at record {i}", offset=offset)
        (id_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        if offset + id_len + 8 > len(data):
            raise CorruptStoreError(f"{path}: truncated record header at record {i}", offset=offset)
        try:
            usage_id = data[offset : offset + id_len].decode("utf-8")
        except UnicodeDecodeError:
            raise CorruptStoreError(f"{path}: undecodable id at record {i}", offset=offset)
        offset += id_len
        layers, tokens, dim = struct.unpack_from("<HHI", data, offset)
        offset += 8
        if min(layers, tokens, dim) < 1:
            raise CorruptStoreError(
                f"{path}: record {usage_id!r} declares empty shape "
                f"({layers}, {tokens}, {dim})", offset=offset - 8,
            )
        n_bytes = layers * tokens * dim * 4
        if offset + n_bytes > len(data):
            raise CorruptStoreError(f"{path}: truncated payload for {usage_id!r}", offset=offset)
        values = np.frombuffer(data, dtype="<f4", count=layers * tokens * dim, offset=offset)
        values = values.reshape(layers, tokens, dim).copy()
        if not np.isfinite(values).all():
            raise CorruptStoreError(f"{path}: non-finite values in {usage_id!r}", offset=offset)
        offset += n_bytes
        if usage_id in records:
            raise CorruptStoreError(f"{path}: duplicate usage id {usage_id!r}", offset=offset)
        records[usage_id] = EmbeddingRecord(usage_id=usage_id, values=values)
    if offset != len(data):
        raise CorruptStoreError(
            f"{path}: {len(data) - offset} trailing bytes after {count} records", offset=offset
        )
    return records


def write_store_jsonl(records: Iterable[EmbeddingRecord], path: str | Path) -> None:
    """Debug twin of the binary format: one record per line, explicit shape."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            doc = {
                "usage_id": record.usage_id,
                "layers": record.layers,
                "tokens": record.tokens,
                "dim": record.dim,
                "values": [float(v) for v in record.values.ravel()],
            }
            fh.write(json.dumps(doc) + "\n")


def read_store_jsonl(path: str | Path) -> dict[str, EmbeddingRecord]:
    records: dict[str, EmbeddingRecord] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            doc = json.loads(line)
            values = np.array(doc["values"], dtype=np.float32).reshape(
                doc["layers"], doc["tokens"], doc["dim"]
            )
            record = EmbeddingRecord(usage_id=doc["usage_id"], values=values)
            if record.usage_id in records:
                raise CorruptStoreError(f"{path}:{lineno}: duplicate usage id {record.usage_id!r}")
            records[record.usage_id] = record
    return records


def pool_subwords(matrix: np.ndarray, method: str = "mean") -> np.ndarray:
    """Collapse a T x D subword matrix into one D-vector."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] < 1:
        raise ValueError(f"expected a T x D matrix with T >= 1, got shape {matrix.shape}")
    if method == "mean":
        return matrix.mean(axis=0)
    if method == "max":
        return matrix.max(axis=0)
    if method == "first":
        return matrix[0].copy()
    raise ConfigError(f"unknown subword pooling {method!r}")


def aggregate_layers(vectors: list[np.ndarray], method: str = "average") -> np.ndarray:
    """Combine per-layer vectors: elementwise mean or concatenation."""
    if not vectors:
        raise ValueError("no layer vectors to aggregate")
    dims = {np.asarray(v).shape for v in vectors}
    if len(dims) != 1 or any(len(s) != 1 for s in dims):
        raise ValueError(f"layer vectors disagree in shape: {sorted(dims)}")
    stacked = np.stack([np.asarray(v) for v in vectors])
    if method == "average":
        return stacked.mean(axis=0)
    if method == "concatenate":
        return stacked.reshape(-1)
    raise ConfigError(f"unknown layer aggregation {method!r}")


def usage_vector(record: EmbeddingRecord, spec: PoolingSpec = PoolingSpec()) -> np.ndarray:
    """Pool a record into a single vector per the pooling parameters.

    Equals ``aggregate_layers`` over ``pool_subwords`` of each selected
    layer, in selection order.
    """
    layer_indices = spec.resolve_layers(record.layers)
    pooled = [pool_subwords(record.values[i], spec.subword_pooling) for i in layer_indices]
    return aggregate_layers(pooled, spec.layer_aggregation)
