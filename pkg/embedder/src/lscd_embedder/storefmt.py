"""Writer for the embedding store wire format.

Layout (little-endian): magic "LSCDEMB1", u32 record count, then per
record u16 id byte-length, UTF-8 id, u16 layers, u16 tokens, u32 dim and
layers*tokens*dim float32 values in layer-major, token, dim order.
Written independently of the core reader so the byte layout itself stays
the tested contract.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Iterable

import numpy as np

MAGIC = b"LSCDEMB1"


def write_store(records: Iterable[tuple[str, np.ndarray]], path: str | Path) -> int:
    """Write (usage_id, L x T x D float32 array) records; returns the count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    seen: set[str] = set()
    count = 0
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", 0))
        for usage_id, values in records:
            if usage_id in seen:
                raise ValueError(f"duplicate usage id {usage_id!r}")
            seen.add(usage_id)
            values = np.ascontiguousarray(values, dtype="<f4")
            if values.ndim != 3 or min(values.shape) < 1:
                raise ValueError(
                    f"{usage_id!r}: values must be L x T x D, got shape {values.shape}"
                )
            if not np.isfinite(values).all():
                raise ValueError(f"{usage_id!r}: non-finite values")
            id_bytes = usage_id.encode("utf-8")
            layers, tokens, dim = values.shape
            fh.write(struct.pack("<H", len(id_bytes)))
            fh.write(id_bytes)
            fh.write(struct.pack("<HHI", layers, tokens, dim))
            fh.write(values.tobytes())
            count += 1
        fh.seek(len(MAGIC))
        fh.write(struct.pack("<I", count))
    return count
