"""The portable on-disk store of contextualized target-word vectors.

Records keep every requested layer and subword token, so pooling and
layer-aggregation choices stay sweepable after inference: the same store
serves mean/max/first subword pooling and last-layer or concatenated
multi-layer vectors.
"""

import tempfile
from pathlib import Path

import numpy as np

from lscdeval import (
    EmbeddingRecord,
    PoolingSpec,
    read_store,
    usage_vector,
    vector_distance,
    write_store,
)

rng = np.random.default_rng(0)

# pretend a 4-layer encoder embedded two usages of the same word
records = [
    EmbeddingRecord(usage_id="old-1", values=rng.normal(size=(4, 3, 16)).astype(np.float32)),
    EmbeddingRecord(usage_id="new-1", values=rng.normal(size=(4, 2, 16)).astype(np.float32)),
]

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "vectors.bin"
    write_store(records, path)
    print(f"store written: {path.stat().st_size} bytes for {len(records)} records")
    back = read_store(path)
    print("round trip bit-exact:",
          all(back[r.usage_id].values.tobytes() == r.values.tobytes() for r in records))

default = PoolingSpec()  # mean subwords, last layer, averaging
last4 = PoolingSpec(layer_selection=(-4, -3, -2, -1), layer_aggregation="concatenate")
first_subword = PoolingSpec(subword_pooling="first")

for name, spec in (("default", default), ("last-4 concat", last4), ("first subword", first_subword)):
    v = usage_vector(records[0], spec)
    print(f"{name:>14}: dim {v.shape[0]}")

v1 = usage_vector(records[0], default)
v2 = usage_vector(records[1], default)
print("\ncosine distance between the two usages:",
      round(vector_distance(v1, v2, "cosine"), 4))
