import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lscdeval.errors import ConfigError, CorruptStoreError
from lscdeval.store import (
    EmbeddingRecord,
    PoolingSpec,
    aggregate_layers,
    pool_subwords,
    read_store,
    read_store_jsonl,
    usage_vector,
    write_store,
    write_store_jsonl,
)


def record(uid="u1", shape=(1, 2, 3), fill=None, rng=None):
    if fill is not None:
        values = np.full(shape, fill, dtype=np.float32)
    else:
        rng = rng or np.random.default_rng(0)
        values = rng.normal(size=shape).astype(np.float32)
    return EmbeddingRecord(usage_id=uid, values=values)


class TestRecordValidation:
    def test_shape_enforced(self):
        with pytest.raises(ValueError, match="L x T x D"):
            EmbeddingRecord(usage_id="u", values=np.zeros((2, 3), dtype=np.float32))

    def test_nonfinite_rejected(self):
        bad = np.full((1, 1, 2), np.nan, dtype=np.float32)
        with pytest.raises(ValueError, match="non-finite"):
            EmbeddingRecord(usage_id="u", values=bad)

    def test_shape_properties(self):
        r = record(shape=(2, 3, 5))
        assert (r.layers, r.tokens, r.dim) == (2, 3, 5)


class TestBinaryRoundTrip:
    def test_single_record_identical(self, tmp_path):
        r = record(shape=(1, 2, 3))
        path = tmp_path / "s.bin"
        write_store([r], path)
        back = read_store(path)
        assert set(back) == {"u1"}
        assert back["u1"].values.dtype == np.float32
        np.testing.assert_array_equal(back["u1"].values, r.values)

    def test_empty_store(self, tmp_path):
        path = tmp_path / "s.bin"
        write_store([], path)
        assert read_store(path) == {}

    def test_unicode_ids(self, tmp_path):
        r = record(uid="plane-é中-01")
        path = tmp_path / "s.bin"
        write_store([r], path)
        assert set(read_store(path)) == {r.usage_id}

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.integers(0, 2**32 - 1), min_size=1, max_size=64), st.integers(1, 4), st.integers(1, 3))
    def test_bit_exact_for_arbitrary_payloads(self, bit_patterns, layers, tokens):
        import tempfile
        from pathlib import Path

        raw = np.array(bit_patterns, dtype=np.uint32).view(np.float32)
        raw = raw[np.isfinite(raw)]
        if raw.size == 0:
            return
        dim = raw.size
        values = np.tile(raw, layers * tokens).reshape(layers, tokens, dim)
        rec = EmbeddingRecord(usage_id="u", values=values)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "s.bin"
            write_store([rec], path)
            back = read_store(path)["u"]
        assert back.values.tobytes() == rec.values.tobytes()

    def test_subnormals_survive(self, tmp_path):
        tiny = np.array([1e-42, -1e-45, 5e-40], dtype=np.float32)  # subnormal range
        assert 0.0 < tiny[0] < np.finfo(np.float32).tiny
        rec = EmbeddingRecord(usage_id="u", values=tiny.reshape(1, 1, 3))
        path = tmp_path / "s.bin"
        write_store([rec], path)
        back = read_store(path)["u"]
        assert back.values.tobytes() == rec.values.tobytes()

    def test_duplicate_id_on_write(self, tmp_path):
        with pytest.raises(CorruptStoreError, match="duplicate"):
            write_store([record("u1"), record("u1")], tmp_path / "s.bin")


class TestCorruption:
    def _store(self, tmp_path, records=None):
        path = tmp_path / "s.bin"
        write_store(records or [record("u1"), record("u2", shape=(2, 1, 4))], path)
        return path

    def test_bad_magic_offset_zero(self, tmp_path):
        path = self._store(tmp_path)
        data = bytearray(path.read_bytes())
        data[3] ^= 0xFF
        path.write_bytes(bytes(data))
        with pytest.raises(CorruptStoreError, match="magic") as err:
            read_store(path)
        assert err.value.offset == 0

    def test_every_single_byte_magic_mutation_detected(self, tmp_path):
        path = self._store(tmp_path)
        original = path.read_bytes()
        for i in range(8):
            data = bytearray(original)
            data[i] ^= 0x01
            path.write_bytes(bytes(data))
            with pytest.raises(CorruptStoreError):
                read_store(path)

    def test_truncation_reports_offset(self, tmp_path):
        path = self._store(tmp_path)
        data = path.read_bytes()
        path.write_bytes(data[: len(data) - 5])
        with pytest.raises(CorruptStoreError, match="truncated") as err:
            read_store(path)
        assert err.value.offset is not None

    def test_trailing_garbage(self, tmp_path):
        path = self._store(tmp_path)
        path.write_bytes(path.read_bytes() + b"xx")
        with pytest.raises(CorruptStoreError, match="trailing"):
            read_store(path)

    def test_nonfinite_payload_rejected_on_read(self, tmp_path):
        path = self._store(tmp_path, records=[record("u1", shape=(1, 1, 2))])
        data = bytearray(path.read_bytes())
        data[-8:-4] = np.array([np.inf], dtype="<f4").tobytes()
        path.write_bytes(bytes(data))
        with pytest.raises(CorruptStoreError, match="non-finite"):
            read_store(path)


class TestJsonlTwin:
    def test_round_trip(self, tmp_path):
        records = [record("u1"), record("u2", shape=(2, 1, 4))]
        path = tmp_path / "s.jsonl"
        write_store_jsonl(records, path)
        back = read_store_jsonl(path)
        for r in records:
            np.testing.assert_allclose(back[r.usage_id].values, r.values, rtol=0, atol=0)


class TestPooling:
    matrix = np.array([[1.0, 3.0], [3.0, 5.0]])

    def test_mean(self):
        np.testing.assert_array_equal(pool_subwords(self.matrix, "mean"), [2.0, 4.0])

    def test_max(self):
        np.testing.assert_array_equal(pool_subwords(self.matrix, "max"), [3.0, 5.0])

    def test_first(self):
        np.testing.assert_array_equal(pool_subwords(self.matrix, "first"), [1.0, 3.0])

    def test_unknown_method(self):
        with pytest.raises(ConfigError):
            pool_subwords(self.matrix, "last")

    @given(st.lists(st.lists(st.floats(-10, 10), min_size=3, max_size=3), min_size=2, max_size=6))
    def test_mean_permutation_invariant_first_not(self, rows):
        matrix = np.array(rows)
        reversed_rows = matrix[::-1]
        np.testing.assert_allclose(
            pool_subwords(matrix, "mean"), pool_subwords(reversed_rows, "mean"), atol=1e-12
        )
        if not np.array_equal(matrix[0], matrix[-1]):
            assert not np.array_equal(
                pool_subwords(matrix, "first"), pool_subwords(reversed_rows, "first")
            )


class TestLayerAggregation:
    def test_average(self):
        out = aggregate_layers([np.array([0.0, 2.0]), np.array([2.0, 4.0])], "average")
        np.testing.assert_array_equal(out, [1.0, 3.0])

    def test_concatenate(self):
        out = aggregate_layers([np.array([0.0, 2.0]), np.array([2.0, 4.0])], "concatenate")
        np.testing.assert_array_equal(out, [0.0, 2.0, 2.0, 4.0])

    def test_single_layer_identity(self):
        v = np.array([1.0, 2.0])
        np.testing.assert_array_equal(aggregate_layers([v], "average"), v)
        np.testing.assert_array_equal(aggregate_layers([v], "concatenate"), v)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="disagree"):
            aggregate_layers([np.zeros(2), np.zeros(3)], "average")


class TestUsageVector:
    def test_identity_for_1x1(self):
        r = record(shape=(1, 1, 4))
        np.testing.assert_array_equal(usage_vector(r), r.values[0, 0])

    def test_last_four_concatenation_dim(self):
        r = record(shape=(12, 2, 768))
        spec = PoolingSpec(layer_selection=(-4, -3, -2, -1), layer_aggregation="concatenate")
        assert usage_vector(r, spec).shape == (3072,)

    def test_hand_computed_2x2x2(self):
        values = np.array(
            [[[1.0, 2.0], [3.0, 4.0]], [[5.0, 6.0], [7.0, 8.0]]], dtype=np.float32
        )
        r = EmbeddingRecord(usage_id="u", values=values)
        spec = PoolingSpec(subword_pooling="mean", layer_selection=(0, 1), layer_aggregation="average")
        # layer 0 mean: [2,3]; layer 1 mean: [6,7]; average: [4,5]
        np.testing.assert_allclose(usage_vector(r, spec), [4.0, 5.0])

    def test_concatenation_preserves_sublayers(self):
        r = record(shape=(3, 2, 5), rng=np.random.default_rng(5))
        spec = PoolingSpec(layer_selection=(2, 0), layer_aggregation="concatenate")
        out = usage_vector(r, spec)
        np.testing.assert_allclose(out[:5], r.values[2].mean(axis=0))
        np.testing.assert_allclose(out[5:], r.values[0].mean(axis=0))

    def test_layer_out_of_range(self):
        r = record(shape=(2, 1, 3))
        with pytest.raises(ConfigError, match="out of range"):
            usage_vector(r, PoolingSpec(layer_selection=(5,)))

    def test_spec_validation(self):
        with pytest.raises(ConfigError):
            PoolingSpec(subword_pooling="median")
        with pytest.raises(ConfigError):
            PoolingSpec(layer_selection=())
