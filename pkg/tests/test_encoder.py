import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intertext.encoder import (
    EncoderConfig,
    StudentModel,
    encode,
    encode_batch,
    feature_arrays,
    featurize,
    init_student,
    load_model,
    pool64,
    save_model,
)
from intertext.errors import StoreFormatError
from intertext.rng import Xoshiro256StarStar


def tiny_config(**kw):
    defaults = dict(ngram_min=3, ngram_max=5, buckets=2**10,
                    hidden_dim=4, out_dim=3, hash_seed=7)
    defaults.update(kw)
    return EncoderConfig(**defaults)


def random_model(config, seed=0):
    return init_student(config, seed)


class TestConfig:
    def test_defaults(self):
        cfg = EncoderConfig()
        assert (cfg.ngram_min, cfg.ngram_max) == (3, 5)
        assert cfg.buckets == 2 ** 18
        assert cfg.hidden_dim == 256
        assert cfg.out_dim == 768
        assert cfg.hash_seed == 0x5EED

    def test_validation(self):
        with pytest.raises(ValueError):
            tiny_config(ngram_min=0)
        with pytest.raises(ValueError):
            tiny_config(ngram_min=4, ngram_max=3)
        with pytest.raises(ValueError):
            tiny_config(buckets=100)  # not a power of two
        with pytest.raises(ValueError):
            tiny_config(buckets=1)
        with pytest.raises(ValueError):
            tiny_config(hidden_dim=0)
        with pytest.raises(ValueError):
            tiny_config(out_dim=0)
        with pytest.raises(ValueError):
            tiny_config(hash_seed=-1)
        with pytest.raises(ValueError):
            tiny_config(hash_seed=2**64)


class TestFeaturize:
    def test_empty_text(self):
        assert featurize("", tiny_config()) == []

    def test_frozen_hand_values(self):
        # regression anchors for the hashing recipe
        cfg = EncoderConfig(ngram_min=3, ngram_max=5, buckets=2**18,
                            hidden_dim=4, out_dim=4, hash_seed=0x5EED)
        assert featurize("ab", cfg) == [(126413, 1), (232326, 1), (234076, 1)]
        cfg33 = EncoderConfig(ngram_min=3, ngram_max=3, buckets=2**10,
                              hidden_dim=4, out_dim=4, hash_seed=7)
        assert featurize("a", cfg33) == [(143, 1)]
        assert featurize("aaa", cfg33) == [(181, 1), (971, 1), (1009, 1)]

    def test_casefolded(self):
        cfg = tiny_config()
        assert featurize("Arma Virumque", cfg) == featurize("arma virumque", cfg)
        assert featurize("ΛΌΓΟΣ", cfg) == featurize("λόγοσ", cfg)

    def test_sorted_by_bucket(self):
        feats = featurize("the quick brown fox", tiny_config())
        buckets = [f for f, _ in feats]
        assert buckets == sorted(buckets)
        assert len(set(buckets)) == len(buckets)

    def test_repeated_ngrams_accumulate(self):
        # "aaaa" padded "#aaaa#": n=3 gives #aa, aaa, aaa, aa# -> "aaa" twice
        cfg = EncoderConfig(ngram_min=3, ngram_max=3, buckets=2**10,
                            hidden_dim=4, out_dim=4, hash_seed=7)
        counts = dict(featurize("aaaa", cfg))
        assert sorted(counts.values()) == [1, 1, 2]

    def test_seed_changes_buckets(self):
        a = featurize("some text", tiny_config(hash_seed=1))
        b = featurize("some text", tiny_config(hash_seed=2))
        assert a != b

    @settings(max_examples=80, deadline=None)
    @given(st.text(max_size=40), st.integers(1, 4), st.integers(0, 3))
    def test_total_count_matches_ngram_positions(self, text, ngram_min, span):
        ngram_max = ngram_min + span
        cfg = EncoderConfig(ngram_min=ngram_min, ngram_max=ngram_max,
                            buckets=2**12, hidden_dim=2, out_dim=2, hash_seed=3)
        feats = featurize(text, cfg)
        if not text:
            assert feats == []
            return
        padded_len = len("#" + text.casefold() + "#")
        expected = sum(
            max(0, padded_len - n + 1) for n in range(ngram_min, ngram_max + 1)
        )
        assert sum(c for _, c in feats) == expected

    def test_feature_arrays_match(self):
        cfg = tiny_config()
        feats = featurize("arma virumque cano", cfg)
        idx, cnt = feature_arrays("arma virumque cano", cfg)
        assert idx.dtype == np.int64
        assert cnt.dtype == np.float64
        assert list(idx) == [f for f, _ in feats]
        assert list(cnt) == [c for _, c in feats]


class TestEncode:
    def test_zero_embedding_table_gives_bias(self):
        cfg = tiny_config()
        model = StudentModel(
            cfg,
            np.zeros((cfg.buckets, cfg.hidden_dim), np.float32),
            np.ones((cfg.out_dim, cfg.hidden_dim), np.float32),
            np.array([1.0, 2.0, 3.0], np.float32),
        )
        out = encode(model, "any text at all")
        assert np.array_equal(out, np.array([1.0, 2.0, 3.0], np.float32))

    def test_empty_text_gives_bias(self):
        model = random_model(tiny_config())
        assert np.array_equal(encode(model, ""), model.b)

    def test_single_feature_is_affine_of_row(self):
        # one n-gram -> pooled vector is exactly that E row
        cfg = EncoderConfig(ngram_min=3, ngram_max=3, buckets=2**10,
                            hidden_dim=4, out_dim=3, hash_seed=7)
        model = random_model(cfg, seed=5)
        (bucket, count), = featurize("a", cfg)
        assert count == 1
        expected = (
            model.W.astype(np.float64) @ model.E[bucket].astype(np.float64)
            + model.b.astype(np.float64)
        ).astype(np.float32)
        assert np.array_equal(encode(model, "a"), expected)

    def test_output_shape_and_dtype(self):
        model = random_model(tiny_config())
        out = encode(model, "words here")
        assert out.shape == (3,)
        assert out.dtype == np.float32

    def test_pool_is_count_weighted_mean(self):
        cfg = tiny_config()
        model = random_model(cfg)
        idx = np.array([2, 5, 9], dtype=np.int64)
        cnt = np.array([1.0, 2.0, 1.0])
        pooled = pool64(model, idx, cnt)
        rows = model.E[idx].astype(np.float64)
        manual = (rows[0] + 2 * rows[1] + rows[2]) / 4.0
        assert np.allclose(pooled, manual, rtol=0, atol=1e-15)

    def test_pool_count_scale_invariant(self):
        # mean pooling: doubling every count changes nothing (exactly, for
        # power-of-two scales)
        cfg = tiny_config()
        model = random_model(cfg)
        idx, cnt = feature_arrays("arma virumque cano", cfg)
        a = pool64(model, idx, cnt)
        b = pool64(model, idx, cnt * 2.0)
        assert np.array_equal(a, b)

    def test_encode_batch_matches_loop(self):
        cfg = tiny_config()
        model = random_model(cfg)
        rng = Xoshiro256StarStar(99)
        alphabet = "abcdefgh αβγδ #"
        texts = [
            "".join(alphabet[rng.next_below(len(alphabet))]
                    for _ in range(rng.next_below(20)))
            for _ in range(100)
        ]
        batch = encode_batch(model, texts)
        assert batch.shape == (100, cfg.out_dim)
        for row, text in zip(batch, texts):
            assert row.tobytes() == encode(model, text).tobytes()

    def test_encode_batch_empty(self):
        model = random_model(tiny_config())
        out = encode_batch(model, [])
        assert out.shape == (0, 3)
        assert out.dtype == np.float32


class TestInit:
    def test_deterministic(self):
        cfg = tiny_config()
        a, b = init_student(cfg, 3), init_student(cfg, 3)
        assert a.E.tobytes() == b.E.tobytes()
        assert a.W.tobytes() == b.W.tobytes()
        assert a.b.tobytes() == b.b.tobytes()

    def test_seed_matters(self):
        cfg = tiny_config()
        a, b = init_student(cfg, 3), init_student(cfg, 4)
        assert a.E.tobytes() != b.E.tobytes()

    def test_ranges(self):
        cfg = tiny_config()
        model = init_student(cfg, 0)
        assert np.all(np.abs(model.E) < 0.05)
        limit = np.sqrt(1.0 / cfg.hidden_dim)
        assert np.all(np.abs(model.W) < limit + 1e-6)
        assert np.array_equal(model.b, np.zeros(cfg.out_dim, np.float32))

    def test_shapes_validated(self):
        cfg = tiny_config()
        with pytest.raises(ValueError, match="E has shape"):
            StudentModel(cfg, np.zeros((1, 1), np.float32),
                         np.zeros((3, 4), np.float32), np.zeros(3, np.float32))
        with pytest.raises(ValueError, match="float32"):
            StudentModel(cfg, np.zeros((cfg.buckets, 4), np.float64),
                         np.zeros((3, 4), np.float32), np.zeros(3, np.float32))

    def test_copy_is_independent(self):
        model = random_model(tiny_config())
        clone = model.copy()
        clone.W[0, 0] += 1.0
        assert model.W[0, 0] != clone.W[0, 0]


class TestCheckpointIO:
    def test_round_trip_bitwise(self, tmp_path):
        model = random_model(tiny_config(), seed=11)
        path = tmp_path / "model.smdl"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.config == model.config
        assert loaded.E.tobytes() == model.E.tobytes()
        assert loaded.W.tobytes() == model.W.tobytes()
        assert loaded.b.tobytes() == model.b.tobytes()
        save_model(loaded, tmp_path / "model2.smdl")
        assert path.read_bytes() == (tmp_path / "model2.smdl").read_bytes()

    def test_bad_magic(self, tmp_path):
        model = random_model(tiny_config())
        path = tmp_path / "model.smdl"
        save_model(model, path)
        data = bytearray(path.read_bytes())
        data[:4] = b"XXXX"
        path.write_bytes(bytes(data))
        with pytest.raises(StoreFormatError, match="bad magic"):
            load_model(path)

    def test_bad_version(self, tmp_path):
        model = random_model(tiny_config())
        path = tmp_path / "model.smdl"
        save_model(model, path)
        data = bytearray(path.read_bytes())
        data[4:8] = (9).to_bytes(4, "little")
        path.write_bytes(bytes(data))
        with pytest.raises(StoreFormatError, match="version"):
            load_model(path)

    def test_truncated(self, tmp_path):
        model = random_model(tiny_config())
        path = tmp_path / "model.smdl"
        save_model(model, path)
        data = path.read_bytes()
        for cut in (0, 6, 20, len(data) - 1):
            path.write_bytes(data[:cut])
            with pytest.raises(StoreFormatError, match="truncated"):
                load_model(path)

    def test_trailing_bytes(self, tmp_path):
        model = random_model(tiny_config())
        path = tmp_path / "model.smdl"
        save_model(model, path)
        path.write_bytes(path.read_bytes() + b"\xff")
        with pytest.raises(StoreFormatError, match="trailing"):
            load_model(path)

    def test_bad_config_rejected(self, tmp_path):
        model = random_model(tiny_config())
        path = tmp_path / "model.smdl"
        save_model(model, path)
        data = bytearray(path.read_bytes())
        # buckets field (u64 at offset 8 + 8) -> not a power of two
        data[16:24] = (100).to_bytes(8, "little")
        path.write_bytes(bytes(data))
        with pytest.raises(StoreFormatError, match="bad config"):
            load_model(path)
