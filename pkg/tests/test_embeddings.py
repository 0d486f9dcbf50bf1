import json

import numpy as np
import pytest

from overlap_eval.embeddings import (
    BackendConfig,
    EmbeddingCache,
    default_cache_path,
    embed_sentences,
    is_zero_vector,
    load_store,
    normalize,
    test_embed,
)
from overlap_eval.errors import (
    BackendUnavailableError,
    CorruptBackendError,
    EmptySummaryError,
    MissingEmbeddingError,
)
from overlap_eval.textseg import as_sentences


def _norm(v):
    return float(np.sqrt(np.dot(v, v)))


class TestNormalize:
    def test_three_four_five(self):
        assert np.allclose(normalize(np.array([3.0, 4.0])), [0.6, 0.8])

    def test_idempotent_on_unit(self):
        v = normalize(np.array([1.0, 2.0, 2.0]))
        assert abs(_norm(v) - 1.0) <= 1e-6
        assert np.array_equal(normalize(v), v / _norm(v))

    def test_zero_stays_zero(self):
        v = normalize(np.zeros(5))
        assert is_zero_vector(v)


class TestTestEmbed:
    def test_deterministic(self):
        a = test_embed(9, 16, "the cat sat")
        b = test_embed(9, 16, "the cat sat")
        assert np.array_equal(a, b)

    def test_order_free(self):
        assert np.array_equal(test_embed(9, 16, "a b"), test_embed(9, 16, "b a"))

    def test_multiset_permutations_identical(self):
        a = test_embed(5, 32, "alpha beta gamma delta")
        b = test_embed(5, 32, "delta gamma beta alpha")
        assert np.array_equal(a, b)

    def test_empty_tokens_flagged_zero(self):
        assert is_zero_vector(test_embed(9, 16, "..."))

    def test_unit_norm(self):
        v = test_embed(9, 64, "some words here")
        assert abs(_norm(v) - 1.0) <= 1e-6

    def test_seed_changes_vector(self):
        assert not np.array_equal(test_embed(1, 16, "word"), test_embed(2, 16, "word"))

    def test_disjoint_tokens_near_orthogonal(self):
        worst = 0.0
        for i in range(1000):
            a = test_embed(7, 512, f"tok{2 * i}")
            b = test_embed(7, 512, f"tok{2 * i + 1}")
            worst = max(worst, abs(float(np.dot(a, b))))
        assert worst < 0.2

    def test_dim_too_small(self):
        with pytest.raises(ValueError):
            test_embed(0, 4, "word")


class TestEmbedSentences:
    def test_same_sentence_twice(self):
        config = BackendConfig(kind="test", seed=3, dim=16)
        batch = embed_sentences(config, as_sentences(["One.", "One."]))
        assert np.array_equal(batch.vectors[0], batch.vectors[1])

    def test_self_cosine_one(self):
        config = BackendConfig(kind="test", seed=3, dim=32)
        batch = embed_sentences(config, as_sentences(["the cat sat", "dogs bark"]))
        for row in batch.vectors:
            assert abs(float(np.dot(row, row)) - 1.0) <= 1e-6

    def test_empty_list_rejected(self):
        config = BackendConfig(kind="test", seed=3, dim=16)
        with pytest.raises(EmptySummaryError):
            embed_sentences(config, [])

    def test_repeat_calls_bit_identical(self):
        config = BackendConfig(kind="test", seed=3, dim=16)
        sentences = as_sentences(["a b c", "d e"])
        first = embed_sentences(config, sentences)
        second = embed_sentences(config, sentences)
        assert np.array_equal(first.vectors, second.vectors)


class TestPrecomputedBackend:
    def test_exact_lookup(self, tmp_path):
        store = tmp_path / "store.jsonl"
        vec = [0.6, 0.8]
        store.write_text(
            json.dumps({"model": "m", "text": "A.", "dim": 2, "vector": vec}) + "\n"
        )
        config = BackendConfig(kind="precomputed", model_id="m", store_path=str(store))
        batch = embed_sentences(config, as_sentences(["A."]))
        assert batch.vectors[0].tolist() == vec

    def test_missing_raises(self, tmp_path):
        store = tmp_path / "store.jsonl"
        store.write_text(
            json.dumps({"model": "m", "text": "A.", "dim": 2, "vector": [1.0, 0.0]})
            + "\n"
        )
        config = BackendConfig(kind="precomputed", model_id="m", store_path=str(store))
        with pytest.raises(MissingEmbeddingError):
            embed_sentences(config, as_sentences(["B."]))

    def test_last_duplicate_wins(self, tmp_path):
        store = tmp_path / "store.jsonl"
        lines = [
            {"model": "m", "text": "A.", "dim": 2, "vector": [1.0, 0.0]},
            {"model": "m", "text": "A.", "dim": 2, "vector": [0.0, 1.0]},
        ]
        store.write_text("".join(json.dumps(l) + "\n" for l in lines))
        assert load_store(store)[("m", "A.")].tolist() == [0.0, 1.0]

    def test_mixed_dims_rejected(self, tmp_path):
        store = tmp_path / "store.jsonl"
        lines = [
            {"model": "m", "text": "A.", "dim": 2, "vector": [1.0, 0.0]},
            {"model": "m", "text": "B.", "dim": 3, "vector": [1.0, 0.0, 0.0]},
        ]
        store.write_text("".join(json.dumps(l) + "\n" for l in lines))
        config = BackendConfig(kind="precomputed", model_id="m", store_path=str(store))
        with pytest.raises(CorruptBackendError):
            embed_sentences(config, as_sentences(["A.", "B."]))

    def test_non_unit_vector_rejected(self, tmp_path):
        store = tmp_path / "store.jsonl"
        store.write_text(
            json.dumps({"model": "m", "text": "A.", "dim": 2, "vector": [3.0, 4.0]})
            + "\n"
        )
        config = BackendConfig(kind="precomputed", model_id="m", store_path=str(store))
        with pytest.raises(CorruptBackendError):
            embed_sentences(config, as_sentences(["A."]))


class TestCache:
    def test_round_trip_identical(self, tmp_path):
        cache_file = tmp_path / "cache.jsonl"
        config = BackendConfig(kind="test", seed=11, dim=24)
        sentences = as_sentences(["first sentence here", "second one there"])

        first = embed_sentences(config, sentences, EmbeddingCache(cache_file))
        # fresh cache object simulates a new process reading from disk
        reloaded = EmbeddingCache(cache_file)
        second = embed_sentences(config, sentences, reloaded)
        assert np.array_equal(first.vectors, second.vectors)

    def test_cache_vs_no_cache_identical(self, tmp_path):
        config = BackendConfig(kind="test", seed=11, dim=24)
        sentences = as_sentences(["first sentence here"])
        cached = embed_sentences(config, sentences, EmbeddingCache(tmp_path / "c.jsonl"))
        plain = embed_sentences(config, sentences)
        assert np.array_equal(cached.vectors, plain.vectors)

    def test_cache_file_format(self, tmp_path):
        cache_file = tmp_path / "cache.jsonl"
        config = BackendConfig(kind="test", seed=11, dim=24)
        embed_sentences(config, as_sentences(["hello world"]), EmbeddingCache(cache_file))
        record = json.loads(cache_file.read_text().splitlines()[0])
        assert set(record) == {"model", "text", "dim", "vector"}
        assert record["model"] == config.backend_id
        assert record["dim"] == 24

    def test_env_var_overrides_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("OVERLAP_EVAL_CACHE_DIR", str(tmp_path / "xdg"))
        assert default_cache_path() == tmp_path / "xdg" / "embeddings.jsonl"


class TestRemoteFailure:
    def test_unreachable_endpoint_raises_after_retries(self):
        config = BackendConfig(
            kind="remote", model_id="p-v1", endpoint="http://127.0.0.1:9"
        )
        with pytest.raises(BackendUnavailableError):
            embed_sentences(config, as_sentences(["hello"]))


class TestBackendConfig:
    def test_remote_requires_endpoint(self):
        with pytest.raises(ValueError):
            BackendConfig(kind="remote", model_id="p-v1")

    def test_precomputed_requires_store(self):
        with pytest.raises(ValueError):
            BackendConfig(kind="precomputed", model_id="m")

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            BackendConfig(kind="magic")

    def test_backend_ids_distinguish_seeds(self):
        a = BackendConfig(kind="test", seed=1, dim=16)
        b = BackendConfig(kind="test", seed=2, dim=16)
        assert a.backend_id != b.backend_id
