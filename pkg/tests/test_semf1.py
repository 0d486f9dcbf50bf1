import json
import math

import numpy as np
import pytest

from overlap_eval.embeddings import BackendConfig
from overlap_eval.errors import DimMismatchError, EmptyInputError
from overlap_eval.rng import Rng
from overlap_eval.semf1 import (
    cosine_similarity,
    precision_values,
    recall_values,
    score_matrix,
    sem_f1_multi,
    sem_f1_single,
    similarity_matrix,
)
from overlap_eval import embeddings, semf1
from overlap_eval.textseg import as_sentences

TEST_CFG = BackendConfig(kind="test", seed=17, dim=64)


def _store_config(tmp_path, entries):
    """Precomputed backend over hand-built unit vectors."""
    path = tmp_path / "store.jsonl"
    with open(path, "w") as handle:
        for text, vector in entries.items():
            handle.write(
                json.dumps(
                    {"model": "hand", "text": text, "dim": len(vector), "vector": vector}
                )
                + "\n"
            )
    return BackendConfig(kind="precomputed", model_id="hand", store_path=str(path))


class TestCosine:
    def test_self_unit(self):
        v = np.array([0.6, 0.8])
        assert cosine_similarity(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert cosine_similarity(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_antipodal(self):
        assert cosine_similarity(np.array([1.0, 0.0]), np.array([-1.0, 0.0])) == -1.0

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatchError):
            cosine_similarity(np.ones(2), np.ones(3))

    def test_zero_vector_scores_zero(self):
        assert cosine_similarity(np.zeros(3), np.ones(3)) == 0.0

    def test_symmetric(self):
        rng = Rng(5)
        for _ in range(50):
            a = np.array([rng.gauss() for _ in range(8)])
            b = np.array([rng.gauss() for _ in range(8)])
            assert cosine_similarity(a, b) == cosine_similarity(b, a)


class TestSimilarityMatrix:
    def test_identical_one_by_one(self):
        batch = embeddings.embed_sentences(TEST_CFG, as_sentences(["the cat sat"]))
        matrix = similarity_matrix(batch, batch)
        assert matrix.shape == (1, 1)
        assert matrix[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_antipodal_clamped(self, tmp_path):
        config = _store_config(
            tmp_path, {"up": [1.0, 0.0], "down": [-1.0, 0.0]}
        )
        gen = embeddings.embed_sentences(config, as_sentences(["up"]))
        ref = embeddings.embed_sentences(config, as_sentences(["down"]))
        assert similarity_matrix(gen, ref)[0, 0] == 0.0

    def test_hand_built_two_by_two(self, tmp_path):
        config = _hand_2x2_config(tmp_path)
        gen = embeddings.embed_sentences(config, as_sentences(["g1", "g2"]))
        ref = embeddings.embed_sentences(config, as_sentences(["r1", "r2"]))
        matrix = similarity_matrix(gen, ref)
        expected = np.array([[0.9, 0.2], [0.1, 0.8]])
        assert np.allclose(matrix, expected, atol=1e-12)

    def test_dim_mismatch(self, tmp_path):
        a = embeddings.embed_sentences(TEST_CFG, as_sentences(["x"]))
        config = _store_config(tmp_path, {"y": [1.0, 0.0]})
        b = embeddings.embed_sentences(config, as_sentences(["y"]))
        with pytest.raises(DimMismatchError):
            similarity_matrix(a, b)


def _hand_2x2_config(tmp_path):
    """Unit vectors giving cosines [[0.9, 0.2], [0.1, 0.8]] by construction."""
    r1 = [0.9, 0.1, math.sqrt(1.0 - 0.81 - 0.01), 0.0]
    r2 = [0.2, 0.8, 0.0, math.sqrt(1.0 - 0.04 - 0.64)]
    return _store_config(
        tmp_path,
        {
            "g1": [1.0, 0.0, 0.0, 0.0],
            "g2": [0.0, 1.0, 0.0, 0.0],
            "r1": r1,
            "r2": r2,
        },
    )


class TestRowColumnMaxima:
    def test_single_entry(self):
        assert precision_values([[1.0]]).tolist() == [1.0]
        assert recall_values([[1.0]]).tolist() == [1.0]

    def test_hand_case(self):
        matrix = [[0.9, 0.2], [0.1, 0.8]]
        assert precision_values(matrix).tolist() == [0.9, 0.8]
        assert recall_values(matrix).tolist() == [0.9, 0.8]

    def test_all_zero(self):
        assert precision_values(np.zeros((2, 3))).tolist() == [0.0, 0.0]

    def test_single_row_recall(self):
        assert recall_values([[0.1, 0.5, 0.3]]).tolist() == [0.1, 0.5, 0.3]

    def test_brute_force_oracle(self):
        rng = Rng(99)
        for _ in range(300):
            rows = rng.randrange(5) + 1
            cols = rng.randrange(5) + 1
            matrix = np.array(
                [[rng.random() for _ in range(cols)] for _ in range(rows)]
            )
            expected_p = [max(matrix[i, j] for j in range(cols)) for i in range(rows)]
            expected_r = [max(matrix[i, j] for i in range(rows)) for j in range(cols)]
            assert precision_values(matrix).tolist() == expected_p
            assert recall_values(matrix).tolist() == expected_r

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            precision_values([[1.5]])


class TestScoreMatrix:
    def test_hand_case(self):
        score = score_matrix([[0.9, 0.2], [0.1, 0.8]])
        assert score.precision == pytest.approx(0.85, abs=1e-12)
        assert score.recall == pytest.approx(0.85, abs=1e-12)
        assert score.f1 == pytest.approx(0.85, abs=1e-12)

    def test_zero_matrix_f1_defined(self):
        score = score_matrix(np.zeros((2, 2)))
        assert (score.precision, score.recall, score.f1) == (0.0, 0.0, 0.0)

    def test_f1_between_p_and_r(self):
        rng = Rng(7)
        for _ in range(200):
            matrix = np.array(
                [[rng.random() for _ in range(3)] for _ in range(2)]
            )
            score = score_matrix(matrix)
            assert min(score.precision, score.recall) - 1e-12 <= score.f1
            assert score.f1 <= max(score.precision, score.recall) + 1e-12


class TestSemF1Single:
    def test_identical_one_sentence(self):
        sentences = as_sentences(["the cat sat on the mat"])
        score = sem_f1_single(sentences, sentences, TEST_CFG)
        assert score.precision == pytest.approx(1.0, abs=1e-12)
        assert score.f1 == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_pair_zero(self, tmp_path):
        config = _store_config(tmp_path, {"g": [1.0, 0.0], "r": [0.0, 1.0]})
        score = sem_f1_single(as_sentences(["g"]), as_sentences(["r"]), config)
        assert (score.precision, score.recall, score.f1) == (0.0, 0.0, 0.0)

    def test_hand_2x2_full_path(self, tmp_path):
        config = _hand_2x2_config(tmp_path)
        score = sem_f1_single(
            as_sentences(["g1", "g2"]), as_sentences(["r1", "r2"]), config
        )
        assert score.precision == pytest.approx(0.85, abs=1e-12)
        assert score.recall == pytest.approx(0.85, abs=1e-12)
        assert score.f1 == pytest.approx(0.85, abs=1e-12)

    def test_empty_side_diagnosed_not_raised(self):
        score = sem_f1_single([], as_sentences(["r"]), TEST_CFG)
        assert (score.precision, score.recall, score.f1) == (0.0, 0.0, 0.0)
        assert any("EmptySummary" in d for d in score.diagnostics)

    def test_swap_symmetry(self):
        a = as_sentences(["the cat sat", "the dog barked loudly"])
        b = as_sentences(["stock markets fell sharply"])
        ab = sem_f1_single(a, b, TEST_CFG)
        ba = sem_f1_single(b, a, TEST_CFG)
        assert ab.precision == ba.recall
        assert ab.recall == ba.precision
        assert ab.f1 == ba.f1

    def test_sentence_order_invariance(self):
        gen = ["first point here", "second point there", "third point everywhere"]
        ref = ["some reference text", "another reference line"]
        base = sem_f1_single(as_sentences(gen), as_sentences(ref), TEST_CFG)
        shuffled = sem_f1_single(
            as_sentences(gen[::-1]), as_sentences(ref[::-1]), TEST_CFG
        )
        assert base.precision == shuffled.precision
        assert base.recall == shuffled.recall


class TestSemF1Multi:
    def test_one_reference_equals_single(self):
        gen = as_sentences(["the cat sat", "a dog barked"])
        ref = as_sentences(["the cat sat quietly"])
        single = sem_f1_single(gen, ref, TEST_CFG)
        multi = sem_f1_multi(gen, [ref], TEST_CFG)
        assert single == multi

    def test_duplicate_reference_no_change(self):
        gen = as_sentences(["the cat sat"])
        ref = as_sentences(["a cat sat down"])
        once = sem_f1_multi(gen, [ref], TEST_CFG)
        twice = sem_f1_multi(gen, [ref, ref], TEST_CFG)
        assert once == twice

    def test_identical_plus_orthogonal_reference(self, tmp_path):
        config = _store_config(
            tmp_path, {"g": [1.0, 0.0], "same": [1.0, 0.0], "other": [0.0, 1.0]}
        )
        score = sem_f1_multi(
            as_sentences(["g"]),
            [as_sentences(["same"]), as_sentences(["other"])],
            config,
        )
        assert score.precision == pytest.approx(1.0, abs=1e-12)
        assert score.recall == pytest.approx(0.5, abs=1e-12)
        assert score.f1 == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_all_references_empty(self):
        score = sem_f1_multi(as_sentences(["g"]), [[], []], TEST_CFG)
        assert (score.precision, score.recall, score.f1) == (0.0, 0.0, 0.0)
        assert score.diagnostics

    def test_empty_reference_skipped_with_diagnostic(self):
        gen = as_sentences(["the cat sat"])
        ref = as_sentences(["the cat sat"])
        score = sem_f1_multi(gen, [ref, []], TEST_CFG)
        assert score.f1 == pytest.approx(1.0, abs=1e-12)
        assert any("reference 1" in d for d in score.diagnostics)

    def test_monotone_recall_when_appending_gen_sentence(self):
        # appending a reference sentence identical to a generated one
        # never decreases that reference's recall contribution
        rng = Rng(21)
        vocab = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta"]
        for _ in range(100):
            gen_texts = [
                " ".join(vocab[rng.randrange(len(vocab))] for _ in range(3))
                for _ in range(2)
            ]
            ref_texts = [
                " ".join(vocab[rng.randrange(len(vocab))] for _ in range(3))
            ]
            gen = as_sentences(gen_texts)
            base = sem_f1_multi(gen, [as_sentences(ref_texts)], TEST_CFG)
            extended = sem_f1_multi(
                gen, [as_sentences(ref_texts + [gen_texts[0]])], TEST_CFG
            )
            assert extended.recall >= base.recall - 1e-12

    def test_range(self):
        rng = Rng(33)
        vocab = ["w%d" % i for i in range(20)]
        for _ in range(50):
            gen = as_sentences(
                [" ".join(vocab[rng.randrange(20)] for _ in range(4))]
            )
            refs = [
                as_sentences([" ".join(vocab[rng.randrange(20)] for _ in range(4))])
                for _ in range(2)
            ]
            score = sem_f1_multi(gen, refs, TEST_CFG)
            for value in (score.precision, score.recall, score.f1):
                assert 0.0 <= value <= 1.0


def _sample(sample_id, gen, refs):
    from overlap_eval.corpus import EvalSample, NarrativePair

    pair = NarrativePair(
        id=sample_id,
        theme="t",
        theme_description=refs[0],
        left_head="lh",
        left_context="left.",
        right_head="rh",
        right_context="right.",
    )
    return EvalSample(pair=pair, references=refs, system_outputs={"sys": gen})


class TestDatasetSemF1:
    def test_requires_samples(self):
        with pytest.raises(EmptyInputError):
            semf1.dataset_sem_f1([], "sys", TEST_CFG)

    def test_single_sample_equals_its_score(self):
        sample = _sample("s1", "the cat sat here.", ["the cat sat down."])
        aggregate = semf1.dataset_sem_f1([sample], "sys", TEST_CFG)
        direct = sem_f1_multi(
            sample.system_sentences("sys"),
            [sample.reference_sentences(0)],
            TEST_CFG,
        )
        assert (aggregate.precision, aggregate.recall, aggregate.f1) == (
            direct.precision,
            direct.recall,
            direct.f1,
        )

    def test_f1_is_mean_of_sample_f1(self):
        perfect = _sample("s1", "alpha beta gamma.", ["alpha beta gamma."])
        # asymmetric p/r so mean-of-f1 and f1-of-means clearly differ
        lopsided = _sample(
            "s2", "alpha beta gamma. Omega psi chi.", ["alpha beta gamma."]
        )
        aggregate = semf1.dataset_sem_f1([perfect, lopsided], "sys", TEST_CFG)
        scores = [
            sem_f1_multi(
                s.system_sentences("sys"), [s.reference_sentences(0)], TEST_CFG
            )
            for s in (perfect, lopsided)
        ]
        expected_f1 = (scores[0].f1 + scores[1].f1) / 2
        assert aggregate.f1 == pytest.approx(expected_f1, abs=1e-15)
        # f1 is averaged, not recomputed from averaged p and r
        recomputed = (
            2 * aggregate.precision * aggregate.recall
            / (aggregate.precision + aggregate.recall)
        )
        assert abs(aggregate.f1 - recomputed) > 1e-4

    def test_mean_of_one_and_zero(self):
        perfect = _sample("s1", "alpha beta gamma.", ["alpha beta gamma."])
        empty = _sample("s2", "", ["delta epsilon zeta."])
        aggregate = semf1.dataset_sem_f1([perfect, empty], "sys", TEST_CFG)
        assert aggregate.f1 == pytest.approx(0.5, abs=1e-12)
        assert any("s2" in note for note in aggregate.diagnostics)

    def test_missing_system_output_raises(self):
        from overlap_eval.errors import MissingSystemOutputError

        sample = _sample("s1", "text here.", ["ref text."])
        with pytest.raises(MissingSystemOutputError):
            semf1.dataset_sem_f1([sample], "other", TEST_CFG)

    def test_parallel_jobs_match_serial(self):
        samples = [
            _sample(f"s{i}", f"alpha{i} beta{i} gamma.", [f"alpha{i} beta{i} delta."])
            for i in range(8)
        ]
        serial = semf1.dataset_sem_f1(samples, "sys", TEST_CFG, jobs=1)
        parallel = semf1.dataset_sem_f1(samples, "sys", TEST_CFG, jobs=4)
        assert (serial.precision, serial.recall, serial.f1) == (
            parallel.precision,
            parallel.recall,
            parallel.f1,
        )
