"""Embedding-based precision/recall scoring of overlap summaries.

The score for a (generated, reference) summary pair is built from the
matrix of sentence-pair cosine similarities: precision is the mean of the
row-wise maxima (best reference match per generated sentence), recall the
mean of the column-wise maxima, and F1 their harmonic mean. Negative
cosines are clamped to 0 so every score stays in [0, 1].

With multiple references, precision is taken against the sentence-list
concatenation of all references, while recall is computed per reference
and averaged. References that are byte-identical as sentence lists are
collapsed first, so replicating a reference never changes the score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .embeddings import BackendConfig, EmbeddingBatch, EmbeddingCache, embed_sentences
from .errors import (
    DimMismatchError,
    EmptyInputError,
    EmptySummaryError,
    MissingSystemOutputError,
)
from .textseg import Sentence


@dataclass(frozen=True)
class SemScore:
    """Precision / recall / F1 triple in [0, 1].

    ``diagnostics`` carries non-fatal per-sample notes (e.g. an empty
    summary scored as zero); it does not affect equality of the numbers.
    """

    precision: float
    recall: float
    f1: float
    diagnostics: tuple[str, ...] = ()

    @classmethod
    def from_pr(cls, precision: float, recall: float, diagnostics: tuple[str, ...] = ()) -> "SemScore":
        total = precision + recall
        f1 = 2.0 * precision * recall / total if total > 0.0 else 0.0
        return cls(precision, recall, f1, diagnostics)



def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of two vectors in [-1, 1]; flagged zero vectors score 0."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimMismatchError(f"vector dims differ: {a.shape} vs {b.shape}")
    na = float(np.dot(a, a)) ** 0.5
    nb = float(np.dot(b, b)) ** 0.5
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(min(1.0, max(-1.0, float(np.dot(a, b)) / (na * nb))))


def similarity_matrix(gen: EmbeddingBatch, ref: EmbeddingBatch) -> np.ndarray:
    """Generated x reference cosine matrix, entries clamped into [0, 1]."""
    if len(gen.sentences) == 0 or len(ref.sentences) == 0:
        raise EmptySummaryError("similarity matrix requires non-empty batches")
    if gen.dim != ref.dim:
        raise DimMismatchError(f"batch dims differ: {gen.dim} vs {ref.dim}")
    # Vectors are unit-norm (or flagged zero) at the embedding boundary,
    # so the dot product is the cosine and zero rows/columns score 0.
    return np.clip(gen.vectors @ ref.vectors.T, 0.0, 1.0)


def _check_matrix(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise ValueError("similarity matrix must be 2-D and non-empty")
    if np.any(matrix < 0.0) or np.any(matrix > 1.0):
        raise ValueError("similarity matrix entries must lie in [0, 1]")
    return matrix


def precision_values(matrix: np.ndarray) -> np.ndarray:
    """Row-wise maxima: best reference match per generated sentence."""
    return _check_matrix(matrix).max(axis=1)


def recall_values(matrix: np.ndarray) -> np.ndarray:
    """Column-wise maxima: best generated match per reference sentence."""
    return _check_matrix(matrix).max(axis=0)


def score_matrix(matrix: np.ndarray) -> SemScore:
    """SemScore of one similarity matrix (single-reference case)."""
    precision = float(np.mean(precision_values(matrix)))
    recall = float(np.mean(recall_values(matrix)))
    return SemScore.from_pr(precision, recall)


def _dedup_references(
    references: Sequence[Sequence[Sentence]],
) -> tuple[list[Sequence[Sentence]], list[str]]:
    """Drop empty references and exact duplicates (by sentence texts)."""
    diagnostics = []
    kept: list[Sequence[Sentence]] = []
    seen: set[tuple[str, ...]] = set()
    for k, ref in enumerate(references):
        if not ref:
            diagnostics.append(f"EmptySummary: reference {k} has no sentences")
            continue
        key = tuple(s.text for s in ref)
        if key in seen:
            continue
        seen.add(key)
        kept.append(ref)
    return kept, diagnostics


def sem_f1_multi(
    gen_summary: Sequence[Sentence],
    references: Sequence[Sequence[Sentence]],
    config: BackendConfig,
    cache: EmbeddingCache | None = None,
) -> SemScore:
    """Score a generated summary against one or more references.

    Empty inputs are diagnosed and scored (0, 0, 0) rather than raised, so
    one bad sample never aborts a dataset run.
    """
    refs, diagnostics = _dedup_references(references)
    if not gen_summary:
        diagnostics.append("EmptySummary: generated summary has no sentences")
    if not refs:
        diagnostics.append("EmptySummary: no non-empty reference")
    if not gen_summary or not refs:
        return SemScore(0.0, 0.0, 0.0, tuple(diagnostics))

    gen_batch = embed_sentences(config, list(gen_summary), cache)
    matrices = [
        similarity_matrix(gen_batch, embed_sentences(config, list(ref), cache))
        for ref in refs
    ]
    combined = np.hstack(matrices)
    precision = float(np.mean(precision_values(combined)))
    per_ref_recall = [float(np.mean(recall_values(m))) for m in matrices]
    # fsum keeps the mean exact, so reference order/replication cannot
    # perturb the last ulp
    recall = math.fsum(per_ref_recall) / len(per_ref_recall)
    return SemScore.from_pr(precision, recall, tuple(diagnostics))


def sem_f1_single(
    gen_summary: Sequence[Sentence],
    ref_summary: Sequence[Sentence],
    config: BackendConfig,
    cache: EmbeddingCache | None = None,
) -> SemScore:
    """Score a generated summary against a single reference."""
    return sem_f1_multi(gen_summary, [ref_summary], config, cache)


@dataclass
class SampleScore:
    sample_id: str
    score: SemScore


def score_samples(
    samples: Sequence,
    system: str,
    config: BackendConfig,
    cache: EmbeddingCache | None = None,
    jobs: int = 1,
    splitter=None,
) -> list[SampleScore]:
    """Per-sample sem_f1_multi over a dataset, ordered by sample id.

    ``samples`` are corpus EvalSample records; every sample must carry an
    output for ``system``. Work items run on a bounded thread pool when
    jobs > 1; assembly is single-threaded and sorted for determinism.
    """
    from concurrent.futures import ThreadPoolExecutor

    def score_one(sample) -> SampleScore:
        if system not in sample.system_outputs:
            raise MissingSystemOutputError(
                f"sample {sample.id!r} has no output for system {system!r}"
            )
        gen = sample.system_sentences(system, splitter)
        refs = [
            sample.reference_sentences(k, splitter)
            for k in range(len(sample.references))
        ]
        return SampleScore(sample.id, sem_f1_multi(gen, refs, config, cache))

    if jobs <= 1:
        results = [score_one(sample) for sample in samples]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(score_one, samples))
    return sorted(results, key=lambda r: r.sample_id)


def dataset_sem_f1(
    samples: Sequence,
    system: str,
    config: BackendConfig,
    cache: EmbeddingCache | None = None,
    jobs: int = 1,
    splitter=None,
) -> SemScore:
    """Macro average over samples: mean precision, recall and f1.

    f1 is the mean of per-sample f1 values, not recomputed from the
    averaged precision/recall.
    """
    results = score_samples(samples, system, config, cache, jobs, splitter)
    if not results:
        raise EmptyInputError("no scorable samples")
    precision = float(np.mean([r.score.precision for r in results]))
    recall = float(np.mean([r.score.recall for r in results]))
    f1 = float(np.mean([r.score.f1 for r in results]))
    diagnostics = tuple(
        f"{r.sample_id}: {note}" for r in results for note in r.score.diagnostics
    )
    return SemScore(precision, recall, f1, diagnostics)
