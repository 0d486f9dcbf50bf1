"""Dataset-level experiment pipelines behind the CLI commands.

Each function here consumes corpus samples plus a backend config and
returns plain data structures that the report writers serialize. Keeping
these free of I/O makes every command reproducible and testable without
the CLI.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .corpus import (
    EvalSample,
    random_annotation_baseline,
    random_overlap_baseline,
    with_reference_override,
    with_system_override,
)
from .embeddings import BackendConfig, EmbeddingCache, embed_sentences
from .errors import AlignmentError, EmptyInputError
from .labeling import (
    PRECISION_SIDE,
    RECALL_SIDE,
    AnnotationRecord,
    LabelSequence,
    ThresholdPair,
    dataset_reward,
    sample_reward,
    threshold_labels,
)
from .rouge import VARIANTS, RougeScore, rouge_multi
from .semf1 import (
    SampleScore,
    SemScore,
    dataset_sem_f1,
    precision_values,
    recall_values,
    score_samples,
    sem_f1_single,
    similarity_matrix,
)
from .stats import AnnotatorMatrix, flatten_labels, kendall_tau_b, pairwise_annotator_matrix
from .textseg import SentenceSplitter, tokenize


# ---------------------------------------------------------------------------
# SEM-F1 scoring


@dataclass
class ScoreRun:
    system: str
    model: str
    aggregate: SemScore
    per_sample: list[SampleScore]

    @property
    def has_diagnostics(self) -> bool:
        return any(r.score.diagnostics for r in self.per_sample)


def run_semf1(
    samples: Sequence[EvalSample],
    systems: Sequence[str],
    config: BackendConfig,
    cache: EmbeddingCache | None = None,
    jobs: int = 1,
    splitter: SentenceSplitter | None = None,
) -> list[ScoreRun]:
    runs = []
    for system in systems:
        per_sample = score_samples(samples, system, config, cache, jobs, splitter)
        if not per_sample:
            raise EmptyInputError("no scorable samples")
        aggregate = SemScore(
            float(np.mean([r.score.precision for r in per_sample])),
            float(np.mean([r.score.recall for r in per_sample])),
            float(np.mean([r.score.f1 for r in per_sample])),
        )
        runs.append(ScoreRun(system, config.model_id, aggregate, per_sample))
    return runs


# ---------------------------------------------------------------------------
# ROUGE scoring


@dataclass
class RougeRun:
    system: str
    aggregate: dict[str, RougeScore]
    per_sample: dict[str, list[tuple[str, RougeScore]]]


def run_rouge(
    samples: Sequence[EvalSample], systems: Sequence[str]
) -> list[RougeRun]:
    """Per-sample best-F1 across references, then unweighted means."""
    runs = []
    for system in systems:
        per_sample: dict[str, list[tuple[str, RougeScore]]] = {v: [] for v in VARIANTS}
        for sample in sorted(samples, key=lambda s: s.id):
            candidate = tokenize(sample.system_outputs[system])
            references = [tokenize(ref) for ref in sample.references]
            if not references:
                raise EmptyInputError(f"sample {sample.id!r} has no references")
            for variant in VARIANTS:
                score = rouge_multi(candidate, references, variant)
                per_sample[variant].append((sample.id, score))
        aggregate = {}
        for variant in VARIANTS:
            scores = [score for _, score in per_sample[variant]]
            aggregate[variant] = RougeScore(
                float(np.mean([s.precision for s in scores])),
                float(np.mean([s.recall for s in scores])),
                float(np.mean([s.f1 for s in scores])),
                variant,
            )
        runs.append(RougeRun(system, aggregate, per_sample))
    return runs


# ---------------------------------------------------------------------------
# Label sources and agreement


LabelKey = tuple[str, str, int | None]  # (sample_id, side, reference_index)
LabelSource = dict[LabelKey, LabelSequence]


def human_label_sources(records: Sequence[AnnotationRecord]) -> dict[str, LabelSource]:
    """Group annotation records into per-annotator label sources."""
    sources: dict[str, LabelSource] = {}
    for record in records:
        key = (record.sample_id, record.side, record.reference_index)
        source = sources.setdefault(record.annotator, {})
        if key in source:
            raise AlignmentError(
                f"annotator {record.annotator!r} labels sample "
                f"{record.sample_id!r} twice for {key[1]}/{key[2]}"
            )
        source[key] = record.sequence()
    return sources


def machine_raw_scores(
    sample: EvalSample,
    system: str,
    config: BackendConfig,
    cache: EmbeddingCache | None = None,
    splitter: SentenceSplitter | None = None,
) -> tuple[list[float], dict[int, list[float]]]:
    """Raw similarity scores per sentence, before thresholding.

    Precision-side scores are row maxima of the generated sentences
    against the concatenation of all references; recall-side scores are
    column maxima per reference.
    """
    gen = sample.system_sentences(system, splitter)
    refs = [
        sample.reference_sentences(k, splitter) for k in range(len(sample.references))
    ]
    if not gen or not any(refs):
        return [], {}
    gen_batch = embed_sentences(config, gen, cache)
    matrices = {}
    for k, ref in enumerate(refs):
        if not ref:
            continue
        matrices[k] = similarity_matrix(
            gen_batch, embed_sentences(config, ref, cache)
        )
    combined = np.hstack([matrices[k] for k in sorted(matrices)])
    precision_scores = [float(v) for v in precision_values(combined)]
    recall_scores = {
        k: [float(v) for v in recall_values(matrix)] for k, matrix in matrices.items()
    }
    return precision_scores, recall_scores


def machine_label_source(
    samples: Sequence[EvalSample],
    system: str,
    thresholds: ThresholdPair,
    config: BackendConfig,
    cache: EmbeddingCache | None = None,
    splitter: SentenceSplitter | None = None,
    sample_ids: set[str] | None = None,
) -> LabelSource:
    """Labels inferred from raw similarity scores at one threshold band."""
    source: LabelSource = {}
    for sample in samples:
        if sample_ids is not None and sample.id not in sample_ids:
            continue
        precision_scores, recall_scores = machine_raw_scores(
            sample, system, config, cache, splitter
        )
        if precision_scores:
            source[(sample.id, PRECISION_SIDE, None)] = threshold_labels(
                precision_scores, thresholds, PRECISION_SIDE
            )
        for k in sorted(recall_scores):
            source[(sample.id, RECALL_SIDE, k)] = threshold_labels(
                recall_scores[k], thresholds, RECALL_SIDE
            )
    return source


@dataclass
class SideAgreement:
    reward_mean: float
    reward_std: float
    tau: float
    tau_p: float
    n_samples: int
    n_labels: int


@dataclass
class PairAgreement:
    source_a: str
    source_b: str
    threshold: str
    precision: SideAgreement | None
    recall: SideAgreement | None


def _side_agreement(
    a: LabelSource, b: LabelSource, side: str
) -> SideAgreement | None:
    """Reward and Kendall agreement of two sources on one side."""
    ids_a = {key[0] for key in a if key[1] == side}
    ids_b = {key[0] for key in b if key[1] == side}
    common = sorted(ids_a & ids_b)
    if not common:
        return None

    per_sample_rewards = []
    flat_a: list[LabelSequence] = []
    flat_b: list[LabelSequence] = []
    misaligned = []
    for sample_id in common:
        keys_a = sorted(
            (key for key in a if key[0] == sample_id and key[1] == side),
            key=lambda key: (key[2] is not None, key[2]),
        )
        keys_b = sorted(
            (key for key in b if key[0] == sample_id and key[1] == side),
            key=lambda key: (key[2] is not None, key[2]),
        )
        if keys_a != keys_b or any(len(a[k]) != len(b[k]) for k in keys_a):
            misaligned.append(sample_id)
            continue
        labels_a = tuple(l for k in keys_a for l in a[k].labels)
        labels_b = tuple(l for k in keys_b for l in b[k].labels)
        per_sample_rewards.append(
            sample_reward(LabelSequence(labels_a, side), LabelSequence(labels_b, side))
        )
        flat_a.extend(a[k] for k in keys_a)
        flat_b.extend(b[k] for k in keys_b)
    if misaligned:
        raise AlignmentError(
            f"misaligned {side} labels for samples: {', '.join(misaligned)}",
            ids=misaligned,
        )

    reward_mean, reward_std = dataset_reward(per_sample_rewards)
    values_a = flatten_labels(flat_a)
    values_b = flatten_labels(flat_b)
    try:
        tau = kendall_tau_b(values_a, values_b)
        tau_value, tau_p = tau.coefficient, tau.p_value
    except Exception:
        # constant labels on one side: tau undefined, reward still holds
        tau_value, tau_p = float("nan"), float("nan")
    return SideAgreement(
        reward_mean, reward_std, tau_value, tau_p, len(common), len(values_a)
    )


def run_agreement(
    sources_by_threshold: Mapping[str, Mapping[str, LabelSource]],
) -> list[PairAgreement]:
    """Agreement for every unordered source pair at every threshold.

    ``sources_by_threshold[threshold][source_name]`` holds the labels of
    one source at that threshold; sources that do not depend on the
    threshold (human annotators) appear unchanged under every key.
    """
    results = []
    for threshold in sources_by_threshold:
        sources = sources_by_threshold[threshold]
        names = sorted(sources)
        for i, name_b in enumerate(names):
            for name_a in names[:i]:
                results.append(
                    PairAgreement(
                        name_a,
                        name_b,
                        threshold,
                        _side_agreement(sources[name_a], sources[name_b], PRECISION_SIDE),
                        _side_agreement(sources[name_a], sources[name_b], RECALL_SIDE),
                    )
                )
    return results


# ---------------------------------------------------------------------------
# Per-reference correlation


def reference_score_table(
    samples: Sequence[EvalSample],
    systems: Sequence[str],
    metric: str,
    config: BackendConfig | None = None,
    cache: EmbeddingCache | None = None,
    splitter: SentenceSplitter | None = None,
) -> dict[str, dict[str, dict[str, float]]]:
    """Single-reference F1 per (reference index, system, sample).

    ``metric`` is "semf1" or a ROUGE variant ("R1", "R2", "RL"). The
    result feeds pairwise_annotator_matrix with reference indices playing
    the annotator role ("ref1"..."refN", 1-based).
    """
    if not samples:
        raise EmptyInputError("no samples to correlate")
    n_refs = min(len(sample.references) for sample in samples)
    if n_refs < 2:
        raise AlignmentError("correlation needs at least 2 references per sample")
    table: dict[str, dict[str, dict[str, float]]] = {
        f"ref{k + 1}": {system: {} for system in systems} for k in range(n_refs)
    }
    for sample in samples:
        for system in systems:
            if metric == "semf1":
                gen = sample.system_sentences(system, splitter)
                for k in range(n_refs):
                    score = sem_f1_single(
                        gen, sample.reference_sentences(k, splitter), config, cache
                    )
                    table[f"ref{k + 1}"][system][sample.id] = score.f1
            else:
                candidate = tokenize(sample.system_outputs[system])
                for k in range(n_refs):
                    score = rouge_multi(
                        candidate, [tokenize(sample.references[k])], metric
                    )
                    table[f"ref{k + 1}"][system][sample.id] = score.f1
    return table


def run_correlation(
    samples: Sequence[EvalSample],
    systems: Sequence[str],
    metric: str,
    config: BackendConfig | None = None,
    cache: EmbeddingCache | None = None,
    splitter: SentenceSplitter | None = None,
) -> AnnotatorMatrix:
    table = reference_score_table(samples, systems, metric, config, cache, splitter)
    return pairwise_annotator_matrix(table)


# ---------------------------------------------------------------------------
# Random baselines


@dataclass
class BaselineRun:
    system: str
    actual: SemScore
    random_overlap: SemScore
    random_annotation: SemScore


def run_baselines(
    samples: Sequence[EvalSample],
    systems: Sequence[str],
    config: BackendConfig,
    seed: int,
    cache: EmbeddingCache | None = None,
    jobs: int = 1,
    splitter: SentenceSplitter | None = None,
) -> list[BaselineRun]:
    """Actual vs mismatched-summary vs mismatched-reference scores."""
    runs = []
    annotation_map = random_annotation_baseline(samples, seed)
    annotation_view = with_reference_override(samples, annotation_map)
    for system in systems:
        actual = dataset_sem_f1(samples, system, config, cache, jobs, splitter)
        overlap_map = random_overlap_baseline(samples, system, seed)
        overlap_view = with_system_override(samples, system, overlap_map)
        runs.append(
            BaselineRun(
                system,
                actual,
                dataset_sem_f1(overlap_view, system, config, cache, jobs, splitter),
                dataset_sem_f1(annotation_view, system, config, cache, jobs, splitter),
            )
        )
    return runs


# ---------------------------------------------------------------------------
# Cache warming


def collect_texts(samples: Sequence[EvalSample], systems: Sequence[str]) -> list[str]:
    """Every reference and system-output text in a dataset, in order."""
    texts = []
    for sample in samples:
        texts.extend(sample.references)
        for system in systems:
            if system in sample.system_outputs:
                texts.append(sample.system_outputs[system])
    return texts
