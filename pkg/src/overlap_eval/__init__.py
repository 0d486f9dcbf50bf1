"""Evaluation toolkit for semantic-overlap summaries.

Scores system summaries against multiple references with an
embedding-based precision/recall metric (SEM-F1), plus the supporting
analysis stack: thresholded overlap labels, reward-matrix agreement,
Kendall/Pearson correlation, ROUGE baselines and seeded random baselines
over narrative-pair corpora.
"""

from .embeddings import (
    BackendConfig,
    EmbeddingBatch,
    EmbeddingCache,
    embed_sentences,
    normalize,
    test_embed,
)
from .labeling import (
    LabelSequence,
    OverlapLabel,
    ThresholdPair,
    dataset_reward,
    label_to_number,
    reward,
    sample_reward,
    standard_threshold_grid,
    threshold_labels,
)
from .rouge import RougeScore, lcs_length, ngram_counts, rouge_l, rouge_multi, rouge_n
from .semf1 import (
    SemScore,
    cosine_similarity,
    dataset_sem_f1,
    precision_values,
    recall_values,
    score_matrix,
    sem_f1_multi,
    sem_f1_single,
    similarity_matrix,
)
from .stats import CorrelationResult, flatten_labels, kendall_tau_b, pairwise_annotator_matrix, pearson_r
from .textseg import Sentence, SentenceSplitter, split_sentences, tokenize

__version__ = "0.1.0"

__all__ = [
    "BackendConfig",
    "CorrelationResult",
    "EmbeddingBatch",
    "EmbeddingCache",
    "LabelSequence",
    "OverlapLabel",
    "RougeScore",
    "SemScore",
    "Sentence",
    "SentenceSplitter",
    "ThresholdPair",
    "cosine_similarity",
    "dataset_reward",
    "dataset_sem_f1",
    "embed_sentences",
    "flatten_labels",
    "kendall_tau_b",
    "label_to_number",
    "lcs_length",
    "ngram_counts",
    "normalize",
    "pairwise_annotator_matrix",
    "pearson_r",
    "precision_values",
    "recall_values",
    "reward",
    "rouge_l",
    "rouge_multi",
    "rouge_n",
    "sample_reward",
    "score_matrix",
    "sem_f1_multi",
    "sem_f1_single",
    "similarity_matrix",
    "split_sentences",
    "standard_threshold_grid",
    "test_embed",
    "threshold_labels",
    "tokenize",
]
