"""Lexical overlap baselines: ROUGE-1, ROUGE-2 and ROUGE-L.

Token sequences come from textseg.tokenize (lowercase alphanumeric runs);
no stemming or stopword removal is applied. ROUGE-L uses the longest
common subsequence over whole-summary token sequences with a plain
harmonic-mean F1. For multiple references, each variant scores against
every reference and keeps the one with maximum F1 (ties break toward the
lowest reference index).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyInputError

R1 = "R1"
R2 = "R2"
RL = "RL"
VARIANTS = (R1, R2, RL)


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float
    variant: str


def _f1(precision: float, recall: float) -> float:
    total = precision + recall
    return 2.0 * precision * recall / total if total > 0.0 else 0.0


def ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    """Contiguous n-grams with multiplicity; empty when len(tokens) < n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> RougeScore:
    """Clipped n-gram overlap precision/recall/F1."""
    cand_grams = ngram_counts(candidate, n)
    ref_grams = ngram_counts(reference, n)
    overlap = sum((cand_grams & ref_grams).values())
    cand_total = sum(cand_grams.values())
    ref_total = sum(ref_grams.values())
    precision = overlap / cand_total if cand_total else 0.0
    recall = overlap / ref_total if ref_total else 0.0
    return RougeScore(precision, recall, _f1(precision, recall), f"R{n}")


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length (dynamic programming, O(|a|*|b|))."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for token_a in a:
        curr = [0] * (len(b) + 1)
        for j, token_b in enumerate(b, 1):
            if token_a == token_b:
                curr[j] = prev[j - 1] + 1
            else:
                curr[j] = max(prev[j], curr[j - 1])
        prev = curr
    return prev[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    """LCS-based precision/recall/F1 over whole-summary token sequences."""
    lcs = lcs_length(candidate, reference)
    precision = lcs / len(candidate) if candidate else 0.0
    recall = lcs / len(reference) if reference else 0.0
    return RougeScore(precision, recall, _f1(precision, recall), RL)


def _score_one(candidate: Sequence[str], reference: Sequence[str], variant: str) -> RougeScore:
    if variant == R1:
        return rouge_n(candidate, reference, 1)
    if variant == R2:
        return rouge_n(candidate, reference, 2)
    if variant == RL:
        return rouge_l(candidate, reference)
    raise ValueError(f"unknown variant {variant!r}")


def rouge_multi(
    candidate: Sequence[str],
    references: Sequence[Sequence[str]],
    variant: str,
) -> RougeScore:
    """Best-F1 score across references; ties keep the earliest reference."""
    if not references:
        raise EmptyInputError("rouge_multi requires at least one reference")
    best = _score_one(candidate, references[0], variant)
    for reference in references[1:]:
        score = _score_one(candidate, reference, variant)
        if score.f1 > best.f1:
            best = score
    return best
