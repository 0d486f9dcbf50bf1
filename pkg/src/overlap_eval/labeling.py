"""Thresholded overlap labels and reward-based agreement.

Raw sentence similarity scores map to the ordinal labels P (present),
PP (partially present) and A (absent) through a two-sided threshold band:
score >= t_u is P, t_l <= score < t_u is PP, below t_l is A. The P branch
is tested first, so a score exactly at t_u resolves to P and one exactly
at t_l to PP. Agreement between two label sources uses a symmetric reward
matrix: exact match pays 1, P vs PP pays 0.5, any pairing with exactly
one A pays 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .errors import AlignmentError, EmptyInputError, InvalidScoreError, ParseError, SchemaError


class OverlapLabel(str, Enum):
    P = "P"
    PP = "PP"
    A = "A"


_NUMERIC = {OverlapLabel.P: 1.0, OverlapLabel.PP: 0.5, OverlapLabel.A: 0.0}

PRECISION_SIDE = "precision"
RECALL_SIDE = "recall"


@dataclass(frozen=True)
class ThresholdPair:
    """Lower/upper similarity thresholds, both in [0, 1], t_l <= t_u."""

    t_l: float
    t_u: float

    def __post_init__(self):
        if not (0.0 <= self.t_l <= self.t_u <= 1.0):
            raise ValueError(f"need 0 <= t_l <= t_u <= 1, got ({self.t_l}, {self.t_u})")

    def __str__(self) -> str:
        return f"{round(self.t_l * 100)}:{round(self.t_u * 100)}"


@dataclass(frozen=True)
class LabelSequence:
    """Ordinal labels aligned to one sentence list, tagged with its side."""

    labels: tuple[OverlapLabel, ...]
    side: str = PRECISION_SIDE

    def __len__(self) -> int:
        return len(self.labels)


def standard_threshold_grid() -> list[ThresholdPair]:
    """The seven threshold bands used for sensitivity analysis."""
    percents = [(25, 75), (35, 65), (45, 75), (55, 65), (55, 75), (55, 80), (60, 80)]
    return [ThresholdPair(lo / 100.0, hi / 100.0) for lo, hi in percents]


def threshold_labels(
    raw_scores: Sequence[float],
    thresholds: ThresholdPair,
    side: str = PRECISION_SIDE,
) -> LabelSequence:
    """Map raw similarity scores in [0, 1] to P/PP/A labels."""
    labels = []
    for score in raw_scores:
        if not (0.0 <= score <= 1.0):
            raise InvalidScoreError(f"similarity score {score} outside [0, 1]")
        if score >= thresholds.t_u:
            labels.append(OverlapLabel.P)
        elif score >= thresholds.t_l:
            labels.append(OverlapLabel.PP)
        else:
            labels.append(OverlapLabel.A)
    return LabelSequence(tuple(labels), side)


def label_to_number(label: OverlapLabel) -> float:
    """Ordinal-to-numeric mapping: P -> 1, PP -> 0.5, A -> 0."""
    return _NUMERIC[OverlapLabel(label)]


def reward(a: OverlapLabel, b: OverlapLabel) -> float:
    """Symmetric agreement payoff for one label pair."""
    a = OverlapLabel(a)
    b = OverlapLabel(b)
    if a == b:
        return 1.0
    if OverlapLabel.A in (a, b):
        return 0.0
    return 0.5  # the P/PP near-miss


def sample_reward(x: LabelSequence, y: LabelSequence) -> float:
    """Mean pairwise reward over two aligned label sequences."""
    if x.side != y.side:
        raise AlignmentError(f"side mismatch: {x.side!r} vs {y.side!r}")
    if len(x) != len(y):
        raise AlignmentError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) == 0:
        raise AlignmentError("cannot average over empty label sequences")
    return sum(reward(a, b) for a, b in zip(x.labels, y.labels)) / len(x)


def dataset_reward(per_sample_rewards: Sequence[float]) -> tuple[float, float]:
    """Unweighted mean and population standard deviation across samples."""
    if not per_sample_rewards:
        raise EmptyInputError("no per-sample rewards to aggregate")
    n = len(per_sample_rewards)
    mean = sum(per_sample_rewards) / n
    variance = sum((r - mean) ** 2 for r in per_sample_rewards) / n
    return mean, math.sqrt(variance)


@dataclass(frozen=True)
class AnnotationRecord:
    """One line of an annotation file.

    Precision-side labels align to the system-summary sentences judged
    against all references at once (reference_index is null); recall-side
    labels align to the sentences of the reference at reference_index.
    """

    sample_id: str
    annotator: str
    side: str
    reference_index: int | None
    labels: tuple[OverlapLabel, ...]

    def sequence(self) -> LabelSequence:
        return LabelSequence(self.labels, self.side)


def load_annotations(path: str | Path) -> list[AnnotationRecord]:
    """Read a JSONL annotation file, validating each record."""
    records = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(exc), lineno)
            for key in ("sample_id", "annotator", "side", "labels"):
                if key not in obj:
                    raise SchemaError(key, lineno)
            if obj["side"] not in (PRECISION_SIDE, RECALL_SIDE):
                raise SchemaError("side", lineno, f"unknown side {obj['side']!r}")
            try:
                labels = tuple(OverlapLabel(l) for l in obj["labels"])
            except ValueError as exc:
                raise SchemaError("labels", lineno, str(exc))
            records.append(
                AnnotationRecord(
                    sample_id=str(obj["sample_id"]),
                    annotator=str(obj["annotator"]),
                    side=obj["side"],
                    reference_index=obj.get("reference_index"),
                    labels=labels,
                )
            )
    return records


def write_annotations(records: Iterable[AnnotationRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(
                json.dumps(
                    {
                        "sample_id": record.sample_id,
                        "annotator": record.annotator,
                        "side": record.side,
                        "reference_index": record.reference_index,
                        "labels": [label.value for label in record.labels],
                    }
                )
                + "\n"
            )
