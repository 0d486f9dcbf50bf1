"""Narrative-pair dataset loading, filtering and random baselines.

Datasets are JSON Lines, one record per narrative pair (see README for
the schema). Each test sample carries reference overlap summaries in a
fixed order: the provider description first, then the human annotators.
Records may ship pre-segmented sentence lists, in which case the
rule-based splitter is skipped for those fields.

The two random baselines (mismatched system output / mismatched
reference) draw from the library's own seeded generator so assignments
reproduce bit-exactly across platforms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    DuplicateIdError,
    MissingSystemOutputError,
    ParseError,
    SchemaError,
)
from .labeling import AnnotationRecord
from .rng import Rng
from .textseg import Sentence, SentenceSplitter, as_sentences, split_sentences, word_count

_PAIR_FIELDS = (
    "id",
    "theme",
    "theme_description",
    "left_head",
    "left_context",
    "right_head",
    "right_context",
)


@dataclass(frozen=True)
class NarrativePair:
    """One event covered from two sides plus the provider's description."""

    id: str
    theme: str
    theme_description: str
    left_head: str
    left_context: str
    right_head: str
    right_context: str


@dataclass
class EvalSample:
    """A narrative pair with its references, system outputs and labels.

    ``references`` order is fixed: provider description first, then human
    annotators, so reference indices in annotation files are unambiguous.
    ``pre_segmented`` maps field paths ("references.0",
    "system_outputs.bart", "left_context", ...) to explicit sentence
    lists.
    """

    pair: NarrativePair
    references: list[str] = field(default_factory=list)
    system_outputs: dict[str, str] = field(default_factory=dict)
    pre_segmented: dict[str, list[str]] = field(default_factory=dict)
    annotations: list[AnnotationRecord] = field(default_factory=list)

    @property
    def id(self) -> str:
        return self.pair.id

    def _sentences(self, key: str, text: str, splitter: SentenceSplitter | None) -> list[Sentence]:
        if key in self.pre_segmented:
            return as_sentences(self.pre_segmented[key])
        if splitter is not None:
            return splitter.split(text)
        return split_sentences(text)

    def reference_sentences(self, k: int, splitter: SentenceSplitter | None = None) -> list[Sentence]:
        return self._sentences(f"references.{k}", self.references[k], splitter)

    def system_sentences(self, name: str, splitter: SentenceSplitter | None = None) -> list[Sentence]:
        if name not in self.system_outputs:
            raise MissingSystemOutputError(f"sample {self.id!r} has no output for {name!r}")
        return self._sentences(f"system_outputs.{name}", self.system_outputs[name], splitter)

    def context_sentences(self, side: str, splitter: SentenceSplitter | None = None) -> list[Sentence]:
        text = getattr(self.pair, f"{side}_context")
        return self._sentences(f"{side}_context", text, splitter)


@dataclass
class DatasetSplit:
    """A named list of samples with unique ids, in file order."""

    name: str
    samples: list[EvalSample]

    def __len__(self) -> int:
        return len(self.samples)

    def by_id(self) -> dict[str, EvalSample]:
        return {sample.id: sample for sample in self.samples}


def _require_str(obj: dict, key: str, lineno: int, allow_empty: bool = True) -> str:
    if key not in obj:
        raise SchemaError(key, lineno)
    value = obj[key]
    if not isinstance(value, str):
        raise SchemaError(key, lineno, f"field {key!r} must be a string")
    if not allow_empty and not value.strip():
        raise SchemaError(key, lineno, f"field {key!r} must be non-empty")
    return value


def load_dataset(path: str | Path, name: str = "test") -> DatasetSplit:
    """Load and validate a JSONL dataset; order follows the file."""
    samples: list[EvalSample] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(exc), lineno)
            if not isinstance(obj, dict):
                raise ParseError("record must be a JSON object", lineno)
            pair = NarrativePair(
                id=_require_str(obj, "id", lineno, allow_empty=False),
                theme=_require_str(obj, "theme", lineno),
                theme_description=_require_str(obj, "theme_description", lineno),
                left_head=_require_str(obj, "left_head", lineno),
                left_context=_require_str(obj, "left_context", lineno, allow_empty=False),
                right_head=_require_str(obj, "right_head", lineno),
                right_context=_require_str(obj, "right_context", lineno, allow_empty=False),
            )
            if pair.id in seen:
                raise DuplicateIdError(f"line {lineno}: duplicate sample id {pair.id!r}")
            seen.add(pair.id)

            references = obj.get("references", [])
            if not isinstance(references, list) or not all(
                isinstance(r, str) for r in references
            ):
                raise SchemaError("references", lineno, "must be a list of strings")
            system_outputs = obj.get("system_outputs", {})
            if not isinstance(system_outputs, dict) or not all(
                isinstance(k, str) and isinstance(v, str) for k, v in system_outputs.items()
            ):
                raise SchemaError("system_outputs", lineno, "must map names to strings")
            pre_segmented = obj.get("pre_segmented", {})
            if not isinstance(pre_segmented, dict) or not all(
                isinstance(k, str)
                and isinstance(v, list)
                and all(isinstance(s, str) for s in v)
                for k, v in pre_segmented.items()
            ):
                raise SchemaError("pre_segmented", lineno, "must map fields to sentence lists")

            samples.append(
                EvalSample(
                    pair=pair,
                    references=list(references),
                    system_outputs=dict(system_outputs),
                    pre_segmented={k: list(v) for k, v in pre_segmented.items()},
                )
            )
    return DatasetSplit(name, samples)


def write_dataset(split: DatasetSplit, path: str | Path) -> None:
    """Serialize a split back to JSONL (inverse of load_dataset)."""
    with open(path, "w", encoding="utf-8") as handle:
        for sample in split.samples:
            record: dict = {f: getattr(sample.pair, f) for f in _PAIR_FIELDS}
            if sample.references:
                record["references"] = sample.references
            if sample.system_outputs:
                record["system_outputs"] = sample.system_outputs
            if sample.pre_segmented:
                record["pre_segmented"] = sample.pre_segmented
            handle.write(json.dumps(record) + "\n")


def attach_annotations(split: DatasetSplit, records: Iterable[AnnotationRecord]) -> None:
    """Attach annotation records to their samples; unknown ids are ignored."""
    index = split.by_id()
    for record in records:
        sample = index.get(record.sample_id)
        if sample is not None:
            sample.annotations.append(record)


def filter_min_words(
    samples: Sequence[EvalSample], min_words: int = 15
) -> tuple[list[EvalSample], list[EvalSample]]:
    """Keep samples where >= 2 human references reach ``min_words`` tokens.

    Human references are all references after the leading provider
    description. Returns (kept, dropped) so audits can see both sides.
    """
    kept, dropped = [], []
    for sample in samples:
        human_refs = sample.references[1:]
        long_enough = sum(1 for ref in human_refs if word_count(ref) >= min_words)
        (kept if long_enough >= 2 else dropped).append(sample)
    return kept, dropped


def concat_pair(pair: NarrativePair) -> str:
    """Generator input: both contexts joined by a single newline."""
    return pair.left_context + "\n" + pair.right_context


def _draw_other(rng: Rng, i: int, n: int) -> int:
    j = rng.randrange(n - 1)
    return j if j < i else j + 1


def random_overlap_baseline(
    samples: Sequence[EvalSample], system: str, seed: int
) -> dict[str, str]:
    """Assign each sample the ``system`` output of another random sample."""
    if len(samples) < 2:
        raise ValueError("random overlap baseline needs at least 2 samples")
    for sample in samples:
        if system not in sample.system_outputs:
            raise MissingSystemOutputError(
                f"sample {sample.id!r} has no output for {system!r}"
            )
    rng = Rng(seed)
    n = len(samples)
    return {
        sample.id: samples[_draw_other(rng, i, n)].system_outputs[system]
        for i, sample in enumerate(samples)
    }


def random_annotation_baseline(
    samples: Sequence[EvalSample], seed: int
) -> dict[str, str]:
    """Assign each sample one random reference of another random sample."""
    if len(samples) < 2:
        raise ValueError("random annotation baseline needs at least 2 samples")
    for sample in samples:
        if not sample.references:
            raise ValueError(f"sample {sample.id!r} has no references")
    rng = Rng(seed)
    n = len(samples)
    assignment = {}
    for i, sample in enumerate(samples):
        other = samples[_draw_other(rng, i, n)]
        assignment[sample.id] = other.references[rng.randrange(len(other.references))]
    return assignment


def with_system_override(
    samples: Sequence[EvalSample], system: str, summaries: dict[str, str]
) -> list[EvalSample]:
    """Sample views whose ``system`` output is replaced per sample id.

    Used to evaluate baseline assignments: replacement summaries are raw
    text, so any pre-segmentation recorded for the original output is
    dropped.
    """
    out = []
    for sample in samples:
        outputs = dict(sample.system_outputs)
        outputs[system] = summaries[sample.id]
        pre = {
            k: v
            for k, v in sample.pre_segmented.items()
            if k != f"system_outputs.{system}"
        }
        out.append(
            EvalSample(
                pair=sample.pair,
                references=list(sample.references),
                system_outputs=outputs,
                pre_segmented=pre,
                annotations=sample.annotations,
            )
        )
    return out


def with_reference_override(
    samples: Sequence[EvalSample], summaries: dict[str, str]
) -> list[EvalSample]:
    """Sample views whose reference list is replaced by one summary each."""
    out = []
    for sample in samples:
        pre = {
            k: v
            for k, v in sample.pre_segmented.items()
            if not k.startswith("references.")
        }
        out.append(
            EvalSample(
                pair=sample.pair,
                references=[summaries[sample.id]],
                system_outputs=dict(sample.system_outputs),
                pre_segmented=pre,
                annotations=sample.annotations,
            )
        )
    return out


def split_statistics(split: DatasetSplit, splitter: SentenceSplitter | None = None) -> dict:
    """Mean word/sentence counts for documents and references.

    Document counts treat the two contexts of a pair as one concatenated
    input. Splits without explicit references (train-style) fall back to
    the provider description as the single reference.
    """
    if not split.samples:
        return {
            "split": split.name,
            "n_samples": 0,
            "words_per_doc_pair": 0.0,
            "sents_per_doc_pair": 0.0,
            "words_per_reference": [],
            "sents_per_reference": [],
            "short_theme_samples": 0,
        }
    doc_words = []
    doc_sents = []
    ref_words: dict[int, list[int]] = {}
    ref_sents: dict[int, list[int]] = {}
    short_theme = 0
    for sample in split.samples:
        doc_words.append(word_count(concat_pair(sample.pair)))
        doc_sents.append(
            len(sample.context_sentences("left", splitter))
            + len(sample.context_sentences("right", splitter))
        )
        if word_count(sample.pair.theme_description) < 15:
            short_theme += 1
        references = sample.references or [sample.pair.theme_description]
        for k, ref in enumerate(references):
            ref_words.setdefault(k, []).append(word_count(ref))
            if sample.references:
                sents = sample.reference_sentences(k, splitter)
            else:
                sents = (splitter.split if splitter else split_sentences)(ref)
            ref_sents.setdefault(k, []).append(len(sents))
    mean = lambda xs: sum(xs) / len(xs)
    return {
        "split": split.name,
        "n_samples": len(split.samples),
        "words_per_doc_pair": mean(doc_words),
        "sents_per_doc_pair": mean(doc_sents),
        "words_per_reference": [mean(ref_words[k]) for k in sorted(ref_words)],
        "sents_per_reference": [mean(ref_sents[k]) for k in sorted(ref_sents)],
        "short_theme_samples": short_theme,
    }
