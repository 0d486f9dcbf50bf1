"""Correlation statistics for agreement analysis.

Kendall's tau is computed in its tie-corrected tau-b form because ordinal
P/PP/A label vectors are massively tied; significance uses the two-sided
normal approximation. Pearson's r reports a two-sided p-value from the
t statistic t = r * sqrt((n-2) / (1-r^2)) with n-2 degrees of freedom.
Both delegate the heavy lifting to scipy.stats behind this module's
contracts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.stats

from .errors import AlignmentError, DegenerateInputError, EmptyInputError
from .labeling import LabelSequence, label_to_number

SIGNIFICANCE_LEVEL = 0.05


@dataclass(frozen=True)
class CorrelationResult:
    coefficient: float
    p_value: float
    n: int

    @property
    def significant(self) -> bool:
        return self.p_value < SIGNIFICANCE_LEVEL


def flatten_labels(sequences: Sequence[LabelSequence]) -> np.ndarray:
    """Concatenate label sequences (caller-ordered) as numeric values."""
    values = [label_to_number(label) for seq in sequences for label in seq.labels]
    return np.asarray(values, dtype=np.float64)


def _check_pair(x: Sequence[float], y: Sequence[float], min_n: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise AlignmentError(f"vector lengths differ: {x.shape} vs {y.shape}")
    if len(x) < min_n:
        raise DegenerateInputError(f"need at least {min_n} observations, got {len(x)}")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateInputError("zero variance on one side")
    return x, y


def kendall_tau_b(x: Sequence[float], y: Sequence[float]) -> CorrelationResult:
    """Tie-corrected Kendall rank correlation with asymptotic p-value."""
    x, y = _check_pair(x, y, min_n=2)
    if len(x) == 2:
        # scipy's tie-adjusted variance needs n >= 3; with two untied
        # observations tau is +-1 and z = 3(C-D)/sqrt(n(n-1)(2n+5)/2) = tau
        tau = 1.0 if (x[1] - x[0]) * (y[1] - y[0]) > 0 else -1.0
        p = float(2.0 * scipy.stats.norm.sf(1.0))
        return CorrelationResult(tau, p, 2)
    result = scipy.stats.kendalltau(x, y, variant="b", method="asymptotic")
    return CorrelationResult(float(result.statistic), float(result.pvalue), len(x))


def pearson_r(x: Sequence[float], y: Sequence[float]) -> CorrelationResult:
    """Product-moment correlation with two-sided t-test p-value."""
    x, y = _check_pair(x, y, min_n=3)
    n = len(x)
    r = float(np.corrcoef(x, y)[0, 1])
    r = min(1.0, max(-1.0, r))
    if abs(r) == 1.0:
        p = 0.0
    else:
        t = r * np.sqrt((n - 2) / (1.0 - r * r))
        p = float(2.0 * scipy.stats.t.sf(abs(t), df=n - 2))
    return CorrelationResult(r, p, n)


@dataclass(frozen=True)
class PairCell:
    """Correlation for one unordered annotator pair.

    When scores carry a systems axis, ``system`` names the system whose
    coefficient was maximal for this pair.
    """

    a: str
    b: str
    result: CorrelationResult
    system: str | None = None


@dataclass(frozen=True)
class AnnotatorMatrix:
    annotators: tuple[str, ...]
    pairs: tuple[PairCell, ...]
    average: float


ScoreTable = Mapping[str, Mapping[str, Mapping[str, float]]]


def pairwise_annotator_matrix(
    scores: ScoreTable,
    corr_fn: Callable[[Sequence[float], Sequence[float]], CorrelationResult] = pearson_r,
) -> AnnotatorMatrix:
    """Lower-triangular correlation matrix over annotators.

    ``scores[annotator][system][sample_id]`` holds one score per sample;
    use a single placeholder system key when there is no systems axis.
    Every annotator must cover exactly the same sample ids for each
    system. Per pair, the maximum coefficient across systems is kept and
    the reported average is the mean of those maxima.
    """
    annotators = sorted(scores)
    if len(annotators) < 2:
        raise EmptyInputError("need at least two annotators")
    systems = sorted({system for table in scores.values() for system in table})

    ids_by_system: dict[str, list[str]] = {}
    for system in systems:
        id_sets = {
            annotator: set(scores[annotator].get(system, {})) for annotator in annotators
        }
        union = set().union(*id_sets.values())
        missing = sorted(
            f"{annotator}:{sample_id}"
            for annotator, present in id_sets.items()
            for sample_id in union - present
        )
        if missing:
            raise AlignmentError(
                f"missing scores for system {system!r}", ids=missing
            )
        ids_by_system[system] = sorted(union)

    cells = []
    for i, b in enumerate(annotators):
        for a in annotators[:i]:
            best: CorrelationResult | None = None
            best_system = None
            for system in systems:
                ids = ids_by_system[system]
                result = corr_fn(
                    [scores[a][system][sid] for sid in ids],
                    [scores[b][system][sid] for sid in ids],
                )
                if best is None or result.coefficient > best.coefficient:
                    best = result
                    best_system = system
            cells.append(PairCell(a, b, best, best_system))
    average = float(np.mean([cell.result.coefficient for cell in cells]))
    return AnnotatorMatrix(tuple(annotators), tuple(cells), average)
