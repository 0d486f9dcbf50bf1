"""Machine-readable report writers (JSON and CSV).

Reports are deterministic: identical inputs produce byte-identical files.
No timestamps appear here; timing lives in the CLI's sidecar log.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Sequence

from .pipelines import BaselineRun, PairAgreement, RougeRun, ScoreRun
from .stats import AnnotatorMatrix


def write_json(obj, path: str | Path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def score_report(run: ScoreRun) -> dict:
    return {
        "system": run.system,
        "model": run.model,
        "precision": run.aggregate.precision,
        "recall": run.aggregate.recall,
        "f1": run.aggregate.f1,
        "n_samples": len(run.per_sample),
        "per_sample": [
            {
                "id": r.sample_id,
                "precision": r.score.precision,
                "recall": r.score.recall,
                "f1": r.score.f1,
                "diagnostics": list(r.score.diagnostics),
            }
            for r in run.per_sample
        ],
    }


def write_semf1_csv(runs: Sequence[ScoreRun], path: str | Path) -> None:
    """Rows are systems, columns are embedding models, cells are F1."""
    models = sorted({run.model for run in runs})
    cells = {(run.system, run.model): run.aggregate.f1 for run in runs}
    systems = sorted({run.system for run in runs})
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["system"] + models)
        for system in systems:
            writer.writerow(
                [system]
                + [
                    f"{cells[(system, model)]:.4f}" if (system, model) in cells else ""
                    for model in models
                ]
            )


def rouge_report(run: RougeRun) -> dict:
    return {
        "system": run.system,
        "aggregate": {
            variant: {
                "precision": score.precision,
                "recall": score.recall,
                "f1": score.f1,
            }
            for variant, score in run.aggregate.items()
        },
        "per_sample": {
            variant: [
                {
                    "id": sample_id,
                    "precision": score.precision,
                    "recall": score.recall,
                    "f1": score.f1,
                }
                for sample_id, score in scores
            ]
            for variant, scores in run.per_sample.items()
        },
    }


def write_rouge_csv(runs: Sequence[RougeRun], path: str | Path) -> None:
    """Columns (system, R1, R2, RL); values are F1 x 100 at 2 decimals."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["system", "R1", "R2", "RL"])
        for run in sorted(runs, key=lambda r: r.system):
            writer.writerow(
                [run.system]
                + [f"{run.aggregate[v].f1 * 100:.2f}" for v in ("R1", "R2", "RL")]
            )


def correlation_report(metric: str, matrix: AnnotatorMatrix) -> dict:
    return {
        "metric": metric,
        "pairs": [
            {
                "a": cell.a,
                "b": cell.b,
                "coefficient": cell.result.coefficient,
                "p_value": cell.result.p_value,
                "n": cell.result.n,
                "significant": cell.result.significant,
                "system": cell.system,
            }
            for cell in matrix.pairs
        ],
        "average": matrix.average,
    }


def write_correlation_csv(matrix: AnnotatorMatrix, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["a", "b", "coefficient", "p_value", "n", "significant", "system"])
        for cell in matrix.pairs:
            writer.writerow(
                [
                    cell.a,
                    cell.b,
                    f"{cell.result.coefficient:.4f}",
                    f"{cell.result.p_value:.6g}",
                    cell.result.n,
                    str(cell.result.significant).lower(),
                    cell.system or "",
                ]
            )
        writer.writerow(["average", "", f"{matrix.average:.4f}", "", "", "", ""])


def _side_dict(side) -> dict | None:
    if side is None:
        return None
    return {
        "reward_mean": side.reward_mean,
        "reward_std": side.reward_std,
        "kendall_tau": None if math.isnan(side.tau) else side.tau,
        "kendall_p": None if math.isnan(side.tau_p) else side.tau_p,
        "n_samples": side.n_samples,
        "n_labels": side.n_labels,
    }


def agreement_report(pairs: Sequence[PairAgreement]) -> dict:
    return {
        "pairs": [
            {
                "a": pair.source_a,
                "b": pair.source_b,
                "threshold": pair.threshold,
                "precision": _side_dict(pair.precision),
                "recall": _side_dict(pair.recall),
            }
            for pair in pairs
        ]
    }


def _agreement_cell(side) -> str:
    if side is None:
        return ""
    tau = "nan" if math.isnan(side.tau) else f"{side.tau:.2f}"
    return f"{side.reward_mean:.2f}±{side.reward_std:.2f}/{tau}"


def write_agreement_csv(pairs: Sequence[PairAgreement], path: str | Path) -> None:
    """Pivot rows (pair, side) x threshold columns, cells reward/tau."""
    thresholds = sorted({pair.threshold for pair in pairs})
    names = sorted({(pair.source_a, pair.source_b) for pair in pairs})
    index = {(p.source_a, p.source_b, p.threshold): p for p in pairs}
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["pair", "side"] + thresholds)
        for a, b in names:
            for side_name in ("precision", "recall"):
                row = [f"{a}|{b}", side_name]
                for threshold in thresholds:
                    pair = index.get((a, b, threshold))
                    side = getattr(pair, side_name) if pair else None
                    row.append(_agreement_cell(side))
                writer.writerow(row)


def baseline_report(runs: Sequence[BaselineRun], seed: int, model: str) -> dict:
    return {
        "seed": seed,
        "model": model,
        "systems": [
            {
                "system": run.system,
                "actual": {
                    "precision": run.actual.precision,
                    "recall": run.actual.recall,
                    "f1": run.actual.f1,
                },
                "random_overlap": {
                    "precision": run.random_overlap.precision,
                    "recall": run.random_overlap.recall,
                    "f1": run.random_overlap.f1,
                },
                "random_annotation": {
                    "precision": run.random_annotation.precision,
                    "recall": run.random_annotation.recall,
                    "f1": run.random_annotation.f1,
                },
            }
            for run in runs
        ],
    }


def write_baseline_csv(runs: Sequence[BaselineRun], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["system", "random_annotation_f1", "random_overlap_f1", "actual_f1"])
        for run in sorted(runs, key=lambda r: r.system):
            writer.writerow(
                [
                    run.system,
                    f"{run.random_annotation.f1:.4f}",
                    f"{run.random_overlap.f1:.4f}",
                    f"{run.actual.f1:.4f}",
                ]
            )


def write_stats_csv(stats: dict, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["split", "n_samples", "words_docs", "sents_docs", "words_references", "sents_references"]
        )
        writer.writerow(
            [
                stats["split"],
                stats["n_samples"],
                f"{stats['words_per_doc_pair']:.2f}",
                f"{stats['sents_per_doc_pair']:.2f}",
                "/".join(f"{v:.2f}" for v in stats["words_per_reference"]),
                "/".join(f"{v:.2f}" for v in stats["sents_per_reference"]),
            ]
        )
