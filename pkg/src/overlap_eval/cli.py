"""Command-line interface.

Subcommands map one-to-one onto the pipelines: ``score`` (embedding
precision/recall/F1), ``rouge``, ``agreement`` (reward and Kendall tables
between label sources), ``correlate`` (per-reference correlation),
``baseline`` (seeded random baselines), ``stats`` (dataset statistics)
and ``embed-cache`` (freeze embeddings into an offline store).

Reports are written to files so runs can be diffed; stdout carries a
short summary. Exit codes: 0 clean, 2 completed with per-sample
diagnostics, 1 fatal. Re-running a command with identical inputs and seed
produces byte-identical reports; timestamps go only to the sidecar
run.log.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import pipelines, reports
from .corpus import load_dataset, split_statistics
from .embeddings import (
    ENDPOINT_ENV,
    BackendConfig,
    EmbeddingCache,
    default_cache_path,
    embed_sentences,
)
from .errors import OverlapEvalError
from .labeling import ThresholdPair, load_annotations, standard_threshold_grid
from .textseg import SentenceSplitter, load_abbreviations, split_sentences


@dataclass
class RunConfig:
    command: str
    dataset_path: str
    backend: BackendConfig | None
    thresholds: list[ThresholdPair]
    systems: list[str]
    seed: int
    output_dir: Path
    format: str = "both"
    jobs: int = 1
    splitter: SentenceSplitter | None = None
    annotation_files: list[str] = field(default_factory=list)
    metric: str = "semf1"
    split_name: str = "test"
    store_out: str | None = None


def _parse_thresholds(text: str) -> list[ThresholdPair]:
    """Percent notation, e.g. "25:75,45:75"."""
    pairs = []
    for chunk in text.split(","):
        lo, _, hi = chunk.strip().partition(":")
        pairs.append(ThresholdPair(float(lo) / 100.0, float(hi) / 100.0))
    return pairs


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="overlap-eval",
        description="Evaluate semantic-overlap summaries against multiple references.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dataset", required=True, help="JSONL dataset path")
    common.add_argument("--out", default="reports", help="report output directory")
    common.add_argument("--format", choices=("json", "csv", "both"), default="both")
    common.add_argument("--abbrev-file", help="custom sentence-splitter guard list")
    common.add_argument("--split-name", default="test", choices=("train", "test"))

    backend = argparse.ArgumentParser(add_help=False)
    backend.add_argument(
        "--backend", choices=("test", "precomputed", "remote"), default="test"
    )
    backend.add_argument("--model", default=None, help="embedding model id")
    backend.add_argument(
        "--endpoint", default=None, help=f"embedding service URL (or ${ENDPOINT_ENV})"
    )
    backend.add_argument("--store", default=None, help="precomputed store path")
    backend.add_argument("--seed", type=int, default=0, help="seed for test backend and baselines")
    backend.add_argument("--dim", type=int, default=256, help="test backend dimension")
    backend.add_argument("--jobs", type=int, default=os.cpu_count() or 1)

    systems = argparse.ArgumentParser(add_help=False)
    systems.add_argument(
        "--systems", required=True, help="comma-separated system names"
    )

    p = sub.add_parser("score", parents=[common, backend, systems])
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("rouge", parents=[common, systems])
    p.set_defaults(func=cmd_rouge)

    p = sub.add_parser("agreement", parents=[common, backend])
    p.add_argument("annotations", nargs="+", help="annotation JSONL files")
    p.add_argument("--systems", default=None, help="system to infer machine labels for")
    p.add_argument("--thresholds", default=None, help='percent pairs, e.g. "25:75,45:75"')
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("correlate", parents=[common, backend, systems])
    p.add_argument("--metric", choices=("semf1", "R1", "R2", "RL"), default="semf1")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("baseline", parents=[common, backend, systems])
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("stats", parents=[common])
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("embed-cache", parents=[common, backend, systems])
    p.add_argument("--store-out", required=True, help="store file to write")
    p.set_defaults(func=cmd_embed_cache)

    return parser


def _config_from_args(args) -> RunConfig:
    backend = None
    if hasattr(args, "backend"):
        endpoint = args.endpoint or os.environ.get(ENDPOINT_ENV)
        model = args.model
        if model is None:
            model = "test" if args.backend == "test" else "default"
        backend = BackendConfig(
            kind=args.backend,
            model_id=model,
            endpoint=endpoint,
            store_path=args.store,
            seed=args.seed,
            dim=args.dim,
        )
    thresholds = standard_threshold_grid()
    if getattr(args, "thresholds", None):
        thresholds = _parse_thresholds(args.thresholds)
    splitter = None
    if args.abbrev_file:
        splitter = SentenceSplitter(load_abbreviations(args.abbrev_file))
    systems = []
    if getattr(args, "systems", None):
        systems = [s.strip() for s in args.systems.split(",") if s.strip()]
    return RunConfig(
        command=args.command,
        dataset_path=args.dataset,
        backend=backend,
        thresholds=thresholds,
        systems=systems,
        seed=getattr(args, "seed", 0),
        output_dir=Path(args.out),
        format=args.format,
        jobs=getattr(args, "jobs", 1),
        splitter=splitter,
        annotation_files=list(getattr(args, "annotations", [])),
        metric=getattr(args, "metric", "semf1"),
        split_name=args.split_name,
        store_out=getattr(args, "store_out", None),
    )


def _cache_for(config: RunConfig) -> EmbeddingCache | None:
    # Remote calls are worth persisting; test/precomputed recompute cheaply.
    if config.backend is not None and config.backend.kind == "remote":
        return EmbeddingCache(default_cache_path())
    return None


def _log(config: RunConfig, message: str, started: float) -> None:
    stamp = datetime.now(timezone.utc).isoformat()
    elapsed = time.monotonic() - started
    with open(config.output_dir / "run.log", "a", encoding="utf-8") as handle:
        handle.write(f"{stamp} {config.command} {message} ({elapsed:.2f}s)\n")


def _maybe_json(config: RunConfig) -> bool:
    return config.format in ("json", "both")


def _maybe_csv(config: RunConfig) -> bool:
    return config.format in ("csv", "both")


def cmd_score(args) -> int:
    config = _config_from_args(args)
    started = time.monotonic()
    config.output_dir.mkdir(parents=True, exist_ok=True)
    split = load_dataset(config.dataset_path, config.split_name)
    runs = pipelines.run_semf1(
        split.samples,
        config.systems,
        config.backend,
        _cache_for(config),
        config.jobs,
        config.splitter,
    )
    written = []
    if _maybe_json(config):
        for run in runs:
            path = config.output_dir / f"score_{run.system}_{run.model}.json"
            reports.write_json(reports.score_report(run), path)
            written.append(path)
    if _maybe_csv(config):
        path = config.output_dir / "scores.csv"
        reports.write_semf1_csv(runs, path)
        written.append(path)
    print(f"{'system':<16} {'model':<12} {'precision':>9} {'recall':>9} {'f1':>9}")
    for run in runs:
        agg = run.aggregate
        print(
            f"{run.system:<16} {run.model:<12} "
            f"{agg.precision:>9.4f} {agg.recall:>9.4f} {agg.f1:>9.4f}"
        )
    for path in written:
        print(f"wrote {path}")
    diagnosed = sorted(
        {r.sample_id for run in runs for r in run.per_sample if r.score.diagnostics}
    )
    _log(config, f"systems={','.join(config.systems)} n={len(split)}", started)
    if diagnosed:
        print(f"diagnostics on samples: {', '.join(diagnosed)}", file=sys.stderr)
        return 2
    return 0


def cmd_rouge(args) -> int:
    config = _config_from_args(args)
    started = time.monotonic()
    config.output_dir.mkdir(parents=True, exist_ok=True)
    split = load_dataset(config.dataset_path, config.split_name)
    runs = pipelines.run_rouge(split.samples, config.systems)
    written = []
    if _maybe_json(config):
        for run in runs:
            path = config.output_dir / f"rouge_{run.system}.json"
            reports.write_json(reports.rouge_report(run), path)
            written.append(path)
    if _maybe_csv(config):
        path = config.output_dir / "rouge.csv"
        reports.write_rouge_csv(runs, path)
        written.append(path)
    print(f"{'system':<16} {'R1':>7} {'R2':>7} {'RL':>7}")
    for run in runs:
        print(
            f"{run.system:<16} "
            + " ".join(f"{run.aggregate[v].f1 * 100:>7.2f}" for v in ("R1", "R2", "RL"))
        )
    for path in written:
        print(f"wrote {path}")
    _log(config, f"systems={','.join(config.systems)} n={len(split)}", started)
    return 0


def cmd_agreement(args) -> int:
    config = _config_from_args(args)
    started = time.monotonic()
    config.output_dir.mkdir(parents=True, exist_ok=True)
    split = load_dataset(config.dataset_path, config.split_name)

    records = []
    for annotation_file in config.annotation_files:
        records.extend(load_annotations(annotation_file))
    human = pipelines.human_label_sources(records)

    sources_by_threshold: dict[str, dict[str, pipelines.LabelSource]] = {}
    if config.systems:
        system = config.systems[0]
        labeled_ids = {record.sample_id for record in records}
        cache = _cache_for(config)
        for thresholds in config.thresholds:
            machine = pipelines.machine_label_source(
                split.samples,
                system,
                thresholds,
                config.backend,
                cache,
                config.splitter,
                sample_ids=labeled_ids or None,
            )
            name = f"semf1-{config.backend.model_id}"
            sources_by_threshold[str(thresholds)] = {**human, name: machine}
    else:
        for thresholds in config.thresholds:
            sources_by_threshold[str(thresholds)] = dict(human)

    n_sources = len(next(iter(sources_by_threshold.values()), {}))
    if n_sources < 2:
        print("error: need at least two label sources", file=sys.stderr)
        return 1

    pairs = pipelines.run_agreement(sources_by_threshold)
    written = []
    if _maybe_json(config):
        path = config.output_dir / "agreement.json"
        reports.write_json(reports.agreement_report(pairs), path)
        written.append(path)
    if _maybe_csv(config):
        path = config.output_dir / "agreement.csv"
        reports.write_agreement_csv(pairs, path)
        written.append(path)
    shown = {f"{p.source_a}|{p.source_b}" for p in pairs}
    print(f"compared {len(shown)} source pairs over {len(sources_by_threshold)} thresholds")
    for path in written:
        print(f"wrote {path}")
    _log(config, f"pairs={len(pairs)}", started)
    return 0


def cmd_correlate(args) -> int:
    config = _config_from_args(args)
    started = time.monotonic()
    config.output_dir.mkdir(parents=True, exist_ok=True)
    split = load_dataset(config.dataset_path, config.split_name)
    matrix = pipelines.run_correlation(
        split.samples,
        config.systems,
        config.metric,
        config.backend,
        _cache_for(config),
        config.splitter,
    )
    written = []
    if _maybe_json(config):
        path = config.output_dir / f"correlate_{config.metric}.json"
        reports.write_json(reports.correlation_report(config.metric, matrix), path)
        written.append(path)
    if _maybe_csv(config):
        path = config.output_dir / f"correlate_{config.metric}.csv"
        reports.write_correlation_csv(matrix, path)
        written.append(path)
    print(f"{'pair':<14} {'r':>8} {'p':>10} {'significant':>12}")
    for cell in matrix.pairs:
        print(
            f"{cell.a + '|' + cell.b:<14} {cell.result.coefficient:>8.4f} "
            f"{cell.result.p_value:>10.4g} {str(cell.result.significant).lower():>12}"
        )
    print(f"average (max across systems): {matrix.average:.4f}")
    for path in written:
        print(f"wrote {path}")
    _log(config, f"metric={config.metric}", started)
    return 0


def cmd_baseline(args) -> int:
    config = _config_from_args(args)
    started = time.monotonic()
    config.output_dir.mkdir(parents=True, exist_ok=True)
    split = load_dataset(config.dataset_path, config.split_name)
    runs = pipelines.run_baselines(
        split.samples,
        config.systems,
        config.backend,
        config.seed,
        _cache_for(config),
        config.jobs,
        config.splitter,
    )
    written = []
    if _maybe_json(config):
        path = config.output_dir / "baseline.json"
        reports.write_json(
            reports.baseline_report(runs, config.seed, config.backend.model_id), path
        )
        written.append(path)
    if _maybe_csv(config):
        path = config.output_dir / "baseline.csv"
        reports.write_baseline_csv(runs, path)
        written.append(path)
    print(f"{'system':<16} {'rand-annot':>10} {'rand-ovlp':>10} {'actual':>10}")
    for run in runs:
        print(
            f"{run.system:<16} {run.random_annotation.f1:>10.4f} "
            f"{run.random_overlap.f1:>10.4f} {run.actual.f1:>10.4f}"
        )
    for path in written:
        print(f"wrote {path}")
    diagnosed = any(
        run.actual.diagnostics
        or run.random_overlap.diagnostics
        or run.random_annotation.diagnostics
        for run in runs
    )
    _log(config, f"seed={config.seed}", started)
    return 2 if diagnosed else 0


def cmd_stats(args) -> int:
    config = _config_from_args(args)
    started = time.monotonic()
    config.output_dir.mkdir(parents=True, exist_ok=True)
    split = load_dataset(config.dataset_path, config.split_name)
    stats = split_statistics(split, config.splitter)
    written = []
    if _maybe_json(config):
        path = config.output_dir / "dataset_stats.json"
        reports.write_json(stats, path)
        written.append(path)
    if _maybe_csv(config):
        path = config.output_dir / "dataset_stats.csv"
        reports.write_stats_csv(stats, path)
        written.append(path)
    print(
        f"split={stats['split']} n={stats['n_samples']} "
        f"words/docs={stats['words_per_doc_pair']:.2f} "
        f"sents/docs={stats['sents_per_doc_pair']:.2f}"
    )
    if stats["words_per_reference"]:
        print(
            "words/refs="
            + "/".join(f"{v:.2f}" for v in stats["words_per_reference"])
            + "  sents/refs="
            + "/".join(f"{v:.2f}" for v in stats["sents_per_reference"])
        )
    for path in written:
        print(f"wrote {path}")
    _log(config, f"n={stats['n_samples']}", started)
    return 0


def cmd_embed_cache(args) -> int:
    config = _config_from_args(args)
    started = time.monotonic()
    config.output_dir.mkdir(parents=True, exist_ok=True)
    split = load_dataset(config.dataset_path, config.split_name)
    texts = pipelines.collect_texts(split.samples, config.systems)
    split_fn = config.splitter.split if config.splitter else split_sentences
    sentences = []
    seen = set()
    for text in texts:
        for sentence in split_fn(text):
            if sentence.text not in seen:
                seen.add(sentence.text)
                sentences.append(sentence)
    store = EmbeddingCache(config.store_out)
    if sentences:
        embed_sentences(config.backend, sentences, store)
    print(f"froze {len(store)} embeddings to {config.store_out}")
    _log(config, f"entries={len(store)}", started)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OverlapEvalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
