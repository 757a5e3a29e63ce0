"""Command-line entry point wiring config, corpus, providers and stores.

Subcommands: sample, run, score, refine, evaluate, serve, stats. Every
subcommand is re-runnable without corrupting the store; reports are
line-delimited JSON records mirroring the corpus format. The store root
from the config can be overridden with --store or the CAPQE_STORE
environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import PipelineConfig, parse_and_validate_config
from .errors import CapqeError, ChunkFailuresError
from .metrics import TOKENIZERS, evaluate_dataset
from .model import (
    CaptionStatus,
    canonical_json,
    load_corpus,
    record_to_line,
    records_from_bytes,
    records_to_bytes,
)
from .pipeline import load_published_records, run as run_pipeline, score_batch
from .providers import build_provider_set
from .refinement import refine_flagged
from .sampling import stratified_sample
from .store import FilesystemStore

STORE_ENV = "CAPQE_STORE"
REFINED_FILENAME = "refined.records"


def _store_root(config: PipelineConfig, override: str | None) -> Path:
    root = override or os.environ.get(STORE_ENV) or config.store
    if not root:
        raise CapqeError("no store root: set it in the config, via --store, or CAPQE_STORE")
    return Path(root)


def _corpus_path(config: PipelineConfig, override: str | None) -> Path:
    path = override or config.corpus
    if not path:
        raise CapqeError("no corpus path: set it in the config or via --corpus")
    return Path(path)


def _write_report_lines(path: str | None, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_sample(args: argparse.Namespace) -> int:
    config = parse_and_validate_config(args.config)
    corpus = load_corpus(_corpus_path(config, args.corpus))
    fraction = args.fraction if args.fraction is not None else config.sample.fraction
    seed = args.seed if args.seed is not None else config.sample.seed
    subset, report = stratified_sample(corpus, fraction, seed)
    lines = [canonical_json({"label": s.label, **{k: v for k, v in vars(s).items() if k != "label"}})
             for s in report.per_label]
    lines.append(
        canonical_json(
            {
                "subset_size": len(subset),
                "max_abs_deviation": report.max_abs_deviation,
                "total_variation_distance": report.total_variation_distance,
            }
        )
    )
    _write_report_lines(args.report_out, lines)
    if args.subset_out:
        Path(args.subset_out).write_text(
            "\n".join(str(i) for i in sorted(subset)) + "\n", encoding="utf-8"
        )
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    config = parse_and_validate_config(args.config)
    corpus = load_corpus(_corpus_path(config, args.corpus))
    store = FilesystemStore(_store_root(config, args.store))
    providers = build_provider_set(config.providers)
    chunk_size = args.chunk_size or config.chunk_size
    workers = args.workers or config.workers
    try:
        manifest = run_pipeline(
            corpus,
            providers,
            store,
            config.qe,
            config.config_hash,
            chunk_size=chunk_size,
            workers=workers,
        )
    except ChunkFailuresError as exc:
        sys.stderr.write(f"error: {exc}\n")
        for chunk, cause in zip(exc.failed_ranges, exc.causes):
            sys.stderr.write(f"  failed range [{chunk.start},{chunk.end}): {cause}\n")
        sys.stderr.write("published chunks are intact; rerun to retry the failed ranges\n")
        return 1
    print(
        f"published {len(manifest.chunks)} chunks covering {manifest.total_records} captions "
        f"(config {manifest.pipeline_config_hash})"
    )
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    """Recompute QE for a records file from its (source, translation) pairs."""
    from .model import CaptionRecord

    config = parse_and_validate_config(args.config)
    corpus = load_corpus(_corpus_path(config, args.corpus))
    providers = build_provider_set(config.providers)
    records = records_from_bytes(Path(args.infile).read_bytes())
    missing = [r.caption_id for r in records if r.translated_text is None]
    if missing:
        raise CapqeError(f"records without translated_text cannot be scored: {missing}")
    translated = [r.translated_text for r in records]
    fresh = [
        CaptionRecord(
            caption_id=r.caption_id, image_id=r.image_id, source_text=r.source_text
        ).evolve(CaptionStatus.TRANSLATED, translated_text=r.translated_text)
        for r in records
    ]
    scored = score_batch(fresh, translated, corpus, providers, config.qe)
    Path(args.out).write_bytes(records_to_bytes(scored))
    print(f"scored {len(scored)} records -> {args.out}")
    return 0


def cmd_refine(args: argparse.Namespace) -> int:
    config = parse_and_validate_config(args.config)
    corpus = load_corpus(_corpus_path(config, args.corpus))
    store = FilesystemStore(_store_root(config, args.store))
    providers = build_provider_set(config.providers)
    records = load_published_records(store)
    image_refs = {im.image_id: im.file_ref for im in corpus.images}
    updated, report = refine_flagged(records, config.refinement, providers, config.qe, image_refs)
    out_path = store.root / REFINED_FILENAME
    out_path.write_bytes(records_to_bytes(updated))
    lines = [canonical_json(report.to_dict())]
    _write_report_lines(args.report_out, lines)
    print(
        f"refined {report.n_flagged} flagged captions: "
        f"{report.n_accepted_first_retry + report.n_auto_refined} auto-accepted, "
        f"{report.n_manual_routed} routed to manual review -> {out_path}"
    )
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    report = evaluate_dataset(args.hyp, args.ref, tokenizer=args.tokenizer)
    line = canonical_json(report.to_dict())
    _write_report_lines(args.out, [line])
    if args.out:
        print(line)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .review import FileRecordRepository, ReviewService
    from .server import create_app

    config = parse_and_validate_config(args.config)
    corpus = load_corpus(_corpus_path(config, args.corpus))
    store = FilesystemStore(_store_root(config, args.store))
    records_path = store.root / REFINED_FILENAME
    if not records_path.exists():
        records_path.write_bytes(records_to_bytes(load_published_records(store)))
    repository = FileRecordRepository(records_path)
    providers = build_provider_set(config.providers)
    image_refs = {im.image_id: im.file_ref for im in corpus.images}
    service = ReviewService(repository, providers, config.qe, image_refs)
    ui_dir = args.ui_dir
    if ui_dir is None and Path("frontend/dist").is_dir():
        ui_dir = "frontend/dist"
    app = create_app(service, ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    config = parse_and_validate_config(args.config)
    store = FilesystemStore(_store_root(config, args.store))
    refined = store.root / REFINED_FILENAME
    if refined.exists():
        records = records_from_bytes(refined.read_bytes())
    else:
        records = load_published_records(store)
    counts = {status.value: 0 for status in CaptionStatus}
    for record in records:
        counts[record.status.value] += 1
    print(canonical_json({"counts": counts, "total": len(records)}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="capqe")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="stratified subset selection")
    p.add_argument("--config", required=True)
    p.add_argument("--corpus")
    p.add_argument("--fraction", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--report-out")
    p.add_argument("--subset-out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("run", help="translate and score the corpus in chunks")
    p.add_argument("--config", required=True)
    p.add_argument("--corpus")
    p.add_argument("--store")
    p.add_argument("--chunk-size", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument(
        "--resume",
        action="store_true",
        help="skip already-published chunks (always on; flag is documentary)",
    )
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("score", help="batch-score a chunk records file")
    p.add_argument("--config", required=True)
    p.add_argument("--corpus")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("refine", help="iteratively refine flagged captions")
    p.add_argument("--config", required=True)
    p.add_argument("--corpus")
    p.add_argument("--store")
    p.add_argument("--report-out")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("evaluate", help="reference-based metrics over aligned files")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--tokenizer", choices=sorted(TOKENIZERS), default="standard")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("serve", help="start the manual-review service")
    p.add_argument("--config", required=True)
    p.add_argument("--corpus")
    p.add_argument("--store")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui-dir", help="directory of built UI assets to serve")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("stats", help="record counts by status")
    p.add_argument("--config", required=True)
    p.add_argument("--store")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapqeError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
