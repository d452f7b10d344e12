"""Command-line entry point.

Subcommands: ingest, align, stats, eval (iou|prf|rouge), encode, serve,
export. Usage problems (unknown flags, missing files, out-of-range
thresholds) exit nonzero with a message on stderr.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import evalsuite, modelio, silveralign, textproc
from .eventlog import EventLog, replay
from .textproc import Lexicon


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="textreduce")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="build a corpus file from raw pairs")
    p_ingest.add_argument("path")
    p_ingest.add_argument("--format", choices=corpus_mod.INGEST_FORMATS, default="pair-lines")
    p_ingest.add_argument("--out", required=True)
    p_ingest.add_argument("--stopwords", help="override the stopword list file")
    p_ingest.add_argument("--lemma-exceptions", help="override the irregular-lemma file")
    p_ingest.set_defaults(func=cmd_ingest)

    p_align = sub.add_parser("align", help="emit silver alignments for a corpus")
    p_align.add_argument("corpus")
    p_align.add_argument("--backend", choices=("lexical", "external"), default="lexical")
    p_align.add_argument("--threshold", type=float, default=silveralign.DEFAULT_ALIGN_THRESHOLD)
    p_align.add_argument("--out", required=True)
    p_align.add_argument(
        "--endpoint", default=os.environ.get("TEXTREDUCE_ALIGNER_ENDPOINT")
    )
    p_align.add_argument("--timeout", type=float, default=10.0)
    p_align.add_argument("--retries", type=int, default=2)
    p_align.add_argument("--workers", type=int, default=1)
    p_align.set_defaults(func=cmd_align)

    p_stats = sub.add_parser("stats", help="corpus statistics table")
    p_stats.add_argument("corpus")
    p_stats.add_argument("--json", action="store_true")
    p_stats.set_defaults(func=cmd_stats)

    p_eval = sub.add_parser("eval", help="agreement, P/R/F1, and ROUGE reports")
    eval_sub = p_eval.add_subparsers(dest="metric", required=True)

    p_iou = eval_sub.add_parser("iou", help="token IoU between two annotated corpora")
    p_iou.add_argument("corpus_a")
    p_iou.add_argument("corpus_b")
    p_iou.add_argument("--json", action="store_true")
    p_iou.set_defaults(func=cmd_eval_iou)

    p_prf = eval_sub.add_parser("prf", help="highlight P/R/F1 of predicted vs gold")
    p_prf.add_argument("predicted")
    p_prf.add_argument("gold")
    p_prf.add_argument("--json", action="store_true")
    p_prf.set_defaults(func=cmd_eval_prf)

    p_rouge = eval_sub.add_parser("rouge", help="content preservation of generated text")
    p_rouge.add_argument("--corpus", required=True)
    p_rouge.add_argument(
        "--generated", required=True, help="JSON lines: {pair_id, text}"
    )
    p_rouge.add_argument(
        "--against", choices=("highlights", "summary"), default="highlights"
    )
    p_rouge.add_argument("--json", action="store_true")
    p_rouge.set_defaults(func=cmd_eval_rouge)

    p_encode = sub.add_parser("encode", help="emit model-input records")
    p_encode.add_argument("corpus")
    p_encode.add_argument("--mode", choices=("markers", "concat"), default="markers")
    p_encode.add_argument("--max-len", type=int, default=modelio.DEFAULT_MAX_LEN)
    p_encode.add_argument("--out", required=True)
    p_encode.set_defaults(func=cmd_encode)

    p_serve = sub.add_parser("serve", help="start the annotation service")
    p_serve.add_argument(
        "--port", type=int, default=int(os.environ.get("TEXTREDUCE_PORT", "8000"))
    )
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument(
        "--data", default=os.environ.get("TEXTREDUCE_DATA"), help="corpus file"
    )
    p_serve.add_argument("--log-dir", required=True)
    p_serve.add_argument("--static-dir")
    p_serve.add_argument("--single-annotator", action="store_true")
    p_serve.set_defaults(func=cmd_serve)

    p_export = sub.add_parser(
        "export", help="compact annotation event logs into a corpus file"
    )
    p_export.add_argument("corpus")
    p_export.add_argument("--log-dir", required=True)
    p_export.add_argument("--out", required=True)
    p_export.set_defaults(func=cmd_export)

    return parser


def _require_file(parser_error, path: str) -> Path:
    p = Path(path)
    if not p.exists():
        parser_error(f"no such file: {path}")
    return p


def cmd_ingest(args, parser) -> int:
    _require_file(parser.error, args.path)
    lexicon = None
    if args.stopwords or args.lemma_exceptions:
        lexicon = Lexicon.load(args.stopwords, args.lemma_exceptions)
    pairs = corpus_mod.ingest(args.path, format=args.format, lexicon=lexicon)
    corpus_mod.save(pairs, args.out)
    print(f"ingested {len(pairs)} pairs -> {args.out}", file=sys.stderr)
    return 0


def cmd_align(args, parser) -> int:
    _require_file(parser.error, args.corpus)
    if not 0.0 <= args.threshold <= 1.0:
        parser.error(f"--threshold must be within [0, 1], got {args.threshold}")
    client = None
    if args.backend == "external":
        if not args.endpoint:
            parser.error("--endpoint (or TEXTREDUCE_ALIGNER_ENDPOINT) is required "
                         "for the external backend")
        client = silveralign.ExternalAligner(
            silveralign.AlignerConfig(
                endpoint=args.endpoint, timeout=args.timeout, retries=args.retries
            )
        )
    pairs = corpus_mod.load(args.corpus)
    results = silveralign.align_corpus(
        pairs, backend=args.backend, threshold=args.threshold,
        client=client, workers=args.workers,
    )
    out_pairs = []
    uncovered = []
    for pair, result in zip(pairs, results):
        out_pairs.append(
            dataclasses.replace(
                pair, alignments=result.alignments, provenance="silver"
            )
        )
        if result.uncovered:
            uncovered.append(pair.id)
    corpus_mod.save(out_pairs, args.out)
    for pair_id in uncovered:
        print(f"warning: pair {pair_id} uncovered at threshold {args.threshold}",
              file=sys.stderr)
    print(f"aligned {len(out_pairs)} pairs ({len(uncovered)} uncovered) -> {args.out}",
          file=sys.stderr)
    return 0


def cmd_stats(args, parser) -> int:
    _require_file(parser.error, args.corpus)
    report = evalsuite.dataset_stats(corpus_mod.load(args.corpus))
    if args.json:
        print(json.dumps(dataclasses.asdict(report), indent=2))
    else:
        print(evalsuite.format_stats_table(report))
    return 0


def cmd_eval_iou(args, parser) -> int:
    _require_file(parser.error, args.corpus_a)
    _require_file(parser.error, args.corpus_b)
    report = evalsuite.corpus_iou(
        corpus_mod.load(args.corpus_a), corpus_mod.load(args.corpus_b)
    )
    if args.json:
        print(json.dumps(dataclasses.asdict(report), indent=2))
    else:
        print(evalsuite.format_iou_table(report))
    return 0


def cmd_eval_prf(args, parser) -> int:
    _require_file(parser.error, args.predicted)
    _require_file(parser.error, args.gold)
    predicted = corpus_mod.load(args.predicted)
    gold = {p.id: p for p in corpus_mod.load(args.gold)}
    items = []
    for pair in predicted:
        if pair.id not in gold:
            parser.error(f"pair {pair.id} missing from gold corpus")
        pred_set = (
            corpus_mod.highlights_of(pair)
            if pair.alignments
            else corpus_mod.HighlightSet(pair_id=pair.id)
        )
        gold_pair = gold[pair.id]
        gold_set = (
            corpus_mod.highlights_of(gold_pair)
            if gold_pair.alignments
            else corpus_mod.HighlightSet(pair_id=pair.id)
        )
        items.append((pair, pred_set, gold_set))
    report = evalsuite.highlight_prf(items)
    if args.json:
        print(json.dumps(dataclasses.asdict(report), indent=2))
    else:
        print(evalsuite.format_prf_table(report))
    return 0


def cmd_eval_rouge(args, parser) -> int:
    _require_file(parser.error, args.corpus)
    _require_file(parser.error, args.generated)
    pairs = {p.id: p for p in corpus_mod.load(args.corpus)}
    reports: list[tuple[str, evalsuite.RougeReport]] = []
    with open(args.generated, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            pair = pairs.get(record.get("pair_id"))
            if pair is None:
                parser.error(f"{args.generated} line {lineno}: unknown pair_id")
            if args.against == "highlights":
                report = evalsuite.content_preservation(
                    record["text"], pair, corpus_mod.highlights_of(pair)
                )
            else:
                candidate = [t.surface for t in textproc.tokenize(record["text"])]
                reference = [t.surface for t in pair.summary.tokens]
                cand = evalsuite.normalize_tokens(candidate)
                ref = evalsuite.normalize_tokens(reference)
                report = evalsuite.RougeReport(
                    r1=evalsuite.rouge_n(cand, ref, 1),
                    r2=evalsuite.rouge_n(cand, ref, 2),
                    rl=evalsuite.rouge_l(cand, ref),
                )
            reports.append((pair.id, report))
    if args.json:
        aggregate = {
            metric: (
                sum(getattr(rep, metric).f for _, rep in reports) / len(reports)
                if reports
                else 0.0
            )
            for metric in ("r1", "r2", "rl")
        }
        print(
            json.dumps(
                {
                    "pairs": [
                        {"pair_id": pid, **dataclasses.asdict(rep)}
                        for pid, rep in reports
                    ],
                    "mean_f": aggregate,
                },
                indent=2,
            )
        )
    else:
        print(evalsuite.format_rouge_table(reports))
    return 0


def cmd_encode(args, parser) -> int:
    _require_file(parser.error, args.corpus)
    if args.max_len < 1:
        parser.error(f"--max-len must be positive, got {args.max_len}")
    pairs = corpus_mod.load(args.corpus)
    summary = modelio.export_records(
        pairs, args.out, mode=args.mode, max_len=args.max_len
    )
    print(
        f"encoded {summary['written']} pairs ({summary['skipped']} skipped, "
        f"{summary['dropped_spans']} spans dropped) -> {args.out}",
        file=sys.stderr,
    )
    return 0


def cmd_serve(args, parser) -> int:
    if not args.data:
        parser.error("--data (or TEXTREDUCE_DATA) is required")
    _require_file(parser.error, args.data)
    import uvicorn

    from .server import create_app

    app = create_app(
        args.data,
        log_dir=args.log_dir,
        static_dir=args.static_dir,
        single_annotator=args.single_annotator,
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def cmd_export(args, parser) -> int:
    _require_file(parser.error, args.corpus)
    pairs = corpus_mod.load(args.corpus)
    log = EventLog(args.log_dir)
    out_pairs = []
    for pair in pairs:
        state = replay(log.events(pair.id), pair)
        alignments = tuple(saved.alignment for saved in state.live)
        out_pairs.append(
            dataclasses.replace(pair, alignments=alignments, provenance="manual")
        )
    corpus_mod.save(out_pairs, args.out)
    annotated = sum(1 for p in out_pairs if p.alignments)
    print(f"exported {len(out_pairs)} pairs ({annotated} annotated) -> {args.out}",
          file=sys.stderr)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except (corpus_mod.CorpusFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
