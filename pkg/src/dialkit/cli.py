"""Command-line front end.

Each subcommand is a thin wrapper over one library call: files in, files
out, one JSON (or markdown) report on standard output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .authoring import (
    AUTHORING_DECODING,
    DecodingConfig,
    HttpChatClient,
    ReplayChatClient,
    context_template,
    dialogue_as_text,
    generate_batch,
    rewrite_template,
)
from .corpus import read_corpus, write_corpus
from .extract import ExtractionConfig, extract_corpus
from .lmeval import BigramScorer, SubprocessScorer, UniformScorer, eval_suite
from .metrics import detect_derailment, repetition_rate
from .model import MetricConfig
from .partition import stratified_split, write_splits
from .postedit import aggregate_postedit_stats, diff_corpora
from .stats import corpus_stats, productivity, read_timing_log


def _print_json(payload) -> None:
    print(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True))


def _cmd_extract(args) -> int:
    config = ExtractionConfig(min_window=args.min_window)
    dialogues, summary = extract_corpus(args.files, config)
    write_corpus(args.out, dialogues)
    _print_json(summary.as_dict())
    return 0


def _parse_decoding(spec: str) -> DecodingConfig:
    fields = {}
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        key, _, value = part.partition("=")
        if not value:
            raise SystemExit(f"bad decoding setting {part!r}; expected key=value")
        fields[key.strip()] = float(value)
    try:
        return DecodingConfig(**fields)
    except (TypeError, ValueError) as exc:
        raise SystemExit(f"bad decoding spec {spec!r}: {exc}") from exc


def _read_context_file(path: str) -> list[tuple[str, str]]:
    """JSONL of {"id", "text"} rows -> (id, payload) pairs."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                pairs.append((str(obj["id"]), str(obj["text"])))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise SystemExit(
                    f"{path}:{lineno}: expected JSON object with id and text "
                    f"({exc})"
                ) from exc
    return pairs


def _cmd_generate(args) -> int:
    if args.template == "rewrite":
        template = rewrite_template(args.lang)
        originals = read_corpus(args.contexts)
        ids = [d.id for d in originals]
        payloads = [dialogue_as_text(d) for d in originals]
    else:
        template = context_template(args.lang)
        rows = _read_context_file(args.contexts)
        ids = [cid for cid, _ in rows]
        payloads = [text for _, text in rows]
    decoding = (
        _parse_decoding(args.decoding) if args.decoding else AUTHORING_DECODING
    )
    if args.replay:
        client = ReplayChatClient.from_file(args.replay)
    else:
        url = os.environ.get("DIALKIT_CHAT_URL")
        if not url:
            raise SystemExit(
                "no chat endpoint: set DIALKIT_CHAT_URL or pass --replay FILE"
            )
        client = HttpChatClient(url, token=os.environ.get("DIALKIT_CHAT_TOKEN"))
    result = generate_batch(
        payloads,
        ids,
        template,
        decoding,
        client,
        max_concurrency=args.concurrency,
    )
    write_corpus(args.out, result.dialogues)
    _print_json(
        {
            "generated": len(result.dialogues),
            "rejected": [
                {"id": r.context_id, "reason": r.reason}
                for r in result.rejections
            ],
            "failed": [
                {"id": e.context_id, "message": e.message}
                for e in result.errors
            ],
        }
    )
    return 0 if not result.errors else 1


def _cmd_diff(args) -> int:
    originals = read_corpus(args.orig)
    postedited = read_corpus(args.post)
    records = diff_corpora(originals, postedited)
    with open(args.out, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.as_dict(), sort_keys=True) + "\n")
    aggregates = {
        key: agg.as_dict()
        for key, agg in aggregate_postedit_stats(records).items()
    }
    if args.report:
        Path(args.report).write_text(
            json.dumps(aggregates, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    _print_json(aggregates)
    return 0


def _cmd_rr(args) -> int:
    corpus = read_corpus(args.file)
    config = MetricConfig(rr_window=args.window)
    result = repetition_rate(corpus, config)
    orders = range(config.rr_ngram_min, config.rr_ngram_max + 1)
    _print_json(
        {
            "rr": result.value,
            "per_order": {str(n): v for n, v in zip(orders, result.per_order)},
            "windows": result.window_count,
            "tokens": result.token_count,
        }
    )
    return 0


def _cmd_derail(args) -> int:
    corpus = read_corpus(args.file)
    config = MetricConfig(derail_threshold=args.threshold)
    cuts = {}
    kept = []
    for d in corpus:
        cut = detect_derailment(d, config)
        if cut < len(d.turns):
            cuts[d.id] = cut
            kept.append(d.replace_turns(d.turns[:cut]))
        else:
            kept.append(d)
    if args.out:
        write_corpus(args.out, kept)
    _print_json(
        {
            "dialogues": len(corpus),
            "derailed": len(cuts),
            "cuts": cuts,
        }
    )
    return 0


def _cmd_stats(args) -> int:
    corpus = []
    for path in args.files:
        corpus.extend(read_corpus(path))
    report = corpus_stats(corpus)
    if args.format == "markdown":
        print(report.as_markdown())
    else:
        payload = report.as_dict()
        if args.timing:
            payload = {"corpus": payload}
            payload["productivity"] = productivity(read_timing_log(args.timing))
        _print_json(payload)
    return 0


def _cmd_split(args) -> int:
    ratios = tuple(float(r) for r in args.ratios.split(","))
    corpus = read_corpus(args.corpus)
    partition = stratified_split(corpus, ratios=ratios, seed=args.seed)
    manifest = write_splits(partition, corpus, args.out_dir)
    _print_json(manifest)
    return 0


def _build_scorer(spec: str, corpus):
    if spec == "uniform":
        vocab = sorted({t for d in corpus for turn in d.turns for t in turn.text.split()})
        return UniformScorer(vocab)
    if spec.startswith("bigram:"):
        train = read_corpus(spec.split(":", 1)[1])
        return BigramScorer.from_corpus(train)
    if spec.startswith("cmd:"):
        vocab = sorted({t for d in corpus for turn in d.turns for t in turn.text.split()})
        return SubprocessScorer(spec.split(":", 1)[1], vocab)
    raise SystemExit(
        f"unknown scorer {spec!r}; use uniform, bigram:FILE or cmd:\"...\""
    )


def _cmd_eval(args) -> int:
    corpus = read_corpus(args.corpus)
    scorer = _build_scorer(args.scorer, corpus)
    config = MetricConfig(
        acc_n=tuple(int(n) for n in args.acc.split(",")),
        truncation_fractions=tuple(float(f) for f in args.truncate.split(",")),
    )
    try:
        report = eval_suite(
            corpus, scorer, config, micro=args.micro, unk_token=args.unk
        )
    finally:
        if isinstance(scorer, SubprocessScorer):
            scorer.close()
    _print_json(report.as_dict())
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import CurationStore, create_app

    store = CurationStore(args.data)
    uvicorn.run(create_app(store), host=args.host, port=args.port)
    return 0


def _cmd_import(args) -> int:
    from .service import CurationStore

    store = CurationStore(args.data)
    count = store.import_dialogues(read_corpus(args.corpus))
    _print_json({"imported": count, "pending": len(store.list_tasks("pending"))})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dialkit",
        description="dialogue corpus curation and evaluation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="mine two-speaker excerpts from scripts")
    p.add_argument("files", nargs="+", metavar="FILE")
    p.add_argument("--min-window", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("generate", help="author dialogues through a chat model")
    p.add_argument("--template", choices=("context", "rewrite"), required=True)
    p.add_argument("--decoding", default=None, metavar="K=V,K=V")
    p.add_argument("--contexts", required=True, metavar="FILE")
    p.add_argument("--out", required=True, metavar="FILE")
    p.add_argument("--lang", default="it", choices=("it", "en"))
    p.add_argument("--replay", default=None, metavar="FILE")
    p.add_argument("--concurrency", type=int, default=1)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("diff", help="classify post-edits against originals")
    p.add_argument("--orig", required=True)
    p.add_argument("--post", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(func=_cmd_diff)

    p = sub.add_parser("rr", help="corpus repetition rate")
    p.add_argument("file", metavar="FILE")
    p.add_argument("--window", type=int, default=1000)
    p.set_defaults(func=_cmd_rr)

    p = sub.add_parser("derail", help="find where dialogues start repeating")
    p.add_argument("file", metavar="FILE")
    p.add_argument("--threshold", type=float, default=0.9)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_derail)

    p = sub.add_parser("stats", help="corpus size statistics per source")
    p.add_argument("files", nargs="+", metavar="FILE")
    p.add_argument("--group-by", default="source", choices=("source",))
    p.add_argument("--format", default="json", choices=("json", "markdown"))
    p.add_argument("--timing", default=None, metavar="FILE")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("split", help="deterministic stratified partition")
    p.add_argument("corpus", metavar="FILE")
    p.add_argument("--ratios", default="0.8,0.1,0.1")
    p.add_argument("--seed", type=int, default=13)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("eval", help="turn perplexity and rank accuracy")
    p.add_argument("corpus", metavar="FILE")
    p.add_argument("--scorer", required=True)
    p.add_argument("--acc", default="1,5,10")
    p.add_argument("--truncate", default="0.2,0.3")
    p.add_argument("--micro", action="store_true")
    p.add_argument("--unk", default=None, metavar="TOKEN")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("serve", help="run the curation service")
    p.add_argument("--data", required=True, metavar="DIR")
    p.add_argument("--port", type=int, default=8800)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("import", help="load a corpus as pending review tasks")
    p.add_argument("corpus", metavar="FILE")
    p.add_argument("--data", required=True, metavar="DIR")
    p.set_defaults(func=_cmd_import)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
