"""Command-line entry point for the full pipeline.

Subcommands: ingest, align, dedup, augment, split, stats, pseudo-teacher,
train, eval, index, query, case-study. Flags mirror config field names.
Exit codes: 0 success, 1 usage error (unknown subcommand/flag, malformed
flag value), 2 data error (unreadable/invalid files, contract violations).
Diagnostics go to stderr; results go to files or stdout as JSON/tables with
deterministic ordering.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import corpus, evaluation, index as index_mod, teacher, trainer
from .encoder import EncoderConfig, encode, encode_batch, init_student, load_model, save_model
from .errors import IntertextError


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _emit(payload, out_path: str | None = None) -> None:
    text = json.dumps(payload, ensure_ascii=False, sort_keys=True)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _write_text(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands

def cmd_ingest(args) -> int:
    pairs = corpus.parse_pairs_jsonl(args.in_path)
    corpus.write_pairs_jsonl(pairs, args.out)
    _emit({"pairs": len(pairs)})
    return 0


def cmd_align(args) -> int:
    src = corpus.parse_cited_jsonl(args.src)
    tgt = corpus.parse_cited_jsonl(args.tgt)
    aligned, discarded = corpus.align_lines(
        src, tgt, args.lang_src, args.lang_tgt, args.source_corpus,
    )
    corpus.write_pairs_jsonl(aligned, args.out)
    _emit({"aligned": len(aligned), "discarded": discarded})
    return 0


def cmd_dedup(args) -> int:
    pairs = corpus.parse_pairs_jsonl(args.in_path)
    kept = corpus.deduplicate(pairs)
    corpus.write_pairs_jsonl(kept, args.out)
    _emit({"kept": len(kept), "removed": len(pairs) - len(kept)})
    return 0


def cmd_augment(args) -> int:
    base = corpus.parse_pairs_jsonl(args.pairs)
    translations = dict(teacher.read_sentences_jsonl(args.translations))
    merged = corpus.merge_augmented(base, translations)
    corpus.write_pairs_jsonl(merged, args.out)
    _emit({"pairs": len(merged), "added": len(merged) - len(base)})
    return 0


def cmd_split(args) -> int:
    pairs = corpus.parse_pairs_jsonl(args.in_path)
    spec = corpus.SplitSpec(seed=args.seed, n_test=args.test, n_val=args.val)
    train_part, val_part, test_part = corpus.split(pairs, spec)
    corpus.write_pairs_jsonl(train_part, args.out_train)
    corpus.write_pairs_jsonl(val_part, args.out_val)
    corpus.write_pairs_jsonl(test_part, args.out_test)
    _emit({"train": len(train_part), "val": len(val_part), "test": len(test_part)})
    return 0


def cmd_stats(args) -> int:
    pairs = corpus.parse_pairs_jsonl(args.in_path)
    _emit(corpus.stats(pairs), args.out)
    return 0


def cmd_pseudo_teacher(args) -> int:
    if args.pairs:
        pair_records = corpus.parse_pairs_jsonl(args.pairs)
        sentences = [(f"{p.id}:src", p.text_src) for p in pair_records]
    else:
        sentences = teacher.read_sentences_jsonl(args.sentences)
    store = teacher.pseudo_store(sentences, args.dim, args.seed)
    teacher.save_store(store, args.out)
    _emit({"count": len(store), "dim": store.dim})
    return 0


def cmd_train(args) -> int:
    store = teacher.load_store(args.teacher)
    train_pairs = corpus.parse_pairs_jsonl(args.train)
    val_pairs = corpus.parse_pairs_jsonl(args.val) if args.val else []
    enc_config = EncoderConfig(
        ngram_min=args.ngram_min,
        ngram_max=args.ngram_max,
        buckets=args.buckets,
        hidden_dim=args.hidden_dim,
        out_dim=store.dim,
        hash_seed=args.hash_seed,
    )
    train_config = trainer.TrainingConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        warmup_steps=args.warmup_steps,
        weight_decay=args.weight_decay,
        seed=args.seed,
        val_pairs_per_language_pair=args.val_pairs_per_language_pair,
    )
    model = init_student(enc_config, args.seed)
    if args.save_init:
        save_model(model, args.save_init)
    best, history = trainer.train(
        model, train_pairs, val_pairs, store, train_config,
        checkpoint_dir=args.checkpoint_dir, history_path=args.history,
    )
    save_model(best, args.out)
    best_epoch = trainer.select_best(history)
    record = history.epochs[best_epoch]
    _emit({
        "epochs": len(history.epochs),
        "best_epoch": best_epoch,
        "best_val_acc": record.val_acc,
        "final_train_loss": history.epochs[-1].train_loss,
    })
    return 0


def cmd_eval(args) -> int:
    model = load_model(args.model)
    pairs = corpus.parse_pairs_jsonl(args.test)
    report = evaluation.evaluate_model(model, pairs, args.direction or None, args.dataset)
    if args.format == "json":
        _write_text(evaluation.report_to_json(report) + "\n", args.out)
    else:
        _write_text(evaluation.render_report(report, args.format), args.out)
    return 0


def cmd_index(args) -> int:
    if args.store:
        store = teacher.load_store(args.store)
        built = index_mod.build(store.ids, store.vectors)
    else:
        model = load_model(args.model)
        lines = corpus.parse_cited_jsonl(args.texts)
        vectors = encode_batch(model, [line.text for line in lines])
        built = index_mod.build([line.citation_key for line in lines], vectors)
    index_mod.save_index(built, args.out)
    _emit({"count": len(built), "dim": built.dim})
    return 0


def cmd_query(args) -> int:
    built = index_mod.load_index(args.index)
    model = load_model(args.model)
    vector = encode(model, corpus.nfc(args.text))
    hits = index_mod.top_k(built, vector, args.k)
    _emit([{"id": h.id, "score": h.score, "rank": h.rank} for h in hits], args.out)
    return 0


def cmd_case_study(args) -> int:
    model = load_model(args.model)
    queries = corpus.parse_cited_jsonl(args.queries)
    targets = corpus.parse_cited_jsonl(args.targets)
    vectors = encode_batch(model, [line.text for line in targets])
    built = index_mod.build([line.citation_key for line in targets], vectors)
    texts = {line.citation_key: line.text for line in targets}
    rows = evaluation.run_case_study(queries, built, texts, model, args.k)
    if args.format == "json":
        _write_text(evaluation.case_study_to_json(rows) + "\n", args.out)
    else:
        _write_text(evaluation.render_case_study(rows, args.format), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser

def _add_seed(p, default=0):
    p.add_argument("--seed", type=int, default=default)


def build_parser() -> _Parser:
    parser = _Parser(prog="intertext", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="validate and canonicalize a pair file")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("align", help="pair two cited-line documents by citation key")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--lang-src", required=True, choices=corpus.LANGUAGES)
    p.add_argument("--lang-tgt", required=True, choices=corpus.LANGUAGES)
    p.add_argument("--source-corpus", default="other", choices=corpus.SOURCE_CORPORA)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("dedup", help="drop near-duplicate pairs, keeping first occurrences")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dedup)

    p = sub.add_parser("augment", help="add synthetic-translation pairs to an en-la corpus")
    p.add_argument("--pairs", required=True)
    p.add_argument("--translations", required=True,
                   help="JSONL of {id, text}: Greek renderings keyed by base pair id")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("split", help="seeded train/val/test partition")
    p.add_argument("--in", dest="in_path", required=True)
    _add_seed(p)
    p.add_argument("--test", type=int, required=True)
    p.add_argument("--val", type=int, required=True)
    p.add_argument("--out-train", required=True)
    p.add_argument("--out-val", required=True)
    p.add_argument("--out-test", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("stats", help="per-language word counts")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("pseudo-teacher", help="build a deterministic hash-derived embedding store")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--sentences", help="JSONL of {id, text}")
    group.add_argument("--pairs", help="pair JSONL; embeds text_src under id '<id>:src'")
    p.add_argument("--dim", type=int, default=768)
    _add_seed(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pseudo_teacher)

    p = sub.add_parser("train", help="distill the teacher store into a student encoder")
    p.add_argument("--train", required=True)
    p.add_argument("--val")
    p.add_argument("--teacher", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--save-init", help="write the untrained initial model here")
    p.add_argument("--checkpoint-dir")
    p.add_argument("--history", help="write per-epoch JSONL records here")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=2e-5)
    p.add_argument("--warmup-steps", type=int, default=10000)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--val-pairs-per-language-pair", type=int, default=1000)
    _add_seed(p)
    p.add_argument("--ngram-min", type=int, default=3)
    p.add_argument("--ngram-max", type=int, default=5)
    p.add_argument("--buckets", type=int, default=2 ** 18)
    p.add_argument("--hidden-dim", type=int, default=256)
    p.add_argument("--hash-seed", type=int, default=0x5EED)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="translation-retrieval accuracy of a model on a test set")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--direction", action="append",
                   help="e.g. 'en->la'; repeatable; default: both directions")
    p.add_argument("--format", choices=("json", "tsv", "markdown"), default="json")
    p.add_argument("--dataset", default="test")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("index", help="build an exact-cosine index from a store or from texts")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--store", help="SEMB store file to index directly")
    group.add_argument("--texts", help="cited-line JSONL to embed with --model")
    p.add_argument("--model", help="student checkpoint (required with --texts)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("query", help="top-k search for one text")
    p.add_argument("--index", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("-k", type=int, default=3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("case-study", help="per-verse top-k retrieval against a target document")
    p.add_argument("--model", required=True)
    p.add_argument("--queries", required=True, help="cited-line JSONL of query verses")
    p.add_argument("--targets", required=True, help="cited-line JSONL of the target corpus")
    p.add_argument("-k", type=int, default=3)
    p.add_argument("--format", choices=("json", "tsv", "markdown"), default="markdown")
    p.add_argument("--out")
    p.set_defaults(func=cmd_case_study)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 1
    if args.command == "index" and args.texts and not args.model:
        parser.print_usage(sys.stderr)
        print("intertext: error: --texts requires --model", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (IntertextError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> int:
    return run()
