"""Documented end-to-end synthetic pipeline, driven through the CLI layer.

Generates a seeded trilingual corpus, then runs every stage with the same
code paths the command line uses: align -> ingest -> dedup -> split ->
augment -> pseudo-teacher -> train -> eval -> index -> query -> case-study.
Identical parameters and seed produce byte-identical artifacts.

Two inline data transformations happen here rather than in a subcommand:
per-split filtering of the Greek translation file (augmentation rejects
translation ids that have no base pair), and selection of English-source
pairs for training (the teacher embeds source sentences, and English is the
teacher's language; target-side text never needs a teacher vector).
"""

from __future__ import annotations

import argparse
import json
import os
from dataclasses import dataclass

from . import corpus, synthdata
from .cli import run as cli_run


@dataclass
class PipelineParams:
    out_dir: str
    seed: int = 7
    sentences: int = 3000
    vocab: int = 48
    seq_len: int = 6
    test: int = 200
    val: int = 200
    dim: int = 64
    epochs: int = 5
    batch_size: int = 32
    lr: float = 5e-4
    warmup_steps: int = 100
    buckets: int = 2 ** 16
    hidden_dim: int = 64
    k: int = 3


def _cli(*args: str) -> None:
    argv = [str(a) for a in args]
    code = cli_run(argv)
    if code != 0:
        raise RuntimeError(f"pipeline step failed (exit {code}): intertext {' '.join(argv)}")


def _write_translations(path: str, ids: set[str], grc_by_id: dict[str, str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for id_ in sorted(ids & set(grc_by_id)):
            fh.write(json.dumps({"id": id_, "text": grc_by_id[id_]},
                               ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def run_pipeline(params: PipelineParams) -> dict[str, str]:
    """Run every stage; returns a name -> path map of the artifacts."""
    out = params.out_dir
    os.makedirs(out, exist_ok=True)
    path = lambda name: os.path.join(out, name)

    spec = synthdata.SynthSpec(seed=params.seed, n_sentences=params.sentences,
                               vocab=params.vocab, seq_len=params.seq_len)
    en_doc, la_doc, grc_doc = synthdata.make_corpus(spec)
    corpus.write_cited_jsonl(en_doc, path("en.jsonl"))
    corpus.write_cited_jsonl(la_doc, path("la.jsonl"))
    corpus.write_cited_jsonl(grc_doc, path("grc.jsonl"))
    grc_by_id = {f"synthetic:{line.citation_key}": line.text for line in grc_doc}

    _cli("align", "--src", path("en.jsonl"), "--tgt", path("la.jsonl"),
         "--lang-src", "en", "--lang-tgt", "la", "--source-corpus", "synthetic",
         "--out", path("aligned.jsonl"))
    _cli("ingest", "--in", path("aligned.jsonl"), "--out", path("pairs.jsonl"))
    _cli("dedup", "--in", path("pairs.jsonl"), "--out", path("dedup.jsonl"))
    _cli("stats", "--in", path("dedup.jsonl"), "--out", path("stats.json"))
    _cli("split", "--in", path("dedup.jsonl"), "--seed", params.seed,
         "--test", params.test, "--val", params.val,
         "--out-train", path("train_base.jsonl"),
         "--out-val", path("val_base.jsonl"),
         "--out-test", path("test_base.jsonl"))

    for part in ("train", "val", "test"):
        base = corpus.parse_pairs_jsonl(path(f"{part}_base.jsonl"))
        _write_translations(path(f"{part}_grc.jsonl"), {p.id for p in base}, grc_by_id)
        _cli("augment", "--pairs", path(f"{part}_base.jsonl"),
             "--translations", path(f"{part}_grc.jsonl"),
             "--out", path(f"{part}_aug.jsonl"))

    # training and validation use English-source pairs only
    for part in ("train", "val"):
        merged = corpus.parse_pairs_jsonl(path(f"{part}_aug.jsonl"))
        corpus.write_pairs_jsonl([p for p in merged if p.lang_src == "en"],
                                 path(f"{part}_en.jsonl"))
    test_aug = corpus.parse_pairs_jsonl(path("test_aug.jsonl"))
    corpus.write_pairs_jsonl(
        [p for p in test_aug if (p.lang_src, p.lang_tgt) == ("en", "la")],
        path("test_en_la.jsonl"))
    corpus.write_pairs_jsonl(
        [p for p in test_aug if (p.lang_src, p.lang_tgt) == ("en", "grc")],
        path("test_en_grc.jsonl"))

    _cli("pseudo-teacher", "--pairs", path("train_en.jsonl"),
         "--dim", params.dim, "--seed", params.seed, "--out", path("teacher.semb"))
    _cli("train", "--train", path("train_en.jsonl"), "--val", path("val_en.jsonl"),
         "--teacher", path("teacher.semb"), "--out", path("model.smdl"),
         "--save-init", path("init.smdl"), "--history", path("history.jsonl"),
         "--epochs", params.epochs, "--batch-size", params.batch_size,
         "--lr", params.lr, "--warmup-steps", params.warmup_steps,
         "--seed", params.seed, "--buckets", params.buckets,
         "--hidden-dim", params.hidden_dim)

    for model_name, model_path in (("model", path("model.smdl")), ("init", path("init.smdl"))):
        for pair_name in ("en_la", "en_grc"):
            _cli("eval", "--model", model_path, "--test", path(f"test_{pair_name}.jsonl"),
                 "--format", "json", "--dataset", f"synthetic-{pair_name}",
                 "--out", path(f"report_{model_name}_{pair_name}.json"))
    _cli("eval", "--model", path("model.smdl"), "--test", path("test_en_la.jsonl"),
         "--format", "tsv", "--dataset", "synthetic-en_la",
         "--out", path("report_model_en_la.tsv"))

    _cli("index", "--model", path("model.smdl"), "--texts", path("grc.jsonl"),
         "--out", path("grc.idx"))
    test_en_la = corpus.parse_pairs_jsonl(path("test_en_la.jsonl"))
    _cli("query", "--index", path("grc.idx"), "--model", path("model.smdl"),
         "--text", test_en_la[0].text_tgt, "-k", params.k, "--out", path("query.json"))

    queries = [
        corpus.CitedLine(p.id.split(":", 1)[1], p.text_tgt) for p in test_en_la[:5]
    ]
    corpus.write_cited_jsonl(queries, path("queries.jsonl"))
    _cli("case-study", "--model", path("model.smdl"), "--queries", path("queries.jsonl"),
         "--targets", path("grc.jsonl"), "-k", params.k,
         "--format", "markdown", "--out", path("case_study.md"))

    return {
        "model": path("model.smdl"),
        "init": path("init.smdl"),
        "teacher": path("teacher.semb"),
        "history": path("history.jsonl"),
        "report_model_en_la": path("report_model_en_la.json"),
        "report_model_en_grc": path("report_model_en_grc.json"),
        "report_init_en_la": path("report_init_en_la.json"),
        "report_init_en_grc": path("report_init_en_grc.json"),
        "index": path("grc.idx"),
        "query": path("query.json"),
        "case_study": path("case_study.md"),
        "stats": path("stats.json"),
    }


def main() -> int:
    parser = argparse.ArgumentParser(
        description="Run the full synthetic distillation pipeline end to end.")
    parser.add_argument("--out-dir", required=True)
    defaults = PipelineParams(out_dir="")
    for name in ("seed", "sentences", "vocab", "seq_len", "test", "val", "dim",
                 "epochs", "batch_size", "warmup_steps", "buckets", "hidden_dim", "k"):
        parser.add_argument(f"--{name.replace('_', '-')}", type=int,
                            default=getattr(defaults, name))
    parser.add_argument("--lr", type=float, default=defaults.lr)
    args = parser.parse_args()
    params = PipelineParams(
        out_dir=args.out_dir, seed=args.seed, sentences=args.sentences,
        vocab=args.vocab, seq_len=args.seq_len, test=args.test, val=args.val,
        dim=args.dim, epochs=args.epochs, batch_size=args.batch_size, lr=args.lr,
        warmup_steps=args.warmup_steps, buckets=args.buckets,
        hidden_dim=args.hidden_dim, k=args.k,
    )
    artifacts = run_pipeline(params)
    print(json.dumps(artifacts, ensure_ascii=False, sort_keys=True))
    return 0


if __name__ == "__main__":
    import sys

    sys.exit(main())
