"""Command-line entry point.

    semb-export --in sentences.jsonl --out teacher.semb --pseudo --dim 48 --seed 9
    semb-export --in sentences.jsonl --out teacher.semb --model mypkg.encoders:load

A real model name is a "module:attribute" reference; the attribute must be
an encoder with an ``encode`` method, or a zero-argument factory returning
one. Exit codes: 0 success, 1 usage errors, 2 data or file errors.
"""

from __future__ import annotations

import argparse
import importlib
import json
import sys

from .embed import export_pseudo, export_real
from .errors import ExportError
from .formats import read_sentences


def _load_model(name: str):
    module_name, sep, attr = name.partition(":")
    if not sep or not module_name or not attr:
        raise ExportError(f"model name {name!r} is not of the form module:attribute")
    try:
        module = importlib.import_module(module_name)
    except ImportError as exc:
        raise ExportError(f"cannot import model module {module_name!r}: {exc}") from exc
    try:
        model = getattr(module, attr)
    except AttributeError as exc:
        raise ExportError(f"module {module_name!r} has no attribute {attr!r}") from exc
    if not hasattr(model, "encode") and callable(model):
        model = model()
    if not hasattr(model, "encode"):
        raise ExportError(f"model {name!r} has no encode method")
    return model


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semb-export",
        description="Export sentence embeddings to an SEMB store file.")
    parser.add_argument("--in", dest="in_path", required=True,
                        help="input JSONL of {id, text} records")
    parser.add_argument("--out", dest="out_path", required=True,
                        help="output .semb store path")
    backend = parser.add_mutually_exclusive_group(required=True)
    backend.add_argument("--pseudo", action="store_true",
                         help="deterministic hash-based pseudo teacher")
    backend.add_argument("--model", metavar="MODULE:ATTR",
                         help="real encoder model to run")
    parser.add_argument("--dim", type=int, default=64,
                        help="pseudo embedding width (default 64)")
    parser.add_argument("--seed", type=int, default=42,
                        help="pseudo hash seed (default 42)")
    parser.add_argument("--normalize", action="store_true",
                        help="L2-normalize real-model rows before writing")
    parser.add_argument("--batch-size", type=int, default=64,
                        help="real-model inference batch size (default 64)")
    return parser


def run(argv: list[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1

    try:
        sentences = read_sentences(args.in_path)
        if args.pseudo:
            count = export_pseudo(sentences, args.dim, args.seed, args.out_path)
        else:
            model = _load_model(args.model)
            count = export_real(sentences, model, args.out_path,
                                normalize=args.normalize,
                                batch_size=args.batch_size)
    except (ExportError, OSError) as exc:
        print(f"semb-export: error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps({"exported": count, "out": str(args.out_path)},
                     ensure_ascii=False, sort_keys=True))
    return 0


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
