"""Parallel sentence data: ingest, align, deduplicate, augment, split, count.

All operations are pure functions over in-memory lists. Text is normalized
to Unicode NFC on ingest and stays NFC through every transformation; Greek
diacritics are preserved (dedup case-folds instead of stripping them).
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass

from .errors import CorpusError
from .rng import MASK64, Xoshiro256StarStar

LANGUAGES = ("en", "la", "grc")
SOURCE_CORPORA = ("perseus", "bible", "opus", "rosenthal", "synthetic", "other")

_WS_RUN = re.compile(r"\s+")


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


@dataclass
class PairRecord:
    """One aligned parallel sentence pair with language tags and provenance."""

    id: str
    lang_src: str
    lang_tgt: str
    text_src: str
    text_tgt: str
    source_corpus: str = "other"
    synthetic: bool = False

    def validate(self, where: str = "") -> None:
        at = f"{where}: " if where else ""
        if not self.id:
            raise CorpusError(f"{at}empty id")
        for name, lang in (("lang_src", self.lang_src), ("lang_tgt", self.lang_tgt)):
            if lang not in LANGUAGES:
                raise CorpusError(f"{at}unknown language code {lang!r} in {name}")
        if self.lang_src == self.lang_tgt:
            raise CorpusError(f"{at}lang_src and lang_tgt are both {self.lang_src!r}")
        if not self.text_src.strip() or not self.text_tgt.strip():
            raise CorpusError(f"{at}empty text in pair {self.id!r}")
        if self.source_corpus not in SOURCE_CORPORA:
            raise CorpusError(f"{at}unknown source_corpus {self.source_corpus!r}")


@dataclass
class CitedLine:
    """One line of a document, addressed by its citation key."""

    citation_key: str
    text: str


@dataclass
class SplitSpec:
    """Seeded train/val/test partition sizes."""

    seed: int
    n_test: int
    n_val: int

    def __post_init__(self):
        if not 0 <= self.seed <= MASK64:
            raise CorpusError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.n_test < 0 or self.n_val < 0:
            raise CorpusError("split counts must be non-negative")


# ---------------------------------------------------------------------------
# ingest

_REQUIRED_FIELDS = ("id", "lang_src", "lang_tgt", "text_src", "text_tgt")


def parse_pairs_jsonl(path) -> list[PairRecord]:
    """Read pair records from a JSONL file, one object per line, in file order.

    Texts are normalized to NFC. ``source_corpus`` defaults to "other" and
    ``synthetic`` to false when omitted. Any invalid line fails the parse
    with its line number.
    """
    records: list[PairRecord] = []
    seen_ids: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}: line {lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{where}: malformed JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise CorpusError(f"{where}: expected a JSON object")
            missing = [k for k in _REQUIRED_FIELDS if k not in obj]
            if missing:
                raise CorpusError(f"{where}: missing fields {missing}")
            record = PairRecord(
                id=str(obj["id"]),
                lang_src=str(obj["lang_src"]),
                lang_tgt=str(obj["lang_tgt"]),
                text_src=nfc(str(obj["text_src"])),
                text_tgt=nfc(str(obj["text_tgt"])),
                source_corpus=str(obj.get("source_corpus", "other")),
                synthetic=bool(obj.get("synthetic", False)),
            )
            record.validate(where)
            if record.id in seen_ids:
                raise CorpusError(f"{where}: duplicate id {record.id!r}")
            seen_ids.add(record.id)
            records.append(record)
    return records


def write_pairs_jsonl(pairs: list[PairRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(
                {
                    "id": pair.id,
                    "lang_src": pair.lang_src,
                    "lang_tgt": pair.lang_tgt,
                    "text_src": pair.text_src,
                    "text_tgt": pair.text_tgt,
                    "source_corpus": pair.source_corpus,
                    "synthetic": pair.synthetic,
                },
                ensure_ascii=False, sort_keys=True, separators=(",", ":"),
            ))
            fh.write("\n")


def parse_cited_jsonl(path) -> list[CitedLine]:
    """Read a document of {key, text} lines; keys must be unique and non-empty."""
    lines: list[CitedLine] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            where = f"{path}: line {lineno}"
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{where}: malformed JSON ({exc.msg})") from exc
            if not isinstance(obj, dict) or "key" not in obj or "text" not in obj:
                raise CorpusError(f"{where}: expected an object with key and text")
            key = str(obj["key"])
            if not key:
                raise CorpusError(f"{where}: empty citation key")
            if key in seen:
                raise CorpusError(f"{where}: duplicate citation key {key!r}")
            seen.add(key)
            lines.append(CitedLine(citation_key=key, text=nfc(str(obj["text"]))))
    return lines


def write_cited_jsonl(lines: list[CitedLine], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(json.dumps(
                {"key": line.citation_key, "text": line.text},
                ensure_ascii=False, sort_keys=True, separators=(",", ":"),
            ))
            fh.write("\n")


# ---------------------------------------------------------------------------
# alignment

def align_lines(
    src: list[CitedLine], tgt: list[CitedLine], lang_src: str, lang_tgt: str,
    source_corpus: str = "other",
) -> tuple[list[PairRecord], int]:
    """Pair up lines sharing a citation key; count the unalignable rest.

    Emits one PairRecord per key present in both documents, in source
    document order, with id ``source_corpus:citation_key``. Keys present in
    only one document are discarded and counted.
    """

    def keyed(doc: list[CitedLine], label: str) -> dict[str, CitedLine]:
        by_key: dict[str, CitedLine] = {}
        for line in doc:
            if line.citation_key in by_key:
                raise CorpusError(f"duplicate citation key {line.citation_key!r} in {label} document")
            by_key[line.citation_key] = line
        return by_key

    src_by_key = keyed(src, "source")
    tgt_by_key = keyed(tgt, "target")
    aligned: list[PairRecord] = []
    for line in src:
        mate = tgt_by_key.get(line.citation_key)
        if mate is None:
            continue
        record = PairRecord(
            id=f"{source_corpus}:{line.citation_key}",
            lang_src=lang_src,
            lang_tgt=lang_tgt,
            text_src=nfc(line.text),
            text_tgt=nfc(mate.text),
            source_corpus=source_corpus,
        )
        record.validate(f"key {line.citation_key}")
        aligned.append(record)
    discarded = (len(src_by_key) - len(aligned)) + (len(tgt_by_key) - len(aligned))
    return aligned, discarded


# ---------------------------------------------------------------------------
# deduplication

def dedup_key(pair: PairRecord) -> str:
    """Case-folded, whitespace-collapsed, NFC content key.

    Diacritics are kept: stripping them would conflate distinct Greek words.
    """

    def canon(text: str) -> str:
        return nfc(_WS_RUN.sub(" ", text.casefold()).strip())

    return "|".join([pair.lang_src, canon(pair.text_src), pair.lang_tgt, canon(pair.text_tgt)])


def deduplicate(pairs: list[PairRecord]) -> list[PairRecord]:
    """Drop exact duplicates under dedup_key, keeping first occurrences in order."""
    seen: set[str] = set()
    kept: list[PairRecord] = []
    for pair in pairs:
        key = dedup_key(pair)
        if key in seen:
            continue
        seen.add(key)
        kept.append(pair)
    return kept


# ---------------------------------------------------------------------------
# augmentation

def merge_augmented(
    base: list[PairRecord], translations: dict[str, str],
) -> list[PairRecord]:
    """Expand an English-Latin corpus with machine translations into Greek.

    For every base pair whose id has a translation, two synthetic-flagged
    records are emitted right after it: (en, grc) and (la, grc), with ids
    suffixed ":en-grc" / ":la-grc". Unmatched base pairs pass through; a
    translation id with no base pair is an error.
    """
    by_id = {pair.id for pair in base}
    orphans = sorted(set(translations) - by_id)
    if orphans:
        shown = ", ".join(repr(o) for o in orphans[:10])
        more = f" (and {len(orphans) - 10} more)" if len(orphans) > 10 else ""
        raise CorpusError(f"translations reference unknown pair ids: {shown}{more}")
    out: list[PairRecord] = []
    for pair in base:
        out.append(pair)
        if pair.id not in translations:
            continue
        sides = {pair.lang_src: pair.text_src, pair.lang_tgt: pair.text_tgt}
        if set(sides) != {"en", "la"}:
            raise CorpusError(
                f"pair {pair.id!r} is {pair.lang_src}-{pair.lang_tgt}; "
                "augmentation expects en-la pairs"
            )
        grc_text = nfc(translations[pair.id])
        if not grc_text.strip():
            raise CorpusError(f"empty translation for pair {pair.id!r}")
        for lang in ("en", "la"):
            record = PairRecord(
                id=f"{pair.id}:{lang}-grc",
                lang_src=lang,
                lang_tgt="grc",
                text_src=sides[lang],
                text_tgt=grc_text,
                source_corpus=pair.source_corpus,
                synthetic=True,
            )
            out.append(record)
    return out


# ---------------------------------------------------------------------------
# splitting and statistics

def split(
    pairs: list[PairRecord], spec: SplitSpec,
) -> tuple[list[PairRecord], list[PairRecord], list[PairRecord]]:
    """Seeded disjoint (train, val, test) partition of the pairs.

    The pairs are shuffled by the seeded PRNG (Fisher-Yates over a copy);
    the first n_test go to test, the next n_val to val, the rest to train.
    """
    if spec.n_test + spec.n_val >= len(pairs):
        raise CorpusError(
            f"n_test + n_val = {spec.n_test + spec.n_val} must be smaller "
            f"than the dataset size {len(pairs)}"
        )
    shuffled = list(pairs)
    Xoshiro256StarStar(spec.seed).shuffle(shuffled)
    test = shuffled[:spec.n_test]
    val = shuffled[spec.n_test:spec.n_test + spec.n_val]
    train = shuffled[spec.n_test + spec.n_val:]
    return train, val, test


def stats(pairs: list[PairRecord]) -> dict[str, int]:
    """Word counts per language over both sides of every pair.

    Words are maximal runs of non-whitespace (str.split on Unicode
    whitespace).
    """
    counts: dict[str, int] = {}
    for pair in pairs:
        counts[pair.lang_src] = counts.get(pair.lang_src, 0) + len(pair.text_src.split())
        counts[pair.lang_tgt] = counts.get(pair.lang_tgt, 0) + len(pair.text_tgt.split())
    return counts
