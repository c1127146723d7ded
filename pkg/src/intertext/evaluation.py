"""Translation-retrieval accuracy and the verse-retrieval case study.

The metric: encode both sides of a parallel test set, and for each source
sentence check whether its own translation gets the strictly highest cosine
among all target sentences. Ties count as failures. Each direction of a
language pair is scored separately and reported as e.g. "en→la".
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .corpus import LANGUAGES, CitedLine, PairRecord
from .encoder import StudentModel, encode, encode_batch
from .errors import EvalError
from .index import VectorIndex, top_k

ARROW = "→"


@dataclass
class EvalReport:
    dataset: str
    accuracies: dict[str, float]  # direction -> fraction in [0, 1]
    sizes: dict[str, int]         # direction -> test-set size


@dataclass
class CaseHit:
    id: str
    score: float
    rank: int
    text: str


@dataclass
class CaseStudyRow:
    query_id: str
    query_text: str
    hits: list[CaseHit]
    k: int


def parse_direction(direction: str) -> tuple[str, str]:
    """Split "en→la" (ASCII "en->la" accepted) into (source, target) codes."""
    parts = direction.replace("->", ARROW).split(ARROW)
    if len(parts) != 2:
        raise EvalError(f"malformed direction {direction!r}; expected e.g. 'en{ARROW}la'")
    src, tgt = parts[0].strip(), parts[1].strip()
    for lang in (src, tgt):
        if lang not in LANGUAGES:
            raise EvalError(f"unknown language code {lang!r} in direction {direction!r}")
    if src == tgt:
        raise EvalError(f"direction {direction!r} repeats one language")
    return src, tgt


def translation_accuracy(src_embs: np.ndarray, tgt_embs: np.ndarray) -> float:
    """Fraction of rows whose own mate has the strictly highest cosine.

    Row i of each matrix holds the two sides of one sentence pair. A tie at
    the maximum counts as incorrect. One direction only; call twice with
    swapped arguments for the reverse direction.
    """
    src = np.asarray(src_embs, dtype=np.float64)
    tgt = np.asarray(tgt_embs, dtype=np.float64)
    if src.ndim != 2 or src.shape != tgt.shape:
        raise EvalError(f"shape mismatch: src {src.shape} vs tgt {tgt.shape}")
    if src.shape[0] == 0:
        raise EvalError("empty test set")
    src_norms = np.linalg.norm(src, axis=1)
    tgt_norms = np.linalg.norm(tgt, axis=1)
    if (src_norms == 0).any() or (tgt_norms == 0).any():
        raise EvalError("zero embedding row")
    sims = (src / src_norms[:, None]) @ (tgt / tgt_norms[:, None]).T
    own = sims.diagonal().copy()
    np.fill_diagonal(sims, -np.inf)
    return float(np.mean(own > sims.max(axis=1)))


def evaluate_encoder(encode_fn, test_pairs: list[PairRecord],
                     directions: list[str] | None = None,
                     dataset: str = "test") -> EvalReport:
    """Score any texts -> matrix encoder on a single-language-pair test set.

    ``encode_fn`` maps a list of texts to a row-per-text matrix. With
    ``directions`` omitted, both directions of the pair are scored.
    """
    if not test_pairs:
        raise EvalError("empty test set")
    lang_pairs = {(p.lang_src, p.lang_tgt) for p in test_pairs}
    if len(lang_pairs) != 1:
        raise EvalError(f"test set mixes language pairs: {sorted(lang_pairs)}")
    (lang_src, lang_tgt), = lang_pairs
    if directions is None:
        directions = [f"{lang_src}{ARROW}{lang_tgt}", f"{lang_tgt}{ARROW}{lang_src}"]

    emb_src = np.asarray(encode_fn([p.text_src for p in test_pairs]))
    emb_tgt = np.asarray(encode_fn([p.text_tgt for p in test_pairs]))
    accuracies: dict[str, float] = {}
    sizes: dict[str, int] = {}
    for direction in directions:
        d_src, d_tgt = parse_direction(direction)
        canonical = f"{d_src}{ARROW}{d_tgt}"
        if (d_src, d_tgt) == (lang_src, lang_tgt):
            acc = translation_accuracy(emb_src, emb_tgt)
        elif (d_src, d_tgt) == (lang_tgt, lang_src):
            acc = translation_accuracy(emb_tgt, emb_src)
        else:
            raise EvalError(
                f"direction {canonical!r} does not match the test set's "
                f"language pair {lang_src}-{lang_tgt}"
            )
        accuracies[canonical] = acc
        sizes[canonical] = len(test_pairs)
    return EvalReport(dataset=dataset, accuracies=accuracies, sizes=sizes)


def evaluate_model(model: StudentModel, test_pairs: list[PairRecord],
                   directions: list[str] | None = None,
                   dataset: str = "test") -> EvalReport:
    """Score the student encoder on a parallel test set."""
    return evaluate_encoder(
        lambda texts: encode_batch(model, texts), test_pairs, directions, dataset,
    )


def run_case_study(query_doc: list[CitedLine], target_index: VectorIndex,
                   target_texts: dict[str, str], model: StudentModel,
                   k: int) -> list[CaseStudyRow]:
    """Retrieve the top-k nearest target verses for every query line.

    ``target_texts`` resolves index ids back to verse texts for display;
    every retrievable id must be present. Output order follows the query
    document.
    """
    if not query_doc:
        raise EvalError("empty query document")
    rows: list[CaseStudyRow] = []
    for line in query_doc:
        hits = top_k(target_index, encode(model, line.text), k)
        case_hits = []
        for hit in hits:
            if hit.id not in target_texts:
                raise EvalError(f"no target text for retrieved id {hit.id!r}")
            case_hits.append(CaseHit(id=hit.id, score=hit.score, rank=hit.rank,
                                     text=target_texts[hit.id]))
        rows.append(CaseStudyRow(query_id=line.citation_key, query_text=line.text,
                                 hits=case_hits, k=k))
    return rows


# ---------------------------------------------------------------------------
# rendering

def _pct(value: float) -> str:
    return f"{100.0 * value:.2f}"


def render_report(report: EvalReport, fmt: str = "tsv") -> str:
    """Deterministic accuracy table; percentages with two decimals."""
    directions = sorted(report.accuracies)
    if fmt == "tsv":
        lines = ["dataset\tdirection\tn\taccuracy_pct"]
        for d in directions:
            lines.append(f"{report.dataset}\t{d}\t{report.sizes[d]}\t{_pct(report.accuracies[d])}")
    elif fmt == "markdown":
        lines = [
            f"### {report.dataset}",
            "",
            "| direction | n | accuracy (%) |",
            "| --- | --- | --- |",
        ]
        for d in directions:
            lines.append(f"| {d} | {report.sizes[d]} | {_pct(report.accuracies[d])} |")
    else:
        raise EvalError(f"unknown format {fmt!r}; expected 'tsv' or 'markdown'")
    return "\n".join(lines) + "\n"


def render_case_study(rows: list[CaseStudyRow], fmt: str = "markdown") -> str:
    """Deterministic per-query hit table with resolved verse texts."""
    if fmt == "tsv":
        lines = ["query_id\tquery_text\trank\thit_id\tscore\thit_text"]
        for row in rows:
            for hit in row.hits:
                lines.append(
                    f"{row.query_id}\t{row.query_text}\t{hit.rank}"
                    f"\t{hit.id}\t{hit.score:.4f}\t{hit.text}"
                )
    elif fmt == "markdown":
        lines = ["| query | rank | id | score | text |", "| --- | --- | --- | --- | --- |"]
        for row in rows:
            for hit in row.hits:
                query_cell = row.query_text if hit.rank == 0 else ""
                lines.append(
                    f"| {query_cell} | {hit.rank + 1} | {hit.id}"
                    f" | {hit.score:.4f} | {hit.text} |"
                )
    else:
        raise EvalError(f"unknown format {fmt!r}; expected 'tsv' or 'markdown'")
    return "\n".join(lines) + "\n"


def report_to_json(report: EvalReport) -> str:
    return json.dumps(
        {
            "dataset": report.dataset,
            "accuracy": report.accuracies,
            "n": report.sizes,
        },
        ensure_ascii=False, sort_keys=True,
    )


def case_study_to_json(rows: list[CaseStudyRow]) -> str:
    return json.dumps(
        [
            {
                "query_id": row.query_id,
                "query_text": row.query_text,
                "k": row.k,
                "hits": [
                    {"id": h.id, "score": h.score, "rank": h.rank, "text": h.text}
                    for h in row.hits
                ],
            }
            for row in rows
        ],
        ensure_ascii=False, sort_keys=True,
    )
