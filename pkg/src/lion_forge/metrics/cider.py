"""CIDEr-D consensus metric over tf-idf n-gram vectors (orders 1-4).

Per order, candidate and reference token counts are weighted by idf
computed over the evaluation corpus's reference texts, the candidate
vector is clipped to the reference counts, and the cosine similarity is
scaled by a Gaussian length penalty (sigma = 6). Scores average the four
orders and all references. The conventional x10 CIDEr-D scale is scaled
by a further x10 so reports read on the familiar 0-100-per-match scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .tokenizer import ngram_counts

MAX_ORDER = 4
SIGMA = 6.0
REPORT_SCALE = 100.0  # 10.0 per CIDEr-D convention, x10 for percent-style reports

NGram = tuple[str, ...]


@dataclass(frozen=True)
class IdfTable:
    """Document frequencies of 1..4-grams over a reference corpus."""

    num_docs: int
    doc_freq: dict[NGram, int] = field(repr=False)

    def idf(self, gram: NGram) -> float:
        # unseen grams fall back to df = 1 (maximum idf), the CIDEr-D convention
        return math.log(self.num_docs / max(self.doc_freq.get(gram, 0), 1))


def cider_idf(reference_corpus: list[list[str]]) -> IdfTable:
    """Build the idf table from one evaluation dataset's reference texts."""
    if not reference_corpus:
        raise ValueError("idf table requires a nonempty reference corpus")
    doc_freq: dict[NGram, int] = {}
    for tokens in reference_corpus:
        seen: set[NGram] = set()
        for n in range(1, MAX_ORDER + 1):
            seen.update(ngram_counts(tokens, n))
        for gram in seen:
            doc_freq[gram] = doc_freq.get(gram, 0) + 1
    return IdfTable(num_docs=len(reference_corpus), doc_freq=doc_freq)


def _tfidf_vector(tokens: list[str], n: int, idf: IdfTable) -> tuple[dict[NGram, float], float]:
    vec = {
        gram: count * idf.idf(gram)
        for gram, count in ngram_counts(tokens, n).items()
    }
    norm = math.sqrt(sum(w * w for w in vec.values()))
    return vec, norm


def cider(candidate: list[str], references: list[list[str]], idf: IdfTable) -> float:
    if not references:
        raise ValueError("CIDEr requires at least one reference")
    if idf is None:
        raise ValueError("CIDEr requires an idf table built over the evaluation corpus")

    total = 0.0
    for n in range(1, MAX_ORDER + 1):
        cand_vec, cand_norm = _tfidf_vector(candidate, n, idf)
        order_sum = 0.0
        for ref in references:
            ref_vec, ref_norm = _tfidf_vector(ref, n, idf)
            if cand_norm == 0.0 or ref_norm == 0.0:
                continue
            dot = sum(
                min(w, ref_vec[gram]) * ref_vec[gram]
                for gram, w in cand_vec.items()
                if gram in ref_vec
            )
            delta = len(candidate) - len(ref)
            order_sum += (
                dot
                / (cand_norm * ref_norm)
                * math.exp(-(delta * delta) / (2.0 * SIGMA * SIGMA))
            )
        total += order_sum / len(references)
    return total / MAX_ORDER * REPORT_SCALE
