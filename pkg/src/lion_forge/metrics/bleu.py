"""Sentence-level BLEU@k with clipped modified precision and brevity penalty.

B@k is the cumulative form: brevity penalty times the geometric mean of
the clipped precisions p_1..p_k. Because scores here are per-sample, a
zero match count at any order >= 2 is smoothed by adding one to that
order's numerator and denominator; an unmatched unigram level yields 0.
"""

from __future__ import annotations

import math

from .tokenizer import ngram_counts


def bleu(candidate: list[str], references: list[list[str]], k: int) -> float:
    if k not in (1, 2, 3, 4):
        raise ValueError(f"BLEU order must be in 1..4, got {k}")
    if not references:
        raise ValueError("BLEU requires at least one reference")
    c = len(candidate)
    if c == 0:
        return 0.0

    log_sum = 0.0
    for n in range(1, k + 1):
        counts = ngram_counts(candidate, n)
        ref_counts = [ngram_counts(ref, n) for ref in references]
        matched = sum(
            min(count, max(rc[gram] for rc in ref_counts))
            for gram, count in counts.items()
        )
        total = sum(counts.values())
        if matched == 0:
            if n == 1:
                return 0.0
            matched, total = matched + 1, total + 1
        log_sum += math.log(matched / total)

    # closest reference length, ties toward the shorter one
    r = min((len(ref) for ref in references), key=lambda rl: (abs(rl - c), rl))
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    return bp * math.exp(log_sum / k)
