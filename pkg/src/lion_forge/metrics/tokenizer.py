"""Canonical tokenization shared by every metric.

Lowercase, map every character outside [a-z0-9'] to a space, then split
on whitespace runs. All scores in the pipeline are computed over this
token stream, never over raw text.
"""

from __future__ import annotations

import re
from collections import Counter

TokenSeq = list[str]

_NON_TOKEN = re.compile(r"[^a-z0-9']+")


def tokenize(text: str) -> TokenSeq:
    return _NON_TOKEN.sub(" ", text.lower()).split()


def ngram_counts(tokens: list[str] | tuple[str, ...], n: int) -> Counter:
    """Sliding-window n-gram multiset; total count is max(0, len - n + 1)."""
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))
