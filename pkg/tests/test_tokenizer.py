from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lion_forge.metrics import ngram_counts, tokenize

from oracles import brute_ngrams


def test_tokenize_strips_punctuation_and_lowercases():
    assert tokenize("The cat, sat.") == ["the", "cat", "sat"]


def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_keeps_apostrophes():
    assert tokenize("Don't GO!!") == ["don't", "go"]


def test_tokenize_digits_and_unicode():
    assert tokenize("Room 42 — naïve test") == ["room", "42", "na", "ve", "test"]


@given(st.text(max_size=80))
def test_tokenize_output_alphabet(text):
    for token in tokenize(text):
        assert token
        assert all(ch.islower() or ch.isdigit() or ch == "'" for ch in token)
        assert token == token.lower()


@given(st.text(max_size=80))
def test_tokenize_deterministic(text):
    assert tokenize(text) == tokenize(text)


def test_ngram_counts_unigrams():
    assert ngram_counts(["a", "b", "a"], 1) == {("a",): 2, ("b",): 1}


def test_ngram_counts_bigrams():
    assert ngram_counts(["a", "b", "a"], 2) == {("a", "b"): 1, ("b", "a"): 1}


def test_ngram_counts_window_longer_than_sequence():
    assert ngram_counts(["a"], 2) == {}


def test_ngram_counts_rejects_bad_order():
    with pytest.raises(ValueError):
        ngram_counts(["a"], 0)


@given(
    st.lists(st.sampled_from("abc"), max_size=12),
    st.integers(min_value=1, max_value=5),
)
def test_ngram_sliding_window_identity(tokens, n):
    counts = ngram_counts(tokens, n)
    assert sum(counts.values()) == max(0, len(tokens) - n + 1)
    assert all(len(gram) == n for gram in counts)
    assert counts == brute_ngrams(tokens, n)
