"""Shared fixture builders for pipeline-level tests."""

from __future__ import annotations

import json
import random
from pathlib import Path

from lion_forge.corpus import Corpus, Sample, make_corpus

# plain English-ish word bank; disjoint from the gibberish generator's
# consonant-triple vocabulary, including after stemming
WORDS = [
    "the", "a", "small", "red", "dog", "cat", "bird", "sits", "runs", "near",
    "tree", "house", "river", "child", "holds", "ball", "under", "bright",
    "sky", "quiet", "garden", "walks", "stone", "path", "old", "boat",
    "rests", "sand", "two", "people", "talk", "market", "light", "falls",
    "window", "open", "field", "green", "slow", "train", "crosses", "bridge",
    "tall", "man", "reads", "book", "bench", "yellow", "flower", "grows",
]


def make_answer(rng: random.Random, min_len: int = 10, max_len: int = 16) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(min_len, max_len)))


def build_corpus(dataset_id: str, n: int, seed: int = 0,
                 min_len: int = 10, max_len: int = 16) -> Corpus:
    rng = random.Random((dataset_id, seed).__repr__())
    samples = [
        Sample(
            sample_id=f"{dataset_id.lower()}-{i:04d}",
            image_ref=f"images/{dataset_id}/{i:04d}.jpg",
            instruction=f"describe scene {i} in {dataset_id}",
            answer=make_answer(rng, min_len, max_len),
        )
        for i in range(n)
    ]
    return make_corpus(dataset_id, samples)


def write_corpus(corpus: Corpus, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for sample in corpus.samples:
            fh.write(json.dumps(sample.to_record(), sort_keys=True, ensure_ascii=False) + "\n")
    return path


def write_predictions(path: Path, records: list[dict]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")
    return path


def registry_files(tmp_path: Path, corpora: dict[str, Corpus]) -> dict[str, str]:
    """Write each corpus under tmp_path/data and return the --data mapping."""
    mapping = {}
    for ds, corpus in corpora.items():
        target = tmp_path / "data" / f"{ds}.jsonl"
        write_corpus(corpus, target)
        mapping[ds] = str(target)
    return mapping


def data_flags(mapping: dict[str, str]) -> list[str]:
    flags = []
    for ds in sorted(mapping):
        flags.extend(["--data", f"{ds}={mapping[ds]}"])
    return flags
