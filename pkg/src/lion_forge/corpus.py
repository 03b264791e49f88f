"""Dataset model: ingestion, overlap removal, splitting, balanced eval sets.

Datasets are UTF-8 JSON Lines, one object per sample with keys `id`,
`image`, `instruction`, `answer`, optional `turn` (for per-turn samples
flattened out of multi-turn conversations) and optional `source` (origin
dataset, set on merged evaluation corpora). Corpora are immutable after
load; every derived corpus is re-serialized canonically so round-trips
are byte-identical.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path

from .canonical import canonical_json, sha256_text
from .errors import ValidationError
from .metrics import tokenize
from .rng import SplitMix64, derive_seed

log = logging.getLogger(__name__)

EVAL_CORPUS_ID = "Eval600"


@dataclass(frozen=True)
class Sample:
    sample_id: str
    image_ref: str
    instruction: str
    answer: str
    turn_index: int | None = None
    source_dataset: str | None = None

    def to_record(self) -> dict:
        record = {
            "id": self.sample_id,
            "image": self.image_ref,
            "instruction": self.instruction,
            "answer": self.answer,
        }
        if self.turn_index is not None:
            record["turn"] = self.turn_index
        if self.source_dataset is not None:
            record["source"] = self.source_dataset
        return record


@dataclass(frozen=True)
class Corpus:
    dataset_id: str
    samples: tuple[Sample, ...]
    digest: str

    def __len__(self) -> int:
        return len(self.samples)

    def sample_ids(self) -> list[str]:
        return [s.sample_id for s in self.samples]

    def by_id(self) -> dict[str, Sample]:
        return {s.sample_id: s for s in self.samples}


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    eval_per_dataset: int = 600
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError(
                f"train_fraction must be in (0, 1), got {self.train_fraction}"
            )
        if self.eval_per_dataset < 1:
            raise ValidationError(
                f"eval_per_dataset must be >= 1, got {self.eval_per_dataset}"
            )


def _validate_dataset_id(dataset_id: str) -> str:
    if not dataset_id or "__" in dataset_id or not all(
        ch.isalnum() or ch in "._-" for ch in dataset_id
    ):
        raise ValidationError(
            f"dataset id {dataset_id!r} must be [A-Za-z0-9._-]+ without '__'"
        )
    return dataset_id


def make_corpus(dataset_id: str, samples: list[Sample]) -> Corpus:
    """Validated corpus with a content digest over its canonical serialization."""
    _validate_dataset_id(dataset_id)
    seen: set[str] = set()
    for sample in samples:
        if not sample.sample_id:
            raise ValidationError(f"{dataset_id}: sample id must be nonempty")
        if sample.sample_id in seen:
            raise ValidationError(
                f"{dataset_id}: duplicate sample id {sample.sample_id!r}"
            )
        seen.add(sample.sample_id)
        if not sample.answer:
            raise ValidationError(
                f"{dataset_id}: sample {sample.sample_id!r} has an empty answer"
            )
    body = "".join(canonical_json(s.to_record()) + "\n" for s in samples)
    return Corpus(dataset_id=dataset_id, samples=tuple(samples), digest=sha256_text(body))


def _sample_from_record(record: dict, where: str) -> Sample:
    if not isinstance(record, dict):
        raise ValidationError(f"{where}: expected a JSON object")
    try:
        sample_id = record["id"]
        image_ref = record["image"]
        instruction = record["instruction"]
        answer = record["answer"]
    except KeyError as exc:
        raise ValidationError(f"{where}: missing key {exc.args[0]!r}") from None
    for key, value in (("id", sample_id), ("image", image_ref),
                       ("instruction", instruction), ("answer", answer)):
        if not isinstance(value, str):
            raise ValidationError(f"{where}: key {key!r} must be a string")
    turn = record.get("turn")
    if turn is not None and not isinstance(turn, int):
        raise ValidationError(f"{where}: key 'turn' must be an integer")
    source = record.get("source")
    if source is not None and not isinstance(source, str):
        raise ValidationError(f"{where}: key 'source' must be a string")
    return Sample(
        sample_id=sample_id,
        image_ref=image_ref,
        instruction=instruction,
        answer=answer,
        turn_index=turn,
        source_dataset=source,
    )


def load_corpus(path: Path | str, dataset_id: str | None = None) -> Corpus:
    """Load and validate a JSON Lines corpus; errors carry the line number."""
    path = Path(path)
    if dataset_id is None:
        dataset_id = path.stem
    if not path.exists():
        raise ValidationError(f"corpus file not found: {path}")
    samples: list[Sample] = []
    seen: dict[str, int] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{where}: malformed JSON ({exc.msg})") from None
            sample = _sample_from_record(record, where)
            if sample.sample_id in seen:
                raise ValidationError(
                    f"{where}: duplicate sample id {sample.sample_id!r} "
                    f"(first seen on line {seen[sample.sample_id]})"
                )
            if not sample.answer:
                raise ValidationError(
                    f"{where}: sample {sample.sample_id!r} has an empty answer"
                )
            seen[sample.sample_id] = lineno
            samples.append(sample)
    if not samples:
        log.warning("corpus %s loaded from %s is empty", dataset_id, path)
    return make_corpus(dataset_id, samples)


def save_corpus(corpus: Corpus, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for sample in corpus.samples:
            fh.write(canonical_json(sample.to_record()) + "\n")


def _overlap_key(sample: Sample) -> tuple[str, tuple[str, ...]]:
    return (sample.image_ref.strip(), tuple(tokenize(sample.instruction)))


def remove_overlap(target: Corpus, source: Corpus) -> Corpus:
    """Drop target samples whose (image, instruction) pair occurs in source."""
    source_keys = {_overlap_key(s) for s in source.samples}
    kept = [s for s in target.samples if _overlap_key(s) not in source_keys]
    removed = len(target) - len(kept)
    if removed:
        log.info(
            "overlap removal: dropped %d of %d samples from %s (against %s)",
            removed, len(target), target.dataset_id, source.dataset_id,
        )
    return make_corpus(target.dataset_id, kept)


def split_corpus(corpus: Corpus, spec: SplitSpec) -> tuple[Corpus, Corpus]:
    """Seeded disjoint (tune, holdout) partition; same seed, same membership.

    Membership comes from a SplitMix64 shuffle of sample positions: the
    first floor(train_fraction * N) shuffled positions form the tuning
    side. Each side keeps the original corpus order. The fraction is
    interpreted as an exact decimal so floor() never wobbles on float
    representation (e.g. 0.3 * 10 is exactly 3 samples).
    """
    n = len(corpus)
    if n < 2:
        raise ValidationError(
            f"{corpus.dataset_id}: cannot split a corpus of {n} sample(s)"
        )
    k = int(Fraction(str(spec.train_fraction)) * n)
    order = list(range(n))
    SplitMix64(derive_seed(spec.seed, corpus.dataset_id, "split")).shuffle(order)
    tune_idx = sorted(order[:k])
    holdout_idx = sorted(order[k:])
    tune = make_corpus(corpus.dataset_id, [corpus.samples[i] for i in tune_idx])
    holdout = make_corpus(corpus.dataset_id, [corpus.samples[i] for i in holdout_idx])
    return tune, holdout


def build_eval600(holdouts: dict[str, Corpus], spec: SplitSpec) -> Corpus:
    """Balanced evaluation corpus: a seeded draw of eval_per_dataset per dataset.

    Sample ids are namespaced as `<dataset>::<id>` and each sample carries
    its origin in the `source` field.
    """
    merged: list[Sample] = []
    for dataset_id in sorted(holdouts):
        corpus = holdouts[dataset_id]
        n = len(corpus)
        if n < spec.eval_per_dataset:
            raise ValidationError(
                f"holdout for {dataset_id} has {n} samples, "
                f"fewer than eval_per_dataset={spec.eval_per_dataset}"
            )
        rng = SplitMix64(derive_seed(spec.seed, dataset_id, "eval600"))
        chosen = rng.sample_indices(n, spec.eval_per_dataset)
        for i in chosen:
            sample = corpus.samples[i]
            merged.append(
                replace(
                    sample,
                    sample_id=f"{dataset_id}::{sample.sample_id}",
                    source_dataset=dataset_id,
                )
            )
    return make_corpus(EVAL_CORPUS_ID, merged)
