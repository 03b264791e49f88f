"""Refinement strategies and REVO-LION assembly.

S1 keeps the exact top-ceil(P*N) samples of each dataset by sample
quality (ties broken by ascending id, so the selected set is unique and
nested across portions). S2 is the seeded random baseline with the same
per-dataset cardinality. S3 keeps samples whose SQ lies within lambda
population standard deviations of the dataset mean. Assembly draws a
balanced evaluation set from each selection and pools the remainder into
the refined tuning corpus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

from .corpus import Corpus, Sample, make_corpus
from .errors import IncompleteInputError, ValidationError
from .rng import SplitMix64, derive_seed

TUNE_CORPUS_ID = "REVO-LION-Tune"
EVAL_CORPUS_ID = "REVO-LION-Eval"


@dataclass(frozen=True)
class Selection:
    """Ids kept from one dataset by one strategy, with its decision boundary."""

    dataset_id: str
    strategy: str
    params: dict
    selected_ids: tuple[str, ...]  # ascending id order
    threshold: float | None = None  # S1: SQ of the last sample in
    interval: tuple[float, float] | None = None  # S3: [mu - l*sigma, mu + l*sigma]

    @property
    def count(self) -> int:
        return len(self.selected_ids)


def _require_sq(corpus: Corpus, sq: dict[str, float]) -> None:
    missing = [s.sample_id for s in corpus.samples if s.sample_id not in sq]
    if missing:
        raise IncompleteInputError(
            f"{corpus.dataset_id}: no SQ for {len(missing)} sample(s), "
            f"first {missing[0]!r}"
        )


def portion_count(portion: float, n: int) -> int:
    """ceil(P * N) with the portion read as an exact decimal."""
    return math.ceil(Fraction(str(portion)) * n)


def refine_s1(corpus: Corpus, sq: dict[str, float], portion: float) -> Selection:
    if not 0.0 < portion <= 1.0:
        raise ValidationError(f"portion must be in (0, 1], got {portion}")
    if not len(corpus):
        raise ValidationError(f"{corpus.dataset_id}: cannot refine an empty corpus")
    _require_sq(corpus, sq)
    ranked = sorted(
        corpus.sample_ids(), key=lambda sample_id: (-sq[sample_id], sample_id)
    )
    k = portion_count(portion, len(corpus))
    chosen = ranked[:k]
    threshold = sq[chosen[-1]]
    return Selection(
        dataset_id=corpus.dataset_id,
        strategy="s1",
        params={"portion": portion},
        selected_ids=tuple(sorted(chosen)),
        threshold=threshold,
    )


def refine_s2(corpus: Corpus, count: int, seed: int) -> Selection:
    n = len(corpus)
    if not 0 < count <= n:
        raise ValidationError(
            f"{corpus.dataset_id}: cannot draw {count} of {n} samples"
        )
    rng = SplitMix64(derive_seed(seed, corpus.dataset_id, "s2"))
    ids = corpus.sample_ids()
    chosen = [ids[i] for i in rng.sample_indices(n, count)]
    return Selection(
        dataset_id=corpus.dataset_id,
        strategy="s2",
        params={"count": count, "seed": seed},
        selected_ids=tuple(sorted(chosen)),
    )


def refine_s3(corpus: Corpus, sq: dict[str, float], lam: float) -> Selection:
    if lam < 0.0:
        raise ValidationError(f"lambda must be >= 0, got {lam}")
    if not len(corpus):
        raise ValidationError(f"{corpus.dataset_id}: cannot refine an empty corpus")
    _require_sq(corpus, sq)
    values = [sq[sample_id] for sample_id in corpus.sample_ids()]
    mu = sum(values) / len(values)
    sigma = math.sqrt(sum((v - mu) ** 2 for v in values) / len(values))
    low, high = mu - lam * sigma, mu + lam * sigma
    chosen = [
        sample_id for sample_id in corpus.sample_ids() if low <= sq[sample_id] <= high
    ]
    return Selection(
        dataset_id=corpus.dataset_id,
        strategy="s3",
        params={"lambda": lam},
        selected_ids=tuple(sorted(chosen)),
        interval=(low, high),
    )


def assemble_revo_lion(
    selections: dict[str, Selection],
    corpora: dict[str, Corpus],
    eval_per_dataset: int = 600,
    seed: int = 0,
) -> tuple[Corpus, Corpus]:
    """Split each dataset's selection into the pooled tune and eval corpora.

    Per dataset, a seeded draw of eval_per_dataset selected samples goes to
    the evaluation benchmark (ids namespaced `<dataset>::<id>`, origin in
    `source`); the remaining selected samples join the tuning corpus.
    """
    if eval_per_dataset < 1:
        raise ValidationError(f"eval_per_dataset must be >= 1, got {eval_per_dataset}")
    tune_samples: list[Sample] = []
    eval_samples: list[Sample] = []
    for dataset_id in sorted(selections):
        selection = selections[dataset_id]
        if dataset_id not in corpora:
            raise ValidationError(f"no corpus registered for {dataset_id}")
        by_id = corpora[dataset_id].by_id()
        unknown = [i for i in selection.selected_ids if i not in by_id]
        if unknown:
            raise ValidationError(
                f"{dataset_id}: selection names unknown sample {unknown[0]!r}"
            )
        if selection.count < eval_per_dataset:
            raise ValidationError(
                f"selection for {dataset_id} has {selection.count} samples, "
                f"fewer than eval_per_dataset={eval_per_dataset}"
            )
        rng = SplitMix64(derive_seed(seed, dataset_id, "assemble-eval"))
        eval_pos = set(rng.sample_indices(selection.count, eval_per_dataset))
        for pos, sample_id in enumerate(selection.selected_ids):
            sample = by_id[sample_id]
            tagged = replace(
                sample,
                sample_id=f"{dataset_id}::{sample.sample_id}",
                source_dataset=dataset_id,
            )
            if pos in eval_pos:
                eval_samples.append(tagged)
            else:
                tune_samples.append(tagged)
    return (
        make_corpus(TUNE_CORPUS_ID, tune_samples),
        make_corpus(EVAL_CORPUS_ID, eval_samples),
    )
