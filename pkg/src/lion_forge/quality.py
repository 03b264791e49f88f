"""Meta/Dataset/Sample Quality over metric results.

Meta Quality (MQ) is the arithmetic mean of a combo of caption-metric
scores; CIDEr is a hold-out metric and may never be a combo member.
Dataset Quality fixes each dataset's self-aspect at 1 and adds its
cross-evaluation MQ cells; Sample Quality is the DQ-weighted sum of a
sample's per-tuner MQ scores. All reductions run in ascending key order
so results are bit-stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import IncompleteInputError, ValidationError
from .metrics import MQ_FIELDS, MetricVector


@dataclass(frozen=True)
class MQCombo:
    """Named selection of MQ member metrics (the hold-out rule is enforced)."""

    name: str
    members: tuple[str, ...]

    def __post_init__(self):
        if not self.members:
            raise ValidationError("MQ combo needs at least one member metric")
        for member in self.members:
            if member == "cider":
                raise ValidationError(
                    "CIDEr is the hold-out metric and cannot be an MQ combo member"
                )
            if member not in MQ_FIELDS:
                raise ValidationError(
                    f"unknown MQ combo member {member!r}; choose from {', '.join(MQ_FIELDS)}"
                )
        if len(set(self.members)) != len(self.members):
            raise ValidationError("MQ combo members must be distinct")


C1 = MQCombo("C1", ("b1", "b2", "b3", "b4", "meteor", "rouge_l"))
C2 = MQCombo("C2", ("b4", "meteor", "rouge_l"))
C3 = MQCombo("C3", ("meteor", "rouge_l"))

NAMED_COMBOS = {"C1": C1, "C2": C2, "C3": C3}


def parse_combo(spec: str) -> MQCombo:
    """Combo from a config value: a named variant or a comma list of metrics."""
    text = spec.strip()
    named = NAMED_COMBOS.get(text.upper())
    if named is not None:
        return named
    members = tuple(part.strip() for part in text.split(",") if part.strip())
    return MQCombo(f"custom({','.join(members)})", members)


def meta_quality(metrics: MetricVector, combo: MQCombo) -> float:
    """Arithmetic mean of the combo's member scores.

    fsum keeps the mean correctly rounded, so the result is independent of
    member order.
    """
    return math.fsum(getattr(metrics, name) for name in combo.members) / len(combo.members)


@dataclass(frozen=True)
class PairScore:
    """One sample scored within a single tune->evaluate experiment."""

    tune_dataset: str
    eval_dataset: str
    sample_id: str
    metrics: MetricVector
    mq_s: float
    flag: str | None = None  # "missing" or "empty" when the output was absent/blank


def dataset_mq(pair_scores: list[PairScore]) -> float:
    """Mean per-sample MQ over one (tune, eval) pair, in ascending sample order."""
    if not pair_scores:
        raise ValidationError("dataset MQ over an empty score list is undefined")
    pairs = {(score.tune_dataset, score.eval_dataset) for score in pair_scores}
    if len(pairs) != 1:
        raise ValidationError(f"scores span multiple tune/eval pairs: {sorted(pairs)}")
    ordered = sorted(pair_scores, key=lambda score: score.sample_id)
    return math.fsum(score.mq_s for score in ordered) / len(ordered)


@dataclass(frozen=True)
class DQMatrix:
    """MQ^D cells for every ordered dataset pair; the diagonal is pinned at 1."""

    datasets: tuple[str, ...]
    cells: dict[tuple[str, str], float] = field(repr=False)

    def cell(self, tune: str, eval_: str) -> float:
        if tune == eval_:
            return 1.0
        try:
            return self.cells[(tune, eval_)]
        except KeyError:
            raise IncompleteInputError(
                f"DQ matrix is missing the cell ({tune} -> {eval_})"
            ) from None


def dataset_quality(matrix: DQMatrix) -> dict[str, float]:
    """DQ per dataset: 1 (self-aspect) plus the sum of its cross MQ cells."""
    out: dict[str, float] = {}
    for tune in matrix.datasets:
        out[tune] = 1.0 + math.fsum(
            matrix.cell(tune, eval_) for eval_ in matrix.datasets if eval_ != tune
        )
    return out


def sample_quality(
    dq: dict[str, float],
    per_tuner_mq_s: dict[str, float],
    eval_dataset: str,
) -> float:
    """DQ-weighted sum of one sample's per-tuner MQ scores."""
    tuners = sorted(set(dq) - {eval_dataset})
    missing = [t for t in tuners if t not in per_tuner_mq_s]
    if missing:
        raise IncompleteInputError(
            f"sample in {eval_dataset} lacks MQ^S from tuners: {', '.join(missing)}"
        )
    extra = sorted(set(per_tuner_mq_s) - set(tuners))
    if extra:
        raise ValidationError(
            f"unexpected tuner scores for a sample in {eval_dataset}: {', '.join(extra)}"
        )
    return math.fsum(dq[t] * per_tuner_mq_s[t] for t in tuners)
