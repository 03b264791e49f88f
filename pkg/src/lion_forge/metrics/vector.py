"""Per-sample metric bundle used by the quality computations."""

from __future__ import annotations

from dataclasses import dataclass

from .bleu import bleu
from .cider import IdfTable, cider
from .meteor import meteor
from .rouge import rouge_l

MQ_FIELDS = ("b1", "b2", "b3", "b4", "meteor", "rouge_l")


@dataclass(frozen=True)
class MetricVector:
    b1: float
    b2: float
    b3: float
    b4: float
    meteor: float
    rouge_l: float
    cider: float | None = None

    def as_dict(self) -> dict[str, float]:
        out = {name: getattr(self, name) for name in MQ_FIELDS}
        if self.cider is not None:
            out["cider"] = self.cider
        return out


def score_tokens(
    candidate: list[str],
    reference: list[str],
    idf: IdfTable | None = None,
) -> MetricVector:
    """All metrics for one candidate against its single reference answer.

    CIDEr is computed only when an idf table for the evaluation corpus is
    supplied; it is reported alongside but never enters meta-quality.
    """
    refs = [reference]
    return MetricVector(
        b1=bleu(candidate, refs, 1),
        b2=bleu(candidate, refs, 2),
        b3=bleu(candidate, refs, 3),
        b4=bleu(candidate, refs, 4),
        meteor=meteor(candidate, reference),
        rouge_l=rouge_l(candidate, reference),
        cider=cider(candidate, refs, idf) if idf is not None else None,
    )
