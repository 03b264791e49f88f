"""From-scratch caption metrics: BLEU@1-4, METEOR, ROUGE-L, and CIDEr-D.

All metrics are pure functions over the canonical token stream; CIDEr
additionally takes an immutable idf table built per evaluation corpus.
"""

from .bleu import bleu
from .cider import IdfTable, cider, cider_idf
from .meteor import meteor
from .rouge import lcs_length, rouge_l
from .stemmer import porter_stem
from .tokenizer import TokenSeq, ngram_counts, tokenize
from .vector import MQ_FIELDS, MetricVector, score_tokens

__all__ = [
    "IdfTable",
    "MQ_FIELDS",
    "MetricVector",
    "TokenSeq",
    "bleu",
    "cider",
    "cider_idf",
    "lcs_length",
    "meteor",
    "ngram_counts",
    "porter_stem",
    "rouge_l",
    "score_tokens",
    "tokenize",
]
