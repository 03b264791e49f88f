"""lion-forge: tune-cross-evaluation scoring and refinement for
instruction-tuning corpora.

The pipeline ingests externally generated predictions for every
(tune dataset, evaluation dataset) pair, scores them with a from-scratch
caption-metric stack (BLEU@1-4, METEOR, ROUGE-L; CIDEr held out), derives
meta/dataset/sample quality, and assembles a refined tuning corpus plus a
balanced evaluation benchmark.
"""

__version__ = "0.1.0"
