"""Tune-cross-evaluation: plan the TxE grid, ingest predictions, score.

The toolkit never runs models. Generated answers arrive as JSON Lines
prediction files (keys `tune_dataset`, `eval_dataset`, `id`, `output`),
one record per grid cell and sample. Scoring is embarrassingly parallel
over pairs; the collector assembles results in canonical order, so the
tensor is byte-identical for any worker count.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus
from .errors import IncompleteInputError, ValidationError
from .metrics import IdfTable, MetricVector, cider_idf, score_tokens, tokenize
from .quality import DQMatrix, MQCombo, PairScore, dataset_mq, meta_quality
from .rng import SplitMix64, derive_seed

ZERO_METRICS = MetricVector(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

GIBBERISH_VOCAB = (
    "zxq", "vvk", "qjz", "xkv", "zzv", "kqx", "jvz", "xqk",
    "vzz", "qkj", "zvx", "kxx", "jqv", "xzk", "vkq", "zjx",
)


@dataclass(frozen=True)
class RunPlan:
    """Ordered (tune, eval) pairs: the full cross grid, then eval-set pairs."""

    cross_pairs: tuple[tuple[str, str], ...]
    eval_pairs: tuple[tuple[str, str], ...] = ()

    @property
    def pairs(self) -> tuple[tuple[str, str], ...]:
        return self.cross_pairs + self.eval_pairs

    def datasets(self) -> tuple[str, ...]:
        return tuple(sorted({t for t, _ in self.cross_pairs}))


def plan_runs(
    registry: list[str] | tuple[str, ...],
    include_eval: bool = False,
    eval_corpus_id: str = "Eval600",
) -> RunPlan:
    datasets = sorted(set(registry))
    if len(datasets) < 2:
        raise ValidationError(
            f"cross-evaluation needs at least 2 datasets, got {len(datasets)}"
        )
    if eval_corpus_id in datasets:
        raise ValidationError(
            f"evaluation corpus id {eval_corpus_id!r} collides with a registry dataset"
        )
    cross = tuple(
        (tune, eval_) for tune in datasets for eval_ in datasets if tune != eval_
    )
    evals = tuple((tune, eval_corpus_id) for tune in datasets) if include_eval else ()
    return RunPlan(cross_pairs=cross, eval_pairs=evals)


@dataclass
class PredictionStore:
    """Predictions indexed by (tune, eval) pair and sample id."""

    records: dict[tuple[str, str], dict[str, str]] = field(default_factory=dict)
    origins: dict[tuple[str, str, str], str] = field(default_factory=dict)

    def get(self, tune: str, eval_: str, sample_id: str) -> str | None:
        return self.records.get((tune, eval_), {}).get(sample_id)


def ingest_predictions(
    paths: list[Path | str],
    plan: RunPlan,
    corpora: dict[str, Corpus],
) -> PredictionStore:
    """Index prediction files, rejecting unknown pairs/ids and duplicates."""
    store = PredictionStore()
    valid_pairs = set(plan.pairs)
    for path in paths:
        path = Path(path)
        if not path.exists():
            raise ValidationError(f"prediction file not found: {path}")
        with path.open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                where = f"{path}:{lineno}"
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValidationError(f"{where}: malformed JSON ({exc.msg})") from None
                try:
                    tune = record["tune_dataset"]
                    eval_ = record["eval_dataset"]
                    sample_id = record["id"]
                    output = record["output"]
                except (KeyError, TypeError):
                    raise ValidationError(
                        f"{where}: prediction records need keys "
                        "tune_dataset, eval_dataset, id, output"
                    ) from None
                if not isinstance(output, str):
                    raise ValidationError(f"{where}: key 'output' must be a string")
                if (tune, eval_) not in valid_pairs:
                    raise ValidationError(
                        f"{where}: pair ({tune} -> {eval_}) is not in the run plan"
                    )
                eval_corpus = corpora.get(eval_)
                if eval_corpus is None:
                    raise ValidationError(f"{where}: unknown evaluation corpus {eval_!r}")
                if sample_id not in eval_corpus.by_id():
                    raise ValidationError(
                        f"{where}: sample {sample_id!r} does not exist in {eval_}"
                    )
                key = (tune, eval_, sample_id)
                if key in store.origins:
                    raise ValidationError(
                        f"{where}: duplicate prediction for ({tune}, {eval_}, {sample_id}); "
                        f"first seen at {store.origins[key]}"
                    )
                store.origins[key] = where
                store.records.setdefault((tune, eval_), {})[sample_id] = output
    return store


def validate_coverage(
    store: PredictionStore,
    plan: RunPlan,
    corpora: dict[str, Corpus],
) -> None:
    """Strict mode: every (tune, eval, sample) cell must be present."""
    for tune, eval_ in plan.pairs:
        have = store.records.get((tune, eval_), {})
        for sample_id in corpora[eval_].sample_ids():
            if sample_id not in have:
                raise IncompleteInputError(
                    f"missing prediction for ({tune}, {eval_}, {sample_id})"
                )


def score_pair(
    tune: str,
    eval_: str,
    store: PredictionStore,
    corpora: dict[str, Corpus],
    combo: MQCombo,
    idf: IdfTable | None = None,
) -> list[PairScore]:
    """Score every sample of the evaluation corpus for one grid cell.

    Missing predictions (allowed only after strict-mode checks are waived)
    and empty outputs score zero on all metrics and are flagged, not fatal.
    """
    eval_corpus = corpora[eval_]
    scores: list[PairScore] = []
    for sample in sorted(eval_corpus.samples, key=lambda s: s.sample_id):
        output = store.get(tune, eval_, sample.sample_id)
        flag = None
        if output is None:
            flag = "missing"
        elif not tokenize(output):
            flag = "empty"
        if flag is not None:
            zero = ZERO_METRICS if idf is None else MetricVector(
                0.0, 0.0, 0.0, 0.0, 0.0, 0.0, cider=0.0
            )
            scores.append(PairScore(tune, eval_, sample.sample_id, zero, 0.0, flag))
            continue
        metrics = score_tokens(tokenize(output), tokenize(sample.answer), idf)
        mq_s = meta_quality(metrics, combo)
        scores.append(
            PairScore(tune, eval_, sample.sample_id, metrics, mq_s, None)
        )
    return scores


@dataclass(frozen=True)
class ScoreTensor:
    """All per-sample scores plus per-pair MQ^D, complete over a run plan."""

    combo: MQCombo
    datasets: tuple[str, ...]
    eval_corpus_id: str | None
    pair_scores: dict[tuple[str, str], list[PairScore]] = field(repr=False)
    outputs: dict[tuple[str, str], dict[str, str]] = field(repr=False)

    def mqd(self, tune: str, eval_: str) -> float:
        if tune == eval_:
            return 1.0
        return dataset_mq(self.pair_scores[(tune, eval_)])

    def dq_matrix(self) -> DQMatrix:
        cells = {
            (tune, eval_): self.mqd(tune, eval_)
            for tune in self.datasets
            for eval_ in self.datasets
            if tune != eval_
        }
        return DQMatrix(datasets=self.datasets, cells=cells)

    def eval_mqd(self) -> dict[str, float]:
        """MQ^D of each tuning dataset against the merged evaluation corpus."""
        if self.eval_corpus_id is None:
            return {}
        return {
            tune: self.mqd(tune, self.eval_corpus_id) for tune in self.datasets
        }


def build_tensor(
    plan: RunPlan,
    store: PredictionStore,
    corpora: dict[str, Corpus],
    combo: MQCombo,
    workers: int = 1,
    with_cider: bool = False,
) -> ScoreTensor:
    """Score the whole plan with a bounded worker pool, collected in plan order."""
    if workers < 1:
        raise ValidationError(f"worker count must be >= 1, got {workers}")
    idf_tables: dict[str, IdfTable | None] = {}
    for _, eval_ in plan.pairs:
        if eval_ not in idf_tables:
            idf_tables[eval_] = (
                cider_idf([tokenize(s.answer) for s in corpora[eval_].samples])
                if with_cider and len(corpora[eval_])
                else None
            )

    def score_one(pair: tuple[str, str]) -> list[PairScore]:
        tune, eval_ = pair
        return score_pair(tune, eval_, store, corpora, combo, idf_tables[eval_])

    ordered_pairs = list(plan.pairs)
    if workers == 1:
        results = [score_one(pair) for pair in ordered_pairs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(score_one, ordered_pairs))

    pair_scores = dict(zip(ordered_pairs, results))
    outputs = {
        pair: dict(store.records.get(pair, {})) for pair in ordered_pairs
    }
    eval_ids = {eval_ for _, eval_ in plan.eval_pairs}
    return ScoreTensor(
        combo=combo,
        datasets=plan.datasets(),
        eval_corpus_id=next(iter(eval_ids)) if eval_ids else None,
        pair_scores=pair_scores,
        outputs=outputs,
    )


def mock_generate(
    eval_corpus: Corpus,
    tune_dataset: str,
    mode: str,
    rate: float = 0.0,
    seed: int = 0,
) -> list[dict]:
    """Fixture predictions: echo the answer, drop words, or emit gibberish.

    Exists solely to produce deterministic test/benchmark inputs; `rate`
    is the per-token dropout probability in dropout mode.
    """
    if mode not in ("echo", "dropout", "gibberish"):
        raise ValidationError(f"unknown mock-generate mode {mode!r}")
    if mode == "dropout" and not 0.0 <= rate <= 1.0:
        raise ValidationError(f"dropout rate must be in [0, 1], got {rate}")
    records = []
    for sample in eval_corpus.samples:
        if mode == "echo":
            output = sample.answer
        elif mode == "dropout":
            rng = SplitMix64(
                derive_seed(seed, tune_dataset, eval_corpus.dataset_id,
                            sample.sample_id, "dropout")
            )
            kept = [tok for tok in tokenize(sample.answer) if rng.random() >= rate]
            output = " ".join(kept)
        else:
            rng = SplitMix64(
                derive_seed(seed, tune_dataset, eval_corpus.dataset_id,
                            sample.sample_id, "gibberish")
            )
            length = max(len(tokenize(sample.answer)), 1)
            output = " ".join(
                GIBBERISH_VOCAB[rng.below(len(GIBBERISH_VOCAB))] for _ in range(length)
            )
        records.append(
            {
                "tune_dataset": tune_dataset,
                "eval_dataset": eval_corpus.dataset_id,
                "id": sample.sample_id,
                "output": output,
            }
        )
    return records
