"""Command-line pipeline: prepare -> score -> quality -> refine -> assemble.

Every command is rerun-safe and deterministic: identical configuration and
inputs produce byte-identical artifacts, independent of worker count.
Exit codes: 0 success, 1 validation error, 2 incomplete inputs (strict).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .artifacts import (
    TOOL_NAME,
    config_digest,
    load_tensor,
    pair_agreement,
    rank_descending,
    write_csv,
    write_manifest,
    write_tensor,
)
from .canonical import read_json, sha256_file, write_json, write_jsonl
from .config import PipelineConfig, build_config
from .corpus import (
    Corpus,
    SplitSpec,
    build_eval600,
    load_corpus,
    remove_overlap,
    save_corpus,
    split_corpus,
)
from .crosseval import (
    ScoreTensor,
    build_tensor,
    ingest_predictions,
    mock_generate,
    plan_runs,
    validate_coverage,
)
from .errors import IncompleteInputError, LionForgeError, ValidationError
from .metrics import MQ_FIELDS, cider_idf, score_tokens, tokenize
from .quality import C1, C2, C3, dataset_quality, meta_quality, sample_quality
from .refine import (
    Selection,
    assemble_revo_lion,
    portion_count,
    refine_s1,
    refine_s2,
    refine_s3,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INCOMPLETE = 2


class _Parser(argparse.ArgumentParser):
    """argparse that reports bad usage as a validation error (exit 1)."""

    def error(self, message):
        raise ValidationError(message)


def _parse_mapping(items: list[str] | None, flag: str, sep: str = "=") -> dict[str, str] | None:
    if not items:
        return None
    mapping: dict[str, str] = {}
    for item in items:
        if sep not in item:
            raise ValidationError(f"{flag} expects KEY{sep}VALUE, got {item!r}")
        key, value = item.split(sep, 1)
        if key in mapping:
            raise ValidationError(f"{flag} repeats key {key!r}")
        mapping[key] = value
    return mapping


def _load_registry(datasets: dict[str, str]) -> dict[str, Corpus]:
    if not datasets:
        raise ValidationError("no datasets registered (use --data ID=path or dataset.* config keys)")
    return {ds: load_corpus(path, ds) for ds, path in sorted(datasets.items())}


def _expand_prediction_paths(raw: list[str]) -> list[Path]:
    paths: list[Path] = []
    for item in raw:
        path = Path(item)
        if path.is_dir():
            paths.extend(sorted(path.glob("*.jsonl")))
        else:
            paths.append(path)
    if not paths:
        raise ValidationError("no prediction files given")
    return paths


def _out_dir(cfg_out: str | None, args_out: str | None) -> Path:
    out = args_out or cfg_out
    if not out:
        raise ValidationError("an output directory is required (--out or config key out)")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _corpus_inputs(corpora: dict[str, Corpus]) -> dict[str, str]:
    return {ds: corpus.digest for ds, corpus in sorted(corpora.items())}


def _config_from_args(args, **extra) -> PipelineConfig:
    overrides = {
        "datasets": _parse_mapping(getattr(args, "data", None), "--data"),
        "combo": getattr(args, "combo", None),
        "workers": getattr(args, "workers", None),
        "cider": True if getattr(args, "cider", False) else None,
        "out": getattr(args, "out", None),
    }
    if getattr(args, "allow_missing", False):
        overrides["strict"] = False
    overrides.update(extra)
    return build_config(getattr(args, "config", None), overrides)


# ---------------------------------------------------------------- prepare


def cmd_prepare(args) -> int:
    overlaps = _parse_mapping(args.remove_overlap, "--remove-overlap", sep=":")
    cfg = _config_from_args(
        args,
        overlaps=overlaps,
        seeds=args.seed or None,
        train_fraction=args.train_fraction,
        eval_n=args.eval_n,
    )
    registry = _load_registry(cfg.datasets)
    digest = config_digest({"command": "prepare", **cfg.effective()})

    deduped: dict[str, Corpus] = dict(registry)
    removed_counts: dict[str, int] = {}
    for target in sorted(cfg.overlaps):
        source = cfg.overlaps[target]
        before = len(deduped[target])
        deduped[target] = remove_overlap(deduped[target], registry[source])
        removed_counts[target] = before - len(deduped[target])

    out_root = _out_dir(cfg.out, args.out)
    for seed in cfg.seeds:
        spec = SplitSpec(
            train_fraction=cfg.train_fraction,
            eval_per_dataset=cfg.eval_per_dataset,
            seed=seed,
        )
        split_dir = out_root / f"split-{seed}"
        holdouts: dict[str, Corpus] = {}
        dataset_info: dict[str, dict] = {}
        for ds in sorted(deduped):
            tune, holdout = split_corpus(deduped[ds], spec)
            holdouts[ds] = holdout
            save_corpus(tune, split_dir / "tune" / f"{ds}.jsonl")
            save_corpus(holdout, split_dir / "holdout" / f"{ds}.jsonl")
            dataset_info[ds] = {
                "input_digest": deduped[ds].digest,
                "removed_overlap": removed_counts.get(ds, 0),
                "tune_count": len(tune),
                "holdout_count": len(holdout),
                "tune_ids": tune.sample_ids(),
                "holdout_ids": holdout.sample_ids(),
            }
        eval_corpus = build_eval600(holdouts, spec)
        save_corpus(eval_corpus, split_dir / "Eval600.jsonl")
        write_manifest(
            split_dir,
            "prepare",
            digest,
            inputs={"corpora": _corpus_inputs(registry)},
            extra={
                "seed": seed,
                "train_fraction": cfg.train_fraction,
                "eval_n": cfg.eval_per_dataset,
                "datasets": dataset_info,
                "eval600_count": len(eval_corpus),
            },
        )
        print(f"prepared split-{seed}: {len(deduped)} datasets, "
              f"eval set of {len(eval_corpus)}")
    return EXIT_OK


# ----------------------------------------------------------- mock-generate


def cmd_mock_generate(args) -> int:
    corpus = load_corpus(args.corpus, args.dataset_id)
    records = mock_generate(corpus, args.tune, args.mode, args.rate, args.seed)
    out = Path(args.out)
    write_jsonl(out, records)
    print(f"wrote {len(records)} {args.mode} predictions to {out}")
    return EXIT_OK


# ------------------------------------------------------------------ score


def cmd_score(args) -> int:
    cfg = _config_from_args(args)
    registry = _load_registry(cfg.datasets)
    corpora = dict(registry)
    eval_id = None
    if args.eval_corpus:
        eval_corpus = load_corpus(args.eval_corpus)
        eval_id = eval_corpus.dataset_id
        corpora[eval_id] = eval_corpus

    plan = plan_runs(sorted(registry), include_eval=eval_id is not None,
                     eval_corpus_id=eval_id or "Eval600")
    paths = _expand_prediction_paths(args.predictions)
    store = ingest_predictions(paths, plan, corpora)
    if cfg.strict:
        validate_coverage(store, plan, corpora)
    tensor = build_tensor(plan, store, corpora, cfg.combo,
                          workers=cfg.workers, with_cider=cfg.cider)

    out = _out_dir(cfg.out, args.out)
    extra = write_tensor(out, tensor)
    datasets = list(tensor.datasets)
    write_csv(
        out / "mqd_matrix.csv",
        ["tune"] + datasets,
        [[t] + [tensor.mqd(t, e) for e in datasets] for t in datasets],
    )
    if eval_id is not None:
        eval_mqd = tensor.eval_mqd()
        write_csv(
            out / "mqd_eval.csv",
            ["tune", "eval_corpus", "mqd"],
            [[t, eval_id, eval_mqd[t]] for t in datasets],
        )
    digest = config_digest({"command": "score", **cfg.effective()})
    write_manifest(
        out,
        "score",
        digest,
        inputs={
            "corpora": _corpus_inputs(corpora),
            "predictions": {p.as_posix(): sha256_file(p) for p in sorted(paths)},
        },
        extra={
            "combo": tensor.combo.name,
            "datasets": datasets,
            "eval_corpus_id": eval_id,
            **extra,
        },
    )
    missing = sum(p["missing"] for p in extra["pairs"])
    empty = sum(p["empty"] for p in extra["pairs"])
    note = f" ({missing} missing, {empty} empty outputs)" if missing or empty else ""
    print(f"scored {len(plan.pairs)} pairs over {len(datasets)} datasets{note}")
    return EXIT_OK


# ---------------------------------------------------------------- quality


def _sq_rows(tensor: ScoreTensor, dq: dict[str, float]) -> list[dict]:
    rows = []
    for eval_ds in tensor.datasets:
        tuners = [t for t in tensor.datasets if t != eval_ds]
        per_sample: dict[str, dict[str, float]] = {}
        for tuner in tuners:
            for score in tensor.pair_scores[(tuner, eval_ds)]:
                per_sample.setdefault(score.sample_id, {})[tuner] = score.mq_s
        for sample_id in sorted(per_sample):
            sq = sample_quality(dq, per_sample[sample_id], eval_ds)
            rows.append({"dataset": eval_ds, "id": sample_id, "sq": sq})
    rows.sort(key=lambda row: (row["dataset"], -row["sq"], row["id"]))
    return rows


def cmd_quality(args) -> int:
    tensor_dir = Path(args.tensor)
    tensor, tensor_manifest = load_tensor(tensor_dir)
    dq = dataset_quality(tensor.dq_matrix())
    sq_rows = _sq_rows(tensor, dq)

    out = _out_dir(None, args.out)
    digest = config_digest({"command": "quality", "combo": tensor.combo.name})
    inputs = {"tensor": sha256_file(tensor_dir / "manifest.json")}

    sq_nested: dict[str, dict[str, float]] = {}
    for row in sq_rows:
        sq_nested.setdefault(row["dataset"], {})[row["id"]] = row["sq"]
    write_json(
        out / "quality_report.json",
        {
            "tool": TOOL_NAME,
            "version": __version__,
            "combo": tensor.combo.name,
            "datasets": list(tensor.datasets),
            "dq": dq,
            "sq": sq_nested,
            "config_digest": digest,
            "inputs": inputs,
        },
    )
    ranks = rank_descending(dq)
    write_csv(
        out / "dq.csv",
        ["dataset", "dq", "rank"],
        [[ds, dq[ds], ranks[ds]] for ds in tensor.datasets],
    )
    write_jsonl(out / "sq.jsonl", sq_rows)
    write_manifest(out, "quality", digest, inputs,
                   extra={"combo": tensor.combo.name, "datasets": list(tensor.datasets)})
    print(f"quality: DQ over {len(tensor.datasets)} datasets, {len(sq_rows)} SQ rows")
    return EXIT_OK


# --------------------------------------------------------------- ablate-mq


def cmd_ablate_mq(args) -> int:
    tensor_dir = Path(args.tensor)
    tensor, _ = load_tensor(tensor_dir)
    if tensor.eval_corpus_id is None:
        raise IncompleteInputError(
            "ablate-mq needs a tensor scored with an evaluation corpus "
            "(rerun `score` with --eval-corpus)"
        )

    out = _out_dir(None, args.out)
    report: dict[str, dict] = {}
    csv_rows: list[list] = []
    for combo in (C1, C2, C3):
        def mqd_for(pair: tuple[str, str]) -> float:
            scores = tensor.pair_scores[pair]
            return sum(meta_quality(s.metrics, combo) for s in scores) / len(scores)

        dq = {
            tune: 1.0 + sum(
                mqd_for((tune, eval_))
                for eval_ in tensor.datasets
                if eval_ != tune
            )
            for tune in tensor.datasets
        }
        eval_mqd = {
            tune: mqd_for((tune, tensor.eval_corpus_id)) for tune in tensor.datasets
        }
        dq_rank = rank_descending(dq)
        eval_rank = rank_descending(eval_mqd)
        agreement = pair_agreement(dq, eval_mqd)
        report[combo.name] = {
            "dq": dq,
            "dq_rank": dq_rank,
            "eval_mqd": eval_mqd,
            "eval_rank": eval_rank,
            "agreement": agreement,
        }
        for ds in tensor.datasets:
            csv_rows.append(
                [combo.name, ds, dq[ds], dq_rank[ds], eval_mqd[ds], eval_rank[ds], agreement]
            )

    digest = config_digest({"command": "ablate-mq"})
    inputs = {"tensor": sha256_file(tensor_dir / "manifest.json")}
    write_json(
        out / "ablate_mq.json",
        {
            "tool": TOOL_NAME,
            "version": __version__,
            "eval_corpus_id": tensor.eval_corpus_id,
            "combos": report,
            "config_digest": digest,
            "inputs": inputs,
        },
    )
    write_csv(
        out / "ablate_mq.csv",
        ["combo", "dataset", "dq", "dq_rank", "eval_mqd", "eval_rank", "agreement"],
        csv_rows,
    )
    write_manifest(out, "ablate-mq", digest, inputs)
    for name, block in report.items():
        print(f"{name}: rank agreement {block['agreement']:.3f}")
    return EXIT_OK


# ----------------------------------------------------------------- refine


def _load_sq(quality_dir: Path) -> dict[str, dict[str, float]]:
    report_path = quality_dir / "quality_report.json"
    if not report_path.exists():
        raise ValidationError(f"no quality_report.json under {quality_dir}")
    report = read_json(report_path)
    return {ds: dict(scores) for ds, scores in report["sq"].items()}


def _selection_payload(selection: Selection, corpus: Corpus) -> dict:
    payload = {
        "dataset": selection.dataset_id,
        "strategy": selection.strategy,
        "params": selection.params,
        "count": selection.count,
        "ids": list(selection.selected_ids),
        "corpus_digest": corpus.digest,
    }
    if selection.threshold is not None:
        payload["threshold"] = selection.threshold
    if selection.interval is not None:
        payload["interval"] = list(selection.interval)
    return payload


def _param_tag(value: float, prefix: str) -> str:
    return f"{prefix}{format(value * 100 if prefix == 'p' else value, 'g')}"


def cmd_refine(args) -> int:
    cfg = _config_from_args(args, seeds=str(args.seed) if args.seed is not None else None)
    registry = _load_registry(cfg.datasets)
    sq = _load_sq(Path(args.quality))
    missing = sorted(set(registry) - set(sq))
    if missing:
        raise IncompleteInputError(
            f"quality report lacks SQ for datasets: {', '.join(missing)}"
        )

    strategy = args.strategy
    if strategy in ("s1", "s2") and not args.portion:
        raise ValidationError(f"strategy {strategy} needs at least one --portion")
    if strategy == "s3" and not args.lam:
        raise ValidationError("strategy s3 needs at least one --lam")

    out = _out_dir(cfg.out, args.out)
    digest = config_digest({
        "command": "refine",
        "strategy": strategy,
        "portions": args.portion or [],
        "lambdas": args.lam or [],
        **cfg.effective(),
    })
    inputs = {
        "corpora": _corpus_inputs(registry),
        "quality": sha256_file(Path(args.quality) / "quality_report.json"),
    }

    manifest_files = []
    params = args.portion if strategy in ("s1", "s2") else args.lam
    for value in params:
        selections = []
        for ds in sorted(registry):
            corpus = registry[ds]
            if strategy == "s1":
                selection = refine_s1(corpus, sq[ds], value)
            elif strategy == "s2":
                count = portion_count(value, len(corpus))
                selection = refine_s2(corpus, count, cfg.seeds[0])
                selection = Selection(
                    dataset_id=selection.dataset_id,
                    strategy="s2",
                    params={"portion": value, "count": count, "seed": cfg.seeds[0]},
                    selected_ids=selection.selected_ids,
                )
            else:
                selection = refine_s3(corpus, sq[ds], value)
            selections.append(_selection_payload(selection, corpus))
        tag = _param_tag(value, "p" if strategy in ("s1", "s2") else "lam")
        filename = f"selection_{strategy}_{tag}.json"
        write_json(
            out / filename,
            {
                "tool": TOOL_NAME,
                "version": __version__,
                "strategy": strategy,
                "param": value,
                "selections": selections,
                "config_digest": digest,
                "inputs": inputs,
            },
        )
        manifest_files.append(filename)
        total = sum(s["count"] for s in selections)
        print(f"{filename}: kept {total} samples across {len(selections)} datasets")

    write_manifest(out, "refine", digest, inputs,
                   extra={"strategy": strategy, "selection_files": manifest_files})
    return EXIT_OK


# --------------------------------------------------------------- assemble


def cmd_assemble(args) -> int:
    cfg = _config_from_args(
        args,
        seeds=str(args.seed) if args.seed is not None else None,
        eval_n=args.eval_n,
    )
    registry = _load_registry(cfg.datasets)
    selection_path = Path(args.selection)
    if not selection_path.exists():
        raise ValidationError(f"selection manifest not found: {selection_path}")
    payload = read_json(selection_path)
    selections: dict[str, Selection] = {}
    for entry in payload["selections"]:
        selections[entry["dataset"]] = Selection(
            dataset_id=entry["dataset"],
            strategy=entry["strategy"],
            params=entry["params"],
            selected_ids=tuple(entry["ids"]),
            threshold=entry.get("threshold"),
            interval=tuple(entry["interval"]) if "interval" in entry else None,
        )

    tune, eval_ = assemble_revo_lion(
        selections, registry,
        eval_per_dataset=cfg.eval_per_dataset,
        seed=cfg.seeds[0],
    )
    out = _out_dir(cfg.out, args.out)
    save_corpus(tune, out / f"{tune.dataset_id}.jsonl")
    save_corpus(eval_, out / f"{eval_.dataset_id}.jsonl")
    digest = config_digest({
        "command": "assemble",
        "strategy": payload.get("strategy"),
        "param": payload.get("param"),
        "eval_n": cfg.eval_per_dataset,
        "seed": cfg.seeds[0],
    })
    write_manifest(
        out,
        "assemble",
        digest,
        inputs={
            "corpora": _corpus_inputs(registry),
            "selection": sha256_file(selection_path),
        },
        extra={
            "strategy": payload.get("strategy"),
            "param": payload.get("param"),
            "seed": cfg.seeds[0],
            "eval_n": cfg.eval_per_dataset,
            "tune_count": len(tune),
            "eval_count": len(eval_),
        },
    )
    print(f"assembled {tune.dataset_id} ({len(tune)}) and {eval_.dataset_id} ({len(eval_)})")
    return EXIT_OK


# ---------------------------------------------------------------- sq-cases


def cmd_sq_cases(args) -> int:
    if args.k < 0:
        raise ValidationError(f"--k must be >= 0, got {args.k}")
    cfg = _config_from_args(args)
    registry = _load_registry(cfg.datasets)
    tensor, _ = load_tensor(Path(args.tensor))
    quality_dir = Path(args.quality)
    sq = _load_sq(quality_dir)

    lines: list[str] = ["# Sample-quality showcases", ""]
    for ds in tensor.datasets:
        if ds not in sq or ds not in registry:
            raise IncompleteInputError(f"no SQ scores or corpus for dataset {ds}")
        by_id = registry[ds].by_id()
        ordered = sorted(sq[ds].items(), key=lambda item: (-item[1], item[0]))
        k = args.k
        if k > len(ordered):
            print(f"warning: k={k} clamped to {len(ordered)} for {ds}", file=sys.stderr)
            k = len(ordered)
        tuners = [t for t in tensor.datasets if t != ds]
        lines.append(f"## {ds}")
        for title, block in (("highest SQ", ordered[:k]), ("lowest SQ", ordered[-k:] if k else [])):
            lines.append(f"### {title}")
            for sample_id, value in block:
                sample = by_id[sample_id]
                lines.append(f"- `{sample_id}` sq={value!r}")
                lines.append(f"  - instruction: {sample.instruction}")
                lines.append(f"  - answer: {sample.answer}")
                for tuner in tuners:
                    scores = {
                        s.sample_id: s for s in tensor.pair_scores[(tuner, ds)]
                    }
                    score = scores[sample_id]
                    output = tensor.outputs[(tuner, ds)].get(sample_id, "")
                    lines.append(
                        f"  - generation[{tuner}] (mq_s={score.mq_s!r}): {output}"
                    )
            lines.append("")

    out = _out_dir(None, args.out)
    (out / "sq_cases.md").write_text("\n".join(lines) + "\n", encoding="utf-8")
    digest = config_digest({"command": "sq-cases", "k": args.k})
    write_manifest(
        out, "sq-cases", digest,
        inputs={
            "tensor": sha256_file(Path(args.tensor) / "manifest.json"),
            "quality": sha256_file(quality_dir / "quality_report.json"),
            "corpora": _corpus_inputs(registry),
        },
    )
    print(f"sq-cases: wrote showcases for {len(tensor.datasets)} datasets (k={args.k})")
    return EXIT_OK


# --------------------------------------------------------------- bench-eval


def cmd_bench_eval(args) -> int:
    corpus = load_corpus(args.corpus)
    paths = _expand_prediction_paths(args.predictions)
    by_id = corpus.by_id()
    predictions: dict[str, dict[str, str]] = {}
    origins: dict[tuple[str, str], str] = {}
    for path in paths:
        with path.open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                where = f"{path}:{lineno}"
                try:
                    record = json.loads(line)
                    label = record["tune_dataset"]
                    eval_ds = record["eval_dataset"]
                    sample_id = record["id"]
                    output = record["output"]
                except (KeyError, TypeError, ValueError):
                    raise ValidationError(
                        f"{where}: prediction records need keys "
                        "tune_dataset, eval_dataset, id, output"
                    ) from None
                if eval_ds != corpus.dataset_id:
                    raise ValidationError(
                        f"{where}: eval_dataset {eval_ds!r} does not match "
                        f"benchmark corpus {corpus.dataset_id!r}"
                    )
                if sample_id not in by_id:
                    raise ValidationError(
                        f"{where}: sample {sample_id!r} does not exist in {corpus.dataset_id}"
                    )
                if (label, sample_id) in origins:
                    raise ValidationError(
                        f"{where}: duplicate prediction for ({label}, {sample_id}); "
                        f"first seen at {origins[(label, sample_id)]}"
                    )
                origins[(label, sample_id)] = where
                predictions.setdefault(label, {})[sample_id] = output

    if not predictions:
        raise ValidationError("prediction files contain no records")
    if not getattr(args, "allow_missing", False):
        for label in sorted(predictions):
            for sample_id in corpus.sample_ids():
                if sample_id not in predictions[label]:
                    raise IncompleteInputError(
                        f"missing prediction for ({label}, {corpus.dataset_id}, {sample_id})"
                    )

    idf = cider_idf([tokenize(s.answer) for s in corpus.samples])
    metric_names = list(MQ_FIELDS) + ["cider"]
    report: dict[str, dict] = {}
    csv_rows: list[list] = []
    for label in sorted(predictions):
        scored: list[tuple[str, dict[str, float]]] = []
        for sample in sorted(corpus.samples, key=lambda s: s.sample_id):
            output = predictions[label].get(sample.sample_id)
            if output is None or not tokenize(output):
                values = {name: 0.0 for name in metric_names}
            else:
                vector = score_tokens(tokenize(output), tokenize(sample.answer), idf)
                values = vector.as_dict()
            scored.append((sample.sample_id, values))

        def mean_over(ids: list[str] | None = None) -> dict[str, float]:
            rows = [v for i, v in scored if ids is None or i in ids]
            return {
                name: sum(r[name] for r in rows) / len(rows) for name in metric_names
            }

        scopes: dict[str, dict[str, float]] = {"overall": mean_over()}
        sources = sorted({s.source_dataset for s in corpus.samples if s.source_dataset})
        for source in sources:
            ids = [s.sample_id for s in corpus.samples if s.source_dataset == source]
            scopes[source] = mean_over(ids)
        counts = {"overall": len(scored)}
        for source in sources:
            counts[source] = sum(
                1 for s in corpus.samples if s.source_dataset == source
            )
        report[label] = {
            scope: {"count": counts[scope], **values} for scope, values in scopes.items()
        }
        for scope in ["overall"] + sources:
            csv_rows.append(
                [label, scope, counts[scope]] + [scopes[scope][m] for m in metric_names]
            )

    out = _out_dir(None, args.out)
    digest = config_digest({"command": "bench-eval", "corpus": corpus.dataset_id})
    inputs = {
        "corpus": corpus.digest,
        "predictions": {p.as_posix(): sha256_file(p) for p in sorted(paths)},
    }
    write_json(
        out / "bench.json",
        {
            "tool": TOOL_NAME,
            "version": __version__,
            "corpus": corpus.dataset_id,
            "models": report,
            "config_digest": digest,
            "inputs": inputs,
        },
    )
    write_csv(out / "bench.csv", ["model", "scope", "count"] + metric_names, csv_rows)
    write_manifest(out, "bench-eval", digest, inputs)
    for label in sorted(report):
        overall = report[label]["overall"]
        print(f"{label}: cider={overall['cider']:.4f} over {overall['count']} samples")
    return EXIT_OK


# ------------------------------------------------------------------ verify


def cmd_verify(args) -> int:
    root = Path(args.path)
    if not root.exists():
        raise ValidationError(f"path not found: {root}")
    manifests = sorted(root.rglob("manifest.json"))
    if root.name == "manifest.json":
        manifests = [root]
        root = root.parent
    if not manifests:
        raise ValidationError(f"no manifest.json found under {root}")
    bad: list[str] = []
    checked = 0
    for manifest_path in manifests:
        manifest = read_json(manifest_path)
        base = manifest_path.parent
        for relpath, expected in sorted(manifest.get("files", {}).items()):
            target = base / relpath
            checked += 1
            if not target.exists():
                bad.append(f"{target}: missing")
            elif sha256_file(target) != expected:
                bad.append(f"{target}: digest mismatch")
    for line in bad:
        print(line, file=sys.stderr)
    print(f"verified {checked} files across {len(manifests)} manifests; "
          f"{len(bad)} problems")
    return EXIT_VALIDATION if bad else EXIT_OK


# ------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=TOOL_NAME, description=__doc__)
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_common(p, data=True, combo=False, workers=False):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--out", help="output directory")
        if data:
            p.add_argument("--data", action="append", metavar="ID=PATH",
                           help="register a dataset corpus (repeatable)")
        if combo:
            p.add_argument("--combo", help="MQ combo: C1, C2, C3, or metric list")
        if workers:
            p.add_argument("--workers", type=int, help="scoring worker threads")

    p = sub.add_parser("prepare", help="ingest, dedup, split, and build the eval set")
    add_common(p)
    p.add_argument("--seed", action="append", type=int,
                   help="split seed (repeat for multiple splits)")
    p.add_argument("--train-fraction", type=float, dest="train_fraction")
    p.add_argument("--eval-n", type=int, dest="eval_n",
                   help="evaluation samples drawn per dataset")
    p.add_argument("--remove-overlap", action="append", metavar="TARGET:SOURCE",
                   help="drop TARGET samples that also occur in SOURCE")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("mock-generate", help="produce fixture predictions")
    p.add_argument("--corpus", required=True, help="evaluation corpus JSONL")
    p.add_argument("--dataset-id", dest="dataset_id",
                   help="override the corpus id (default: file stem)")
    p.add_argument("--tune", required=True, help="tuning dataset label")
    p.add_argument("--mode", required=True, choices=["echo", "dropout", "gibberish"])
    p.add_argument("--rate", type=float, default=0.0, help="dropout rate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="prediction JSONL to write")
    p.set_defaults(func=cmd_mock_generate)

    p = sub.add_parser("score", help="score predictions into the cross-eval tensor")
    add_common(p, combo=True, workers=True)
    p.add_argument("--predictions", nargs="+", required=True,
                   help="prediction JSONL files or directories of them")
    p.add_argument("--eval-corpus", dest="eval_corpus",
                   help="merged evaluation corpus JSONL (adds (T, eval) pairs)")
    p.add_argument("--allow-missing", action="store_true", dest="allow_missing",
                   help="score missing cells as zero instead of failing")
    p.add_argument("--cider", action="store_true",
                   help="carry per-sample hold-out CIDEr in the tensor")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("quality", help="derive DQ and SQ reports from a tensor")
    p.add_argument("--tensor", required=True, help="score output directory")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_quality)

    p = sub.add_parser("ablate-mq", help="compare MQ combos C1/C2/C3 by ranking")
    p.add_argument("--tensor", required=True, help="score output directory")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ablate_mq)

    p = sub.add_parser("refine", help="select samples by SQ (S1/S2/S3)")
    add_common(p)
    p.add_argument("--quality", required=True, help="quality output directory")
    p.add_argument("--strategy", required=True, choices=["s1", "s2", "s3"])
    p.add_argument("--portion", action="append", type=float,
                   help="portion P in (0, 1] (repeatable; s1/s2)")
    p.add_argument("--lam", action="append", type=float,
                   help="lambda >= 0 (repeatable; s3)")
    p.add_argument("--seed", type=int, help="seed for the s2 baseline")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("assemble", help="assemble REVO-LION tune/eval corpora")
    add_common(p)
    p.add_argument("--selection", required=True, help="selection manifest JSON")
    p.add_argument("--eval-n", type=int, dest="eval_n")
    p.add_argument("--seed", type=int, help="seed for the eval draw")
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("sq-cases", help="showcase top/bottom SQ samples")
    add_common(p)
    p.add_argument("--tensor", required=True)
    p.add_argument("--quality", required=True)
    p.add_argument("--k", type=int, default=3)
    p.set_defaults(func=cmd_sq_cases)

    p = sub.add_parser("bench-eval", help="hold-out metrics of predictions vs a benchmark")
    p.add_argument("--corpus", required=True, help="benchmark corpus JSONL")
    p.add_argument("--predictions", nargs="+", required=True)
    p.add_argument("--allow-missing", action="store_true", dest="allow_missing")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench_eval)

    p = sub.add_parser("verify", help="re-check artifact digests")
    p.add_argument("--path", required=True, help="artifact directory (or manifest.json)")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except IncompleteInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCOMPLETE
    except LionForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def entrypoint() -> None:
    sys.exit(main())
