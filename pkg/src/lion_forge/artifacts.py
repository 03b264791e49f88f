"""Artifact I/O: provenance manifests, tensor files, CSV tables.

Every command writes its outputs plus a `manifest.json` naming the tool
version, a digest of the effective configuration, digests of the inputs,
and digests of every written file. `verify` re-checks those digests.
Nothing volatile (timestamps, absolute paths, worker counts) enters an
artifact, so identical inputs always reproduce identical bytes.
"""

from __future__ import annotations

from pathlib import Path

from . import __version__
from .canonical import (
    canonical_json,
    read_json,
    sha256_file,
    sha256_text,
    write_json,
)
from .crosseval import ScoreTensor
from .errors import ValidationError
from .metrics import MetricVector
from .quality import MQCombo, PairScore, parse_combo

TOOL_NAME = "lion-forge"


def config_digest(effective: dict) -> str:
    return sha256_text(canonical_json(effective))


def write_manifest(
    out_dir: Path,
    command: str,
    digest: str,
    inputs: dict,
    extra: dict | None = None,
) -> None:
    """Digest every file under out_dir and record it in manifest.json."""
    files = {}
    for path in sorted(out_dir.rglob("*")):
        if path.is_file() and path.name != "manifest.json":
            files[path.relative_to(out_dir).as_posix()] = sha256_file(path)
    manifest = {
        "tool": TOOL_NAME,
        "version": __version__,
        "command": command,
        "config_digest": digest,
        "inputs": inputs,
        "files": files,
    }
    if extra:
        manifest.update(extra)
    write_json(out_dir / "manifest.json", manifest)


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    """Minimal deterministic CSV; floats keep full round-trip precision."""

    def cell(value) -> str:
        if isinstance(value, float):
            return repr(value)
        text = str(value)
        if any(ch in text for ch in ",\"\n"):
            text = '"' + text.replace('"', '""') + '"'
        return text

    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)] + [",".join(cell(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def pair_filename(tune: str, eval_: str) -> str:
    return f"pairs/{tune}__{eval_}.json"


def write_tensor(out_dir: Path, tensor: ScoreTensor) -> dict:
    """Per-pair score files; returns the pair index for the manifest."""
    pair_index = []
    for tune, eval_ in sorted(tensor.pair_scores):
        scores = tensor.pair_scores[(tune, eval_)]
        samples = []
        for score in scores:
            entry = {
                "id": score.sample_id,
                "output": tensor.outputs[(tune, eval_)].get(score.sample_id, ""),
                "metrics": score.metrics.as_dict(),
                "mq_s": score.mq_s,
            }
            if score.flag is not None:
                entry["flag"] = score.flag
            samples.append(entry)
        relpath = pair_filename(tune, eval_)
        write_json(
            out_dir / relpath,
            {
                "tune_dataset": tune,
                "eval_dataset": eval_,
                "combo": tensor.combo.name,
                "mqd": tensor.mqd(tune, eval_),
                "samples": samples,
            },
        )
        pair_index.append(
            {
                "tune": tune,
                "eval": eval_,
                "file": relpath,
                "mqd": tensor.mqd(tune, eval_),
                "missing": sum(1 for s in scores if s.flag == "missing"),
                "empty": sum(1 for s in scores if s.flag == "empty"),
            }
        )
    return {"pairs": pair_index}


def load_tensor(tensor_dir: Path) -> tuple[ScoreTensor, dict]:
    """Rebuild a ScoreTensor from a `score` output directory."""
    manifest_path = tensor_dir / "manifest.json"
    if not manifest_path.exists():
        raise ValidationError(f"no manifest.json under {tensor_dir}")
    manifest = read_json(manifest_path)
    if manifest.get("command") != "score":
        raise ValidationError(f"{manifest_path} is not a score-tensor manifest")
    combo = parse_combo(manifest["combo"])
    pair_scores: dict[tuple[str, str], list[PairScore]] = {}
    outputs: dict[tuple[str, str], dict[str, str]] = {}
    for entry in manifest["pairs"]:
        payload = read_json(tensor_dir / entry["file"])
        tune, eval_ = payload["tune_dataset"], payload["eval_dataset"]
        scores = []
        outs = {}
        for row in payload["samples"]:
            metrics = MetricVector(
                b1=row["metrics"]["b1"],
                b2=row["metrics"]["b2"],
                b3=row["metrics"]["b3"],
                b4=row["metrics"]["b4"],
                meteor=row["metrics"]["meteor"],
                rouge_l=row["metrics"]["rouge_l"],
                cider=row["metrics"].get("cider"),
            )
            scores.append(
                PairScore(tune, eval_, row["id"], metrics, row["mq_s"], row.get("flag"))
            )
            outs[row["id"]] = row["output"]
        pair_scores[(tune, eval_)] = scores
        outputs[(tune, eval_)] = outs
    return (
        ScoreTensor(
            combo=combo,
            datasets=tuple(manifest["datasets"]),
            eval_corpus_id=manifest.get("eval_corpus_id"),
            pair_scores=pair_scores,
            outputs=outputs,
        ),
        manifest,
    )


def rank_descending(values: dict[str, float]) -> dict[str, int]:
    """Competition ranks, 1 = best; exact ties share a rank."""
    return {
        key: 1 + sum(1 for other in values.values() if other > value)
        for key, value in values.items()
    }


def pair_agreement(a: dict[str, float], b: dict[str, float]) -> float:
    """Fraction of dataset pairs ordered the same way by both score maps."""
    keys = sorted(a)
    if sorted(b) != keys:
        raise ValidationError("agreement requires identical dataset sets")
    if len(keys) < 2:
        return 1.0

    def sign(x: float) -> int:
        return (x > 0) - (x < 0)

    total = 0
    agree = 0
    for i, ki in enumerate(keys):
        for kj in keys[i + 1 :]:
            total += 1
            if sign(a[ki] - a[kj]) == sign(b[ki] - b[kj]):
                agree += 1
    return agree / total
