"""Flat key=value run configuration.

Schema (every key optional; `#` starts a comment):

    dataset.<ID> = path/to/corpus.jsonl   # registry of corpora
    overlap.<TARGET_ID> = <SOURCE_ID>     # drop TARGET samples found in SOURCE
    seeds = 101,202                       # one prepared split per seed
    train_fraction = 0.8
    eval_n = 600
    combo = C1                            # C1 | C2 | C3 | metric name list
    workers = 4                           # default: $LION_FORGE_WORKERS or 1
    strict = true                         # fail on missing prediction cells
    cider = false                         # carry per-sample CIDEr in tensors
    out = out/

Command-line flags override file values. The combo is validated here, so
a configuration naming `cider` as an MQ member is rejected before any
stage runs.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from .errors import ValidationError
from .quality import MQCombo, parse_combo

WORKERS_ENV = "LION_FORGE_WORKERS"

_SCALAR_KEYS = {
    "seeds", "train_fraction", "eval_n", "combo", "workers", "strict", "cider", "out",
}

_BOOL_VALUES = {
    "true": True, "yes": True, "1": True,
    "false": False, "no": False, "0": False,
}


def read_config_file(path: Path | str) -> dict[str, str]:
    """Raw key -> value strings from a flat config file."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"config file not found: {path}")
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not (key in _SCALAR_KEYS or key.startswith(("dataset.", "overlap."))):
            raise ValidationError(f"{path}:{lineno}: unknown config key {key!r}")
        if key in values:
            raise ValidationError(f"{path}:{lineno}: duplicate config key {key!r}")
        values[key] = value
    return values


def _parse_bool(key: str, value: str) -> bool:
    try:
        return _BOOL_VALUES[value.strip().lower()]
    except KeyError:
        raise ValidationError(f"config key {key!r} expects a boolean, got {value!r}") from None


def _parse_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ValidationError(f"config key {key!r} expects an integer, got {value!r}") from None


@dataclass(frozen=True)
class PipelineConfig:
    datasets: dict[str, str]
    overlaps: dict[str, str]
    seeds: tuple[int, ...]
    train_fraction: float
    eval_per_dataset: int
    combo: MQCombo
    workers: int
    strict: bool
    cider: bool
    out: str | None

    def effective(self) -> dict:
        """Semantic settings that feed the provenance digest.

        Worker count is excluded: it must never change artifact bytes.
        """
        return {
            "combo": self.combo.name,
            "members": list(self.combo.members),
            "seeds": list(self.seeds),
            "train_fraction": self.train_fraction,
            "eval_n": self.eval_per_dataset,
            "strict": self.strict,
            "cider": self.cider,
            "overlaps": dict(sorted(self.overlaps.items())),
        }


def build_config(
    config_path: str | None = None,
    overrides: dict | None = None,
) -> PipelineConfig:
    """Merge file values with CLI overrides and validate everything."""
    raw = read_config_file(config_path) if config_path else {}
    overrides = overrides or {}

    datasets = {
        key.split(".", 1)[1]: value
        for key, value in raw.items()
        if key.startswith("dataset.")
    }
    if overrides.get("datasets"):
        datasets = dict(overrides["datasets"])
    overlaps = {
        key.split(".", 1)[1]: value
        for key, value in raw.items()
        if key.startswith("overlap.")
    }
    if overrides.get("overlaps") is not None:
        overlaps = dict(overrides["overlaps"])

    def pick(key: str, fallback):
        if overrides.get(key) is not None:
            return overrides[key]
        if key in raw:
            return raw[key]
        return fallback

    seeds_value = pick("seeds", "0")
    if isinstance(seeds_value, str):
        try:
            seeds = tuple(int(part) for part in seeds_value.split(",") if part.strip())
        except ValueError:
            raise ValidationError(f"invalid seeds value {seeds_value!r}") from None
    else:
        seeds = tuple(int(s) for s in seeds_value)
    if not seeds:
        raise ValidationError("at least one seed is required")

    fraction_value = pick("train_fraction", 0.8)
    try:
        train_fraction = float(fraction_value)
    except ValueError:
        raise ValidationError(f"invalid train_fraction {fraction_value!r}") from None
    if not 0.0 < train_fraction < 1.0:
        raise ValidationError(f"train_fraction must be in (0, 1), got {train_fraction}")

    eval_value = pick("eval_n", 600)
    eval_n = eval_value if isinstance(eval_value, int) else _parse_int("eval_n", eval_value)
    if eval_n < 1:
        raise ValidationError(f"eval_n must be >= 1, got {eval_n}")

    combo_value = pick("combo", "C1")
    combo = combo_value if isinstance(combo_value, MQCombo) else parse_combo(combo_value)

    workers_value = pick("workers", os.environ.get(WORKERS_ENV, "1"))
    workers = workers_value if isinstance(workers_value, int) else _parse_int("workers", workers_value)
    if workers < 1:
        raise ValidationError(f"workers must be >= 1, got {workers}")

    strict_value = pick("strict", True)
    strict = strict_value if isinstance(strict_value, bool) else _parse_bool("strict", strict_value)

    cider_value = pick("cider", False)
    cider = cider_value if isinstance(cider_value, bool) else _parse_bool("cider", cider_value)

    out_value = pick("out", None)

    for target, source in overlaps.items():
        if target not in datasets:
            raise ValidationError(f"overlap target {target!r} is not a registered dataset")
        if source not in datasets:
            raise ValidationError(f"overlap source {source!r} is not a registered dataset")

    return PipelineConfig(
        datasets=datasets,
        overlaps=overlaps,
        seeds=seeds,
        train_fraction=train_fraction,
        eval_per_dataset=eval_n,
        combo=combo,
        workers=workers,
        strict=strict,
        cider=cider,
        out=str(out_value) if out_value is not None else None,
    )
