from __future__ import annotations

import pytest

from lion_forge.config import build_config, read_config_file
from lion_forge.errors import ValidationError


def write_config(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text, encoding="utf-8")
    return str(path)


FULL = """
# registry
dataset.DetGPT = data/detgpt.jsonl
dataset.LAMM = data/lamm.jsonl
overlap.DetGPT = LAMM
seeds = 101,202
train_fraction = 0.8
eval_n = 600
combo = C1
workers = 4
strict = true
cider = false
out = artifacts/
"""


def test_full_config_parses(tmp_path):
    cfg = build_config(write_config(tmp_path, FULL))
    assert cfg.datasets == {"DetGPT": "data/detgpt.jsonl", "LAMM": "data/lamm.jsonl"}
    assert cfg.overlaps == {"DetGPT": "LAMM"}
    assert cfg.seeds == (101, 202)
    assert cfg.train_fraction == 0.8
    assert cfg.eval_per_dataset == 600
    assert cfg.combo.name == "C1"
    assert cfg.workers == 4
    assert cfg.strict is True
    assert cfg.cider is False
    assert cfg.out == "artifacts/"


def test_defaults_without_file():
    cfg = build_config(None, {"datasets": {"A": "a.jsonl", "B": "b.jsonl"}})
    assert cfg.seeds == (0,)
    assert cfg.combo.name == "C1"
    assert cfg.strict is True
    assert cfg.workers >= 1


def test_unknown_key_rejected(tmp_path):
    with pytest.raises(ValidationError, match="unknown config key"):
        read_config_file(write_config(tmp_path, "evil = 1\n"))


def test_duplicate_key_rejected(tmp_path):
    with pytest.raises(ValidationError, match="duplicate"):
        read_config_file(write_config(tmp_path, "seeds = 1\nseeds = 2\n"))


def test_missing_config_file():
    with pytest.raises(ValidationError, match="not found"):
        build_config("does/not/exist.cfg")


def test_cider_in_combo_rejected(tmp_path):
    path = write_config(tmp_path, "combo = b4,meteor,cider\n")
    with pytest.raises(ValidationError, match="hold-out"):
        build_config(path)


def test_overrides_beat_file(tmp_path):
    path = write_config(tmp_path, FULL)
    cfg = build_config(path, {"combo": "C3", "strict": False, "seeds": "7"})
    assert cfg.combo.name == "C3"
    assert cfg.strict is False
    assert cfg.seeds == (7,)


def test_overlap_requires_registered_datasets(tmp_path):
    path = write_config(tmp_path, "dataset.A = a.jsonl\noverlap.A = Ghost\n")
    with pytest.raises(ValidationError, match="Ghost"):
        build_config(path)


def test_bad_values_rejected(tmp_path):
    for line, message in [
        ("train_fraction = 1.5", "train_fraction"),
        ("train_fraction = abc", "train_fraction"),
        ("eval_n = 0", "eval_n"),
        ("workers = 0", "workers"),
        ("strict = maybe", "boolean"),
        ("seeds = 1,x", "seeds"),
    ]:
        with pytest.raises(ValidationError, match=message):
            build_config(write_config(tmp_path, line + "\n"))


def test_workers_env_default(tmp_path, monkeypatch):
    monkeypatch.setenv("LION_FORGE_WORKERS", "6")
    cfg = build_config(None, {})
    assert cfg.workers == 6
    monkeypatch.delenv("LION_FORGE_WORKERS")
    assert build_config(None, {}).workers == 1


def test_comments_and_blank_lines(tmp_path):
    path = write_config(tmp_path, "\n# comment only\nseeds = 3 # trailing\n\n")
    assert build_config(path).seeds == (3,)
