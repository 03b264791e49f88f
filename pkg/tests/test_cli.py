from __future__ import annotations

import json
from pathlib import Path

import pytest

from lion_forge.canonical import read_json
from lion_forge.cli import main

from helpers import build_corpus, data_flags, registry_files, write_predictions

DATASETS = ("Alpha", "Beta", "Gamma")


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Run the whole CLI pipeline once over a small scripted world."""
    root = tmp_path_factory.mktemp("pipeline")
    # fixed-length answers make every echo-scored cell exactly equal, so the
    # ablation rankings are fully tied
    corpora = {
        ds: build_corpus(ds, 15, seed=3, min_len=12, max_len=12) for ds in DATASETS
    }
    sources = registry_files(root, corpora)

    assert main(
        ["prepare", *data_flags(sources), "--seed", "11",
         "--train-fraction", "0.8", "--eval-n", "2", "--out", str(root / "prep")]
    ) == 0
    split = root / "prep" / "split-11"

    tune_files = {ds: str(split / "tune" / f"{ds}.jsonl") for ds in DATASETS}
    preds = root / "preds"
    preds.mkdir()
    for tune in DATASETS:
        for eval_ in DATASETS:
            if tune != eval_:
                assert main(
                    ["mock-generate", "--corpus", tune_files[eval_], "--tune", tune,
                     "--mode", "echo", "--out", str(preds / f"{tune}__{eval_}.jsonl")]
                ) == 0
        assert main(
            ["mock-generate", "--corpus", str(split / "Eval600.jsonl"), "--tune", tune,
             "--mode", "echo", "--out", str(preds / f"{tune}__Eval600.jsonl")]
        ) == 0

    tensor = root / "tensor"
    assert main(
        ["score", *data_flags(tune_files), "--eval-corpus", str(split / "Eval600.jsonl"),
         "--predictions", str(preds), "--combo", "C1", "--out", str(tensor)]
    ) == 0

    quality = root / "quality"
    assert main(["quality", "--tensor", str(tensor), "--out", str(quality)]) == 0

    ablate = root / "ablate"
    assert main(["ablate-mq", "--tensor", str(tensor), "--out", str(ablate)]) == 0

    refined = root / "refined"
    assert main(
        ["refine", *data_flags(tune_files), "--quality", str(quality),
         "--strategy", "s1", "--portion", "0.5", "--out", str(refined)]
    ) == 0

    lion = root / "lion"
    assert main(
        ["assemble", *data_flags(tune_files),
         "--selection", str(refined / "selection_s1_p50.json"),
         "--eval-n", "2", "--seed", "13", "--out", str(lion)]
    ) == 0

    cases = root / "cases"
    assert main(
        ["sq-cases", *data_flags(tune_files), "--tensor", str(tensor),
         "--quality", str(quality), "--k", "1", "--out", str(cases)]
    ) == 0

    bench_preds = root / "bench_preds.jsonl"
    assert main(
        ["mock-generate", "--corpus", str(lion / "REVO-LION-Eval.jsonl"),
         "--tune", "echo-model", "--mode", "echo", "--out", str(bench_preds)]
    ) == 0
    bench = root / "bench"
    assert main(
        ["bench-eval", "--corpus", str(lion / "REVO-LION-Eval.jsonl"),
         "--predictions", str(bench_preds), "--out", str(bench)]
    ) == 0

    return {
        "root": root, "split": split, "tensor": tensor, "quality": quality,
        "ablate": ablate, "refined": refined, "lion": lion, "cases": cases,
        "bench": bench, "tune_files": tune_files, "preds": preds,
        "sources": sources,
    }


def test_prepare_outputs(pipeline):
    split = pipeline["split"]
    manifest = read_json(split / "manifest.json")
    assert manifest["command"] == "prepare"
    for ds in DATASETS:
        info = manifest["datasets"][ds]
        assert info["tune_count"] == 12
        assert info["holdout_count"] == 3
        assert len(info["tune_ids"]) == 12
        assert set(info["tune_ids"]).isdisjoint(info["holdout_ids"])
    eval_lines = (split / "Eval600.jsonl").read_text().splitlines()
    assert len(eval_lines) == 6  # two per dataset
    assert manifest["eval600_count"] == 6


def test_score_tensor_layout(pipeline):
    manifest = read_json(pipeline["tensor"] / "manifest.json")
    assert manifest["command"] == "score"
    assert manifest["datasets"] == list(DATASETS)
    assert manifest["eval_corpus_id"] == "Eval600"
    assert len(manifest["pairs"]) == 9  # 6 cross + 3 eval pairs
    assert all(p["missing"] == 0 and p["empty"] == 0 for p in manifest["pairs"])
    matrix = (pipeline["tensor"] / "mqd_matrix.csv").read_text().splitlines()
    assert matrix[0] == "tune,Alpha,Beta,Gamma"
    assert len(matrix) == 4
    eval_csv = (pipeline["tensor"] / "mqd_eval.csv").read_text().splitlines()
    assert len(eval_csv) == 4


def test_quality_report(pipeline):
    report = read_json(pipeline["quality"] / "quality_report.json")
    assert report["combo"] == "C1"
    # echo generations: every DQ close to |S|, every SQ positive
    for value in report["dq"].values():
        assert value == pytest.approx(3.0, abs=1e-3)
    rows = [
        json.loads(line)
        for line in (pipeline["quality"] / "sq.jsonl").read_text().splitlines()
    ]
    assert len(rows) == 36  # 3 datasets x 12 samples
    for row in rows:
        assert row["sq"] > 0
    # sorted by dataset, then sq descending, then id
    keys = [(r["dataset"], -r["sq"], r["id"]) for r in rows]
    assert keys == sorted(keys)


def test_ablate_agreement_all_tied(pipeline):
    report = read_json(pipeline["ablate"] / "ablate_mq.json")
    for combo in ("C1", "C2", "C3"):
        assert report["combos"][combo]["agreement"] == 1.0
    csv_lines = (pipeline["ablate"] / "ablate_mq.csv").read_text().splitlines()
    assert csv_lines[0].startswith("combo,dataset,dq,dq_rank")
    assert len(csv_lines) == 1 + 3 * len(DATASETS)


def test_refine_selection_counts(pipeline):
    payload = read_json(pipeline["refined"] / "selection_s1_p50.json")
    assert payload["strategy"] == "s1"
    for entry in payload["selections"]:
        assert entry["count"] == 6  # ceil(0.5 * 12)
        assert len(entry["ids"]) == 6
        assert "threshold" in entry


def test_assemble_outputs(pipeline):
    lion = pipeline["lion"]
    manifest = read_json(lion / "manifest.json")
    assert manifest["tune_count"] == 12  # (6 - 2) x 3
    assert manifest["eval_count"] == 6
    eval_rows = [
        json.loads(line)
        for line in (lion / "REVO-LION-Eval.jsonl").read_text().splitlines()
    ]
    per_source = {}
    for row in eval_rows:
        per_source[row["source"]] = per_source.get(row["source"], 0) + 1
    assert per_source == {ds: 2 for ds in DATASETS}


def test_sq_cases_report(pipeline):
    text = (pipeline["cases"] / "sq_cases.md").read_text()
    for ds in DATASETS:
        assert f"## {ds}" in text
    assert "highest SQ" in text and "lowest SQ" in text
    assert "generation[" in text


def test_bench_eval_echo_scores(pipeline):
    report = read_json(pipeline["bench"] / "bench.json")
    overall = report["models"]["echo-model"]["overall"]
    assert overall["count"] == 6
    assert overall["b1"] == pytest.approx(1.0)
    assert overall["rouge_l"] == pytest.approx(1.0)
    assert overall["cider"] > 90.0
    # per-source breakdown present for merged corpora
    assert set(report["models"]["echo-model"]) == {"overall", *DATASETS}


def test_verify_all_artifacts(pipeline):
    assert main(["verify", "--path", str(pipeline["root"])]) == 0


def test_verify_detects_tampering(pipeline, tmp_path):
    import shutil

    copy = tmp_path / "tampered"
    shutil.copytree(pipeline["tensor"], copy)
    target = next(iter(sorted((copy / "pairs").glob("*.json"))))
    target.write_text(target.read_text().replace("1.0", "0.9"), encoding="utf-8")
    assert main(["verify", "--path", str(copy)]) == 1


# ------------------------------------------------------------- error paths


def test_prepare_missing_file_exit_1(tmp_path, capsys):
    code = main(["prepare", "--data", "A=missing.jsonl", "--out", str(tmp_path / "o")])
    assert code == 1
    assert "missing.jsonl" in capsys.readouterr().err


def test_score_strict_missing_cell_exit_2(tmp_path, capsys):
    corpora = {ds: build_corpus(ds, 4, seed=1) for ds in ("A", "B")}
    sources = registry_files(tmp_path, corpora)
    from lion_forge.crosseval import mock_generate

    write_predictions(
        tmp_path / "a_b.jsonl", mock_generate(corpora["B"], "A", "echo")
    )
    records = mock_generate(corpora["A"], "B", "echo")
    write_predictions(tmp_path / "b_a.jsonl", records[:-1])  # drop one cell
    code = main(
        ["score", *data_flags(sources), "--predictions",
         str(tmp_path / "a_b.jsonl"), str(tmp_path / "b_a.jsonl"),
         "--out", str(tmp_path / "t")]
    )
    assert code == 2
    err = capsys.readouterr().err
    assert "(B, A," in err and records[-1]["id"] in err


def test_score_allow_missing_downgrades(tmp_path):
    corpora = {ds: build_corpus(ds, 4, seed=1) for ds in ("A", "B")}
    sources = registry_files(tmp_path, corpora)
    from lion_forge.crosseval import mock_generate

    write_predictions(
        tmp_path / "a_b.jsonl", mock_generate(corpora["B"], "A", "echo")
    )
    write_predictions(
        tmp_path / "b_a.jsonl", mock_generate(corpora["A"], "B", "echo")[:-1]
    )
    code = main(
        ["score", *data_flags(sources), "--predictions",
         str(tmp_path / "a_b.jsonl"), str(tmp_path / "b_a.jsonl"),
         "--allow-missing", "--out", str(tmp_path / "t")]
    )
    assert code == 0
    manifest = read_json(tmp_path / "t" / "manifest.json")
    assert sum(p["missing"] for p in manifest["pairs"]) == 1


def test_cider_combo_rejected_exit_1(tmp_path, capsys):
    corpora = {ds: build_corpus(ds, 3, seed=1) for ds in ("A", "B")}
    sources = registry_files(tmp_path, corpora)
    code = main(
        ["score", *data_flags(sources), "--combo", "meteor,cider",
         "--predictions", str(tmp_path), "--out", str(tmp_path / "t")]
    )
    assert code == 1
    assert "hold-out" in capsys.readouterr().err


def test_unknown_command_exit_1(capsys):
    assert main(["transmogrify"]) == 1


def test_bad_flag_value_exit_1(tmp_path):
    assert main(["mock-generate", "--corpus", "x.jsonl", "--tune", "T",
                 "--mode", "paraphrase", "--out", "o.jsonl"]) == 1


def test_ablate_requires_eval_pairs(tmp_path, capsys):
    corpora = {ds: build_corpus(ds, 3, seed=2) for ds in ("A", "B")}
    sources = registry_files(tmp_path, corpora)
    from lion_forge.crosseval import mock_generate

    for tune, eval_ in (("A", "B"), ("B", "A")):
        write_predictions(
            tmp_path / f"{tune}__{eval_}.jsonl",
            mock_generate(corpora[eval_], tune, "echo"),
        )
    assert main(
        ["score", *data_flags(sources),
         "--predictions", str(tmp_path / "A__B.jsonl"), str(tmp_path / "B__A.jsonl"),
         "--out", str(tmp_path / "t")]
    ) == 0
    code = main(["ablate-mq", "--tensor", str(tmp_path / "t"), "--out", str(tmp_path / "a")])
    assert code == 2
