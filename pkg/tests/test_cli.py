import json

import pytest

from stategen.cli import main
from stategen.corpus import (CampaignConfig, Corpus, load_corpus, run_campaign, save_corpus,
                             corpus_to_json)


@pytest.fixture
def corpus_path(tmp_path):
    path = tmp_path / "c.json"
    assert main(["generate", "--scenario", "all", "--programs", "6", "--seed", "3",
                 "--out", str(path)]) == 0
    return path


def test_generate_is_byte_identical(tmp_path, corpus_path):
    again = tmp_path / "again.json"
    main(["generate", "--scenario", "all", "--programs", "6", "--seed", "3",
          "--out", str(again)])
    assert again.read_bytes() == corpus_path.read_bytes()
    c = load_corpus(corpus_path)
    assert len(c.entries) == 18
    assert {e.scenario for e in c.entries} == {"session", "tensor", "mcp"}
    assert c.recorder("tensor") is not None


def test_single_program_campaign(tmp_path):
    path = tmp_path / "one.json"
    assert main(["generate", "--scenario", "mcp", "--programs", "1", "--out", str(path)]) == 0
    assert [e.id for e in load_corpus(path).entries] == ["mcp-000"]


def test_config_file_and_unknown_keys(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "session", "programs": 2, "split": "none"}))
    out = tmp_path / "c.json"
    assert main(["generate", "--config", str(cfg), "--out", str(out)]) == 0
    entries = load_corpus(out).entries
    assert len(entries) == 2 and all(e.program.split is None for e in entries)
    with pytest.raises(ValueError):
        CampaignConfig.from_dict({"programz": 3})


def test_translate_evaluate_report(tmp_path, corpus_path, capsys):
    assert main(["translate", str(corpus_path)]) == 0
    c = load_corpus(corpus_path)
    assert all(e.transcript.outcome == "accepted" and e.instruction for e in c.entries)
    verdicts = tmp_path / "v.jsonl"
    assert main(["evaluate", str(corpus_path), "--reference", "--out", str(verdicts)]) == 0
    assert "pass@1 1.000 over 18 tasks" in capsys.readouterr().out
    rows = [json.loads(ln) for ln in verdicts.read_text().splitlines()]
    assert len(rows) == 18 and all(r["passed"] for r in rows)
    assert main(["report", str(corpus_path), "--verdicts", str(verdicts)]) == 0
    out = capsys.readouterr().out
    assert "session" in out and "pass@1" in out


def test_evaluate_candidates_file(tmp_path, corpus_path, capsys):
    c = load_corpus(corpus_path)
    first, second = c.entries[0], c.entries[1]
    cands = tmp_path / "cands.jsonl"
    cands.write_text("\n".join(json.dumps(r) for r in [
        {"id": first.id, "candidate": first.source},
        {"id": second.id, "candidate": "this is not a program ("},
        {"id": "ghost-999", "candidate": ""},
    ]) + "\n")
    verdicts = tmp_path / "v.jsonl"
    assert main(["evaluate", str(corpus_path), "--candidates", str(cands),
                 "--out", str(verdicts)]) == 0
    captured = capsys.readouterr()
    assert "unknown entry id ghost-999" in captured.err
    assert "missing candidate" in captured.err
    rows = {r["task_id"]: r for r in map(json.loads, verdicts.read_text().splitlines())}
    assert rows[first.id]["passed"] and rows[second.id]["error_class"] == "Syntax"


def test_metrics_writes_files(tmp_path, corpus_path):
    out = tmp_path / "m"
    assert main(["metrics", str(corpus_path), "--out", str(out)]) == 0
    stats = json.loads((out / "c_stats.json").read_text())
    assert set(stats) == {"session", "tensor", "mcp"}
    lines = (out / "c_curves.csv").read_text().splitlines()
    assert lines[0] == "series,programs,atc" and len(lines) == 1 + 18


def test_empty_corpus_reports_no_entries(tmp_path, capsys):
    path = tmp_path / "empty.json"
    save_corpus(path, corpus_to_json([]))
    assert main(["report", str(path)]) == 1
    assert "no entries" in capsys.readouterr().out
    assert main(["evaluate", str(path), "--reference"]) == 1


def test_newer_schema_rejected(tmp_path):
    path = tmp_path / "future.json"
    path.write_text(json.dumps({"schema_version": 99, "entries": []}))
    with pytest.raises(ValueError):
        load_corpus(path)


def test_corpus_round_trip():
    camp = run_campaign(CampaignConfig(scenario="tensor", programs=4))
    d = corpus_to_json([camp])
    c = Corpus([e for e in camp.entries], d["campaigns"])
    assert c.to_json() == json.loads(json.dumps(d))
