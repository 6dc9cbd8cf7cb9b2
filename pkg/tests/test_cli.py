import io
import json
import os

import pytest

from smellfault import cli
from smellfault.learn.families import ROSTER_IDS

def run(argv, environ=None):
    out = io.StringIO()
    code = cli.run(argv, environ or {}, out)
    return code, out.getvalue()


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("synth")
    code, _ = run(["synth", "--out", str(root), "--formulas", "600", "--workbooks", "2", "--sheets", "2",
                   "--fault-rate", "0.05", "--seed", "4"])
    assert code == 0
    return root


def corpus_args(root):
    return [str(root), "--labels", str(root / "labels.csv")]


# --- configuration -----------------------------------------------------------


def args_for(argv):
    return cli.build_parser().parse_args(argv)


def test_defaults_dump_round_trips(tmp_path):
    code, text = run(["config", "--dump-defaults"])
    assert code == 0
    doc = json.loads(text)
    assert doc["folds"] == 10 and doc["classifiers"] == list(ROSTER_IDS)
    path = tmp_path / "c.json"
    path.write_text(text)
    assert cli.resolve_config(args_for(["evaluate", "--config", str(path)]), {}) == cli.RunConfig()


def test_precedence_defaults_file_env_flags(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"seed": 1, "folds": 3, "out": "from-file"}))
    env = {"SMELLFAULT_CONFIG": str(path), "SMELLFAULT_SEED": "2", "SMELLFAULT_CLASSIFIERS": "svm, 3"}
    config = cli.resolve_config(args_for(["evaluate", "--seed", "5"]), env)
    assert (config.seed, config.folds, config.out, config.classifiers) == (5, 3, "from-file", ["svm", "3"])
    config = cli.resolve_config(args_for(["evaluate"]), env)
    assert config.seed == 2


def test_paper_mode_from_env_and_flag():
    assert cli.resolve_config(args_for(["evaluate"]), {"SMELLFAULT_PAPER_MODE": "1"}).mode == "paper"
    assert cli.resolve_config(args_for(["evaluate", "--paper-mode"]), {}).mode == "paper"


def test_config_hash_ignores_paths():
    a = cli.RunConfig(corpus=["x"], out="a")
    b = cli.RunConfig(corpus=["y"], out="b")
    assert a.hash() == b.hash() != cli.RunConfig(seed=1).hash()


@pytest.mark.parametrize("doc, message", [
    ({"colour": 1}, "unknown keys"),
    ({"synth": {"fault_rate": 2}}, "fault_rate"),
])
def test_bad_config_files(tmp_path, doc, message):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(cli.CliError, match=message):
        cli.resolve_config(args_for(["evaluate", "--config", str(path)]), {})


def test_bad_env_value():
    with pytest.raises(cli.CliError, match="SMELLFAULT_FOLDS"):
        cli.resolve_config(args_for(["evaluate"]), {"SMELLFAULT_FOLDS": "ten"})


@pytest.mark.parametrize("changes, message", [
    ({"folds": 1}, "at least 2"), ({"classifiers": ["forest"]}, "unknown classifiers"), ({"classifiers": []}, "empty"),
    ({"mode": "x"}, "mode"), ({"trees": []}, "trees"), ({"corpus": ["/no/such/path"]}, "does not exist"),
])
def test_validation(changes, message):
    with pytest.raises(cli.CliError, match=message):
        cli.RunConfig(**changes).validate()


# --- commands ----------------------------------------------------------------


def test_ingest_report(corpus_dir):
    code, text = run(["ingest", *corpus_args(corpus_dir)])
    report = json.loads(text)
    assert code == 0
    assert (report["workbooks"], report["formulas"], report["faulty"]) == (2, 600, 30)
    assert report["unparsed"] == [] and report["dangling_labels"] == []


def test_ingest_lists_unparsed_and_dangling(tmp_path):
    doc = {"name": "w", "worksheets": [{"name": "S", "cells": [
        {"row": 1, "col": 1, "kind": "formula", "value": "=SUM("},
        {"row": 2, "col": 1, "kind": "number", "value": 3}]}]}
    (tmp_path / "w.json").write_text(json.dumps(doc))
    (tmp_path / "labels.csv").write_text("workbook,worksheet,cell,label\nw,S,A2,faulty\n")
    _, text = run(["ingest", str(tmp_path / "w.json"), "--labels", str(tmp_path / "labels.csv")])
    report = json.loads(text)
    assert [u["cell"] for u in report["unparsed"]] == ["w!S!A1"]
    assert report["dangling_labels"] == ["w!S!A2"]


def test_full_roster_and_matrix_composability(corpus_dir, tmp_path):
    matrix = tmp_path / "m.csv"
    code, _ = run(["smells", *corpus_args(corpus_dir), "--out", str(matrix)])
    assert code == 0 and matrix.read_text().count("\n") == 601
    common = ["--folds", "3", "--paper-mode", "--seed", "0"]
    assert run(["evaluate", *corpus_args(corpus_dir), "--out", str(tmp_path / "one"), *common])[0] == 0
    assert run(["evaluate", "--from-matrix", str(matrix), "--out", str(tmp_path / "two"), *common])[0] == 0
    one, two = tmp_path / "one", tmp_path / "two"
    doc = json.loads((one / "results.json").read_text())
    assert [e["classifier"] for e in doc["entries"]] == list(ROSTER_IDS)
    for name in ("results.json", "plot.csv", "iso_f1.csv"):
        assert (one / name).read_bytes() == (two / name).read_bytes()
    assert len((one / "plot.csv").read_text().splitlines()) == 24
    assert oct(os.stat(one / "results.json").st_mode & 0o777) == "0o644"


def test_report_shows_f1(tmp_path):
    doc = {"corpus": "c", "seed": 0, "config_hash": "h", "entries": [
        {"classifier": "adaboost", "params": [5], "pooled": {"tp": 0, "fp": 0, "tn": 0, "fn": 0,
                                                           "p": 0.30, "r": 0.71, "f1": 0.4217821782178218}}]}
    path = tmp_path / "results.json"
    path.write_text(json.dumps(doc))
    code, text = run(["report", str(path)])
    assert code == 0
    assert text.splitlines()[2].split() == ["adaboost", "5", "0.30", "0.71", "0.42"]


def test_malformed_results_file(tmp_path):
    path = tmp_path / "results.json"
    path.write_text('{"entries": [{}]}')
    with pytest.raises(cli.CliError, match="malformed"):
        cli.cmd_report(path)


# --- exit codes and atomic output ----------------------------------------------


def test_main_reports_structured_errors(capsys, tmp_path):
    assert cli.main(["evaluate", str(tmp_path), "--folds", "1"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "CliError" and "folds" in err["message"]


def test_failed_evaluation_leaves_no_outputs(tmp_path, corpus_dir):
    out = tmp_path / "out"
    # 30 faulty formulas cannot fill 50 folds
    assert cli.main(["evaluate", *corpus_args(corpus_dir), "--folds", "50", "--out", str(out)]) == 2
    assert not out.exists() or not any(out.iterdir())


def test_synth_requires_out():
    with pytest.raises(cli.CliError, match="--out"):
        run(["synth"])


def test_write_outputs_rolls_back(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        cli.write_outputs({tmp_path / "a.txt": "a", blocker / "b.txt": "b"})
    assert not (tmp_path / "a.txt").exists()
    assert [p.name for p in tmp_path.iterdir()] == ["file"]
