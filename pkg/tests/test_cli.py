# tests/test_cli.py
import json

import pandas as pd
import pytest

from app.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from tests.conftest import data_path, read_golden

SYNTHETIC = data_path("synthetic_concepts.csv")


def test_analyze_writes_golden_report(tmp_path):
    output = tmp_path / "report.tsv"
    assert main(["analyze", "--input", SYNTHETIC, "--output", str(output)]) == EXIT_OK
    assert output.read_text(encoding="utf-8") == read_golden("synthetic_report.tsv")


def test_analyze_json_format(tmp_path):
    output = tmp_path / "report.json"
    assert main(["analyze", "--input", SYNTHETIC, "--format", "json", "--output", str(output)]) == EXIT_OK
    payload = json.loads(output.read_text(encoding="utf-8"))
    assert [row["id"] for row in payload] == list(range(1, 15))


def test_analyze_with_tracking(tmp_path, monkeypatch):
    calls = []
    monkeypatch.setattr("app.tracking.log_analysis",
                        lambda rows, thresholds, options: calls.append(len(rows)) or "run-1")
    output = tmp_path / "report.tsv"
    assert main(["analyze", "--input", SYNTHETIC, "--output", str(output), "--track"]) == EXIT_OK
    assert calls == [14]


def test_fit_command(tmp_path):
    output = tmp_path / "fits.tsv"
    assert main(["fit", "--input", SYNTHETIC, "--model", "be", "--output", str(output)]) == EXIT_OK
    df = pd.read_csv(output, sep="\t")
    assert len(df) == 14
    assert set(df["model"]) == {"BE"}


def test_simulate_command(tmp_path):
    output = tmp_path / "hist.csv"
    code = main(["simulate", "--kind", "mb", "--n", "4", "--p1", "0.3",
                 "--draws", "5000", "--seed", "7", "--output", str(output)])
    assert code == EXIT_OK
    df = pd.read_csv(output)
    assert list(df["n"]) == [0, 1, 2, 3, 4]
    assert df["count"].sum() == 5000


def test_plotdata_command(tmp_path):
    output = tmp_path / "plot.csv"
    assert main(["plotdata", "--input", SYNTHETIC, "--id", "2", "--output", str(output)]) == EXIT_OK
    df = pd.read_csv(output)
    assert len(df) == 10  # N = 9


def test_plotdata_unknown_id():
    assert main(["plotdata", "--input", SYNTHETIC, "--id", "99"]) == EXIT_DATA


def test_webcount_fixture_run(tmp_path):
    """Test de la sous-commande webcount sur la fixture embarquée"""
    output = tmp_path / "web.tsv"
    code = main(["webcount", "--k-min", "1",
                 "--pairs", data_path("web_pairs.csv"),
                 "--lexicon", data_path("number_lexicon.json"),
                 "--fixture", data_path("web_fixture.json"),
                 "--cache", str(tmp_path / "hits.jsonl"),
                 "--output", str(output)])
    assert code == EXIT_OK
    assert output.read_text(encoding="utf-8") == read_golden("web_report.tsv")


def test_webcount_live_without_credentials(tmp_path, monkeypatch):
    monkeypatch.delenv("SEARCH_API_ENDPOINT", raising=False)
    monkeypatch.delenv("SEARCH_API_KEY", raising=False)
    monkeypatch.setattr("app.config.SEARCH_API_ENDPOINT", None)
    monkeypatch.setattr("app.config.SEARCH_API_KEY", None)
    assert main(["webcount", "--mode", "live", "--cache", str(tmp_path / "hits.jsonl")]) == EXIT_DATA


def test_missing_input_file():
    """Test : un fichier introuvable est une erreur de données"""
    assert main(["analyze", "--input", "/nonexistent/data.csv"]) == EXIT_DATA


def test_malformed_dataset(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,N,concept,state1,state2,c0,c1\n1,1,Animals,Cat,Dog,3,x\n", encoding="utf-8")
    assert main(["analyze", "--input", str(path)]) == EXIT_DATA


def test_empty_dataset_file(tmp_path, capsys):
    """Test : un CSV vide est une erreur de données, sans trace d'exception"""
    path = tmp_path / "empty.csv"
    path.write_text("", encoding="utf-8")
    assert main(["analyze", "--input", str(path)]) == EXIT_DATA
    assert "vide" in capsys.readouterr().err


def test_json_dataset_not_a_list(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"id": 1}', encoding="utf-8")
    assert main(["analyze", "--input", str(path)]) == EXIT_DATA


def test_webcount_fixture_change_invalidates_cache(tmp_path):
    """Test : une autre fixture sur le même cache ne réutilise pas les hits"""
    cache = str(tmp_path / "hits.jsonl")
    base = ["webcount", "--k-min", "1", "--n-min", "3", "--n-max", "4",
            "--pairs", data_path("web_pairs.csv"),
            "--lexicon", data_path("number_lexicon.json"),
            "--cache", cache]
    first = tmp_path / "first.tsv"
    assert main(base + ["--fixture", data_path("web_fixture.json"), "--output", str(first)]) == EXIT_OK

    empty_fixture = tmp_path / "empty.json"
    empty_fixture.write_text("{}", encoding="utf-8")
    second = tmp_path / "second.tsv"
    assert main(base + ["--fixture", str(empty_fixture), "--output", str(second)]) == EXIT_OK
    assert first.read_text(encoding="utf-8") != second.read_text(encoding="utf-8")


def test_missing_required_argument():
    """Test : un argument manquant est une erreur d'usage"""
    with pytest.raises(SystemExit) as exc:
        main(["analyze"])
    assert exc.value.code == EXIT_USAGE


@pytest.mark.parametrize("argv", [
    ["analyze", "--input", SYNTHETIC, "--mask", "3-11"],
    ["analyze", "--input", SYNTHETIC, "--mask", "9..3"],
    ["analyze", "--input", SYNTHETIC, "--t-weak", "8", "--t-strong", "6"],
    ["webcount", "--n-min", "9", "--n-max", "4"],
])
def test_invalid_options_are_usage_errors(argv):
    assert main(argv) == EXIT_USAGE
