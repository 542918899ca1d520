# tests/test_generate_data.py
import json

import pytest

import generate_data
from app.report import load_dataset
from tests.conftest import data_path


@pytest.fixture(autouse=True)
def bundled_paths(monkeypatch):
    monkeypatch.setattr(generate_data.config, "CONCEPTS_FILE", data_path("concepts.csv"))
    monkeypatch.setattr(generate_data.config, "NUMBER_LEXICON_FILE", data_path("number_lexicon.json"))
    monkeypatch.setattr(generate_data.config, "WEB_PAIRS_FILE", data_path("web_pairs.csv"))


def test_synthetic_dataset_matches_bundled(tmp_path):
    """Test : le générateur retrouve les comptages embarqués (à l'arrondi près)"""
    output = str(tmp_path / "synthetic.csv")
    generate_data.generate_synthetic_dataset(output_file=output)
    generated = load_dataset(output)
    bundled = load_dataset(data_path("synthetic_concepts.csv"))
    assert [r.concept for r in generated] == [r.concept for r in bundled]
    for new, old in zip(generated, bundled):
        assert new.data.included_indices == old.data.included_indices
        assert all(abs(a - b) <= 1 for a, b in zip(new.data.values(), old.data.values()))


def test_multinomial_dataset(tmp_path):
    output = str(tmp_path / "sampled.csv")
    generate_data.generate_synthetic_dataset(output_file=output, draws=500, seed=3)
    records = load_dataset(output)
    assert len(records) == 14
    assert all(sum(r.data.values()) == 500 for r in records)


def test_web_fixture_covers_all_states(tmp_path):
    output = tmp_path / "fixture.json"
    generate_data.generate_web_fixture(output_file=str(output), n_values=range(3, 5))
    hits = json.loads(output.read_text(encoding="utf-8"))
    assert "three cats and one dog" in hits
    assert all(isinstance(v, int) and v >= 0 for v in hits.values())
