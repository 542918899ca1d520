# tests/conftest.py
import os
import sys

import pytest

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, ROOT)

from app.models import CountVector, NumberLexicon, StateLexeme  # noqa: E402

DATA_DIR = os.path.join(ROOT, "data")
GOLDEN_DIR = os.path.join(ROOT, "tests", "golden")


def data_path(name):
    return os.path.join(DATA_DIR, name)


def golden_path(name):
    return os.path.join(GOLDEN_DIR, name)


def read_golden(name):
    with open(golden_path(name), encoding="utf-8", newline="") as f:
        return f.read()


def counts_from(values, N=None):
    """CountVector à partir d'une liste de comptages indexée par n"""
    N = len(values) - 1 if N is None else N
    return CountVector(total_entities=N, counts={n: float(c) for n, c in enumerate(values)})


@pytest.fixture
def cat_dog():
    return StateLexeme(singular="cat", plural="cats"), StateLexeme(singular="dog", plural="dogs")


@pytest.fixture
def restricted_lexicon():
    """Lexique réduit : une seule référence pour 1 et 3"""
    return NumberLexicon(references={1: ["one"], 3: ["three"]})
