from __future__ import annotations

import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
if str(TESTS_DIR) not in sys.path:
    sys.path.insert(0, str(TESTS_DIR))

DATA = TESTS_DIR / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def income_facts() -> str:
    return (DATA / "income.facts").read_text()


@pytest.fixture
def income_grammar() -> str:
    return (DATA / "columns.g").read_text()


@pytest.fixture
def property_facts() -> str:
    return (DATA / "property.facts").read_text()
