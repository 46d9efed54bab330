from __future__ import annotations

from pathlib import Path

import pytest

from medbrain import kb

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def disease_db_text() -> str:
    return (FIXTURES / "disease_db.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def disease_records(disease_db_text):
    return kb.parse_disease_db(disease_db_text)


@pytest.fixture(scope="session")
def disease_corpus(disease_records):
    return [kb.record_to_document(r) for r in disease_records]


@pytest.fixture(scope="session")
def mpox_corpus(disease_corpus):
    """The offline records plus the locally stored monkeypox article."""
    return list(disease_corpus) + [kb.load_article(FIXTURES / "monkeypox_article.txt")]
