from __future__ import annotations

from pathlib import Path

import pytest

from regcheck.corpus import load_document, load_metadata_file

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def article33_text() -> str:
    return (FIXTURES / "article33.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def article33_doc(article33_text):
    return load_document(article33_text, load_metadata_file(FIXTURES / "article33.meta"))


@pytest.fixture(scope="session")
def regulation_two_doc():
    return load_document(
        (FIXTURES / "regulation_two.txt").read_text(encoding="utf-8"),
        load_metadata_file(FIXTURES / "regulation_two.meta"),
    )


@pytest.fixture(scope="session")
def policy_doc():
    return load_document(
        (FIXTURES / "policy_tj.txt").read_text(encoding="utf-8"),
        load_metadata_file(FIXTURES / "policy_tj.meta"),
    )
