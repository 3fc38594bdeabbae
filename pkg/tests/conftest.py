from __future__ import annotations

from pathlib import Path

import pytest

from aliascert import certify_program, parse_program

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def corpus_path(name: str) -> Path:
    return CORPUS / name


def load(name: str):
    return parse_program(corpus_path(name).read_text())


@pytest.fixture(scope="session")
def hello():
    return load("hello.s")


@pytest.fixture(scope="session")
def hello_report(hello):
    report = certify_program(hello)
    assert report.safe, report.failures
    return report


@pytest.fixture(scope="session")
def corpus_programs():
    return {p.stem: parse_program(p.read_text()) for p in sorted(CORPUS.glob("*.s"))}
