from pathlib import Path

import pytest

from wyscheck.syntax import compile_text, load

CORPUS = Path(__file__).resolve().parent.parent / "src" / "wyscheck" / "corpus"


def corpus_path(name: str) -> Path:
    return CORPUS / f"{name}.wys"


def corpus(name: str):
    return load(corpus_path(name))


@pytest.fixture
def compile():
    return compile_text
