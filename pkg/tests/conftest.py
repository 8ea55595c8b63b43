from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import settings

from chanrace.syntax import Program, parse

CORPUS = Path(__file__).resolve().parent.parent / "src" / "chanrace" / "corpus"
GOLDEN = Path(__file__).resolve().parent / "golden"

settings.register_profile("default", deadline=None)
settings.load_profile("default")


def corpus_names() -> list[str]:
    return sorted(p.stem for p in CORPUS.glob("*.mini"))


def load(name: str) -> Program:
    return parse((CORPUS / f"{name}.mini").read_text())


@pytest.fixture(params=corpus_names())
def corpus_program(request) -> tuple[str, Program]:
    return request.param, load(request.param)
