from __future__ import annotations

import pytest

from hintgen.corpus import load_corpus, resolve_corpus_path
from hintgen.sandbox import SandboxExecutor


@pytest.fixture(scope="session")
def executor() -> SandboxExecutor:
    return SandboxExecutor(workers=8)


@pytest.fixture(scope="session")
def intro_corpus():
    return load_corpus(resolve_corpus_path("intro-basics"))


@pytest.fixture(scope="session")
def algo_corpus():
    return load_corpus(resolve_corpus_path("algo-basics"))


@pytest.fixture(scope="session")
def karel_corpus():
    return load_corpus(resolve_corpus_path("karel-lists"))
