import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
REPO_DIR = TESTS_DIR.parent
CORPUS_DIR = REPO_DIR / "corpus"

sys.path.insert(0, str(TESTS_DIR))


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS_DIR


def corpus_path(name: str) -> Path:
    return CORPUS_DIR / name


@pytest.fixture(scope="session")
def token_files():
    return corpus_path("token.bin"), corpus_path("token.abi")


@pytest.fixture(scope="session")
def distributor_files():
    return corpus_path("distributor.bin"), corpus_path("distributor.abi")


@pytest.fixture(scope="session")
def straightline_files():
    return corpus_path("straightline.bin"), corpus_path("straightline.abi")
