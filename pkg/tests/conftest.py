from pathlib import Path

import pytest

from semcom.lexicon import load_lexicon_dir

REPO_ROOT = Path(__file__).resolve().parents[1]
FIXTURES = REPO_ROOT / "fixtures"


@pytest.fixture(scope="session")
def mini_db():
    return load_lexicon_dir(FIXTURES / "mini-wndb")


@pytest.fixture(scope="session")
def exp_db():
    return load_lexicon_dir(FIXTURES / "exp-wndb")


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(autouse=True)
def _hermetic_model_server_env(monkeypatch):
    # The primary suite must not silently pick up a live model server.
    monkeypatch.delenv("SEMCOM_MODEL_SERVER_URL", raising=False)
