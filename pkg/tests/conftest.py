import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fixtures import build_fixture_dir  # noqa: E402


@pytest.fixture(scope="session")
def fixture_pool_dir(tmp_path_factory) -> Path:
    """The bundled 1,000-record pool with embedding sidecars."""
    directory = tmp_path_factory.mktemp("fixture-pool")
    return build_fixture_dir(directory, n=1000, seed=42, dim=16)
