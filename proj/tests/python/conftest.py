import os
import pathlib

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def data_dir():
    return pathlib.Path(os.environ.get("WARPIMM_DATA_DIR", ROOT / "data"))


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("WARPIMM_CLI")
    if not path:
        pytest.skip("WARPIMM_CLI not set")
    return path
