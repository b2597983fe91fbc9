from pathlib import Path

import pytest

from flowmine.io import parse_csv

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def textile_path() -> Path:
    return DATA / "textile.csv"


@pytest.fixture(scope="session")
def textile_log(textile_path):
    log, report = parse_csv(textile_path.read_text(encoding="utf-8"))
    assert report.rows_rejected == 0
    return log


@pytest.fixture(scope="session")
def mxml_path() -> Path:
    return DATA / "minimal.mxml"


@pytest.fixture(scope="session")
def two_chain_spec_path() -> Path:
    return DATA / "two_chain_spec.json"
