import os

import pytest

from karelbench import datagen

HEAVY = bool(os.environ.get("KARELLEARN_HEAVY"))

heavy = pytest.mark.skipif(
    not HEAVY, reason="heavy experiment; set KARELLEARN_HEAVY=1 to run"
)


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "tiny.jsonl"
    datagen.build_dataset(40, path, seed=0)
    return path
