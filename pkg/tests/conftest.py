import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from corecast.library import default_library


@pytest.fixture(scope="session")
def library():
    return default_library()


@pytest.fixture(scope="session")
def tiny_pipeline(tmp_path_factory):
    """A miniature dataset + trained checkpoint shared by CLI/service tests."""
    from corecast.cli import main

    root = tmp_path_factory.mktemp("pipeline")
    data = root / "data.csv"
    model = root / "model.json"
    log = root / "runlog.csv"
    assert main(["gen-data", "--count", "10", "--seed", "31415",
                 "--workers", "1", "--out", str(data)]) == 0
    assert main(["train", "--data", str(data), "--nh1", "8", "--nh2", "8",
                 "--dropout", "0.1", "--epochs", "4", "--seed", "5",
                 "--out", str(model), "--log", str(log)]) == 0
    return {"root": root, "data": data, "model": model, "log": log}
