import os
import time

import pytest

from likenet.ensemble import EnsembleConfig, run_ensemble

DESK_SEED = 19
DESK_SAMPLES = 10_000
STRATEGIC_FRACTION = 0.001


def worker_count():
    return max(1, min(os.cpu_count() or 1, 8))


@pytest.fixture(scope="session")
def desk_config():
    return EnsembleConfig(sample_count=DESK_SAMPLES, master_seed=DESK_SEED)


@pytest.fixture(scope="session")
def desk_run(desk_config):
    """The desk-scale ensemble shared by the acceptance criteria.

    Returns (records, elapsed_seconds).
    """
    start = time.time()
    records = list(run_ensemble(desk_config, workers=worker_count()))
    return records, time.time() - start
