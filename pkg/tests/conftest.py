import os

# Keep BLAS single-threaded: the Monte Carlo loops parallelize over
# processes, and oversubscription slows the eigensolver-heavy tests.
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")

import pytest


@pytest.fixture(autouse=True)
def _no_worker_env(monkeypatch):
    # The worker-count env override must not leak into tests that pin workers.
    monkeypatch.delenv("DOORWAY_RMT_THREADS", raising=False)
