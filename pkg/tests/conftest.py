import time

import pytest

from intertext.pipeline import PipelineParams, run_pipeline


@pytest.fixture(scope="session")
def pipeline_runs(tmp_path_factory):
    """Two identical full synthetic pipeline runs, shared across tests.

    Run A feeds the end-to-end accuracy checks and the training-trajectory
    checks; run B exists solely for the byte-determinism comparison.
    """
    dir_a = tmp_path_factory.mktemp("pipeline_a")
    dir_b = tmp_path_factory.mktemp("pipeline_b")
    start = time.perf_counter()
    artifacts_a = run_pipeline(PipelineParams(out_dir=str(dir_a)))
    elapsed = time.perf_counter() - start
    artifacts_b = run_pipeline(PipelineParams(out_dir=str(dir_b)))
    return {
        "dir_a": dir_a,
        "dir_b": dir_b,
        "artifacts_a": artifacts_a,
        "artifacts_b": artifacts_b,
        "first_run_seconds": elapsed,
    }
