import numpy as np
import pytest

from pfx import pipeline, synth

# criterion number -> (status, description, detail); filled in by test_acceptance
ACCEPTANCE_RESULTS: dict = {}


@pytest.fixture(scope="session")
def synth_dir(tmp_path_factory):
    """The reference synthetic set: 60 images per class, seed 42."""
    out = tmp_path_factory.mktemp("synth42")
    synth.generate_synthetic(out, per_class=60, seed=42)
    return out


@pytest.fixture(scope="session")
def synth_manifest(synth_dir):
    return pipeline.read_manifest(synth_dir / "manifest.csv")


@pytest.fixture(scope="session")
def synth_features(synth_manifest):
    X = pipeline.extract_features(synth_manifest, pipeline.PipelineConfig())
    return X, synth_manifest.label_ids


@pytest.fixture(scope="session")
def small_dir(tmp_path_factory):
    """A small set (10 per class) for tests that run the whole pipeline repeatedly."""
    out = tmp_path_factory.mktemp("synth_small")
    synth.generate_synthetic(out, per_class=10, seed=7)
    return out


@pytest.fixture(scope="session")
def small_features(small_dir):
    man = pipeline.read_manifest(small_dir / "manifest.csv")
    return pipeline.extract_features(man, pipeline.PipelineConfig()), man.label_ids


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        status, name, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"[{status}] criterion {n}: {name} -- {detail}")
