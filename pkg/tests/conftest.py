import os
import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """Six synthetic subjects on disk (96 trial files)."""
    from limbeeg.synthetic import SyntheticSpec, write_synthetic_dataset

    root = tmp_path_factory.mktemp("dataset")
    write_synthetic_dataset(root, SyntheticSpec(n_subjects=6, seed=3))
    return root


@pytest.fixture(scope="session")
def synthetic_vectors():
    """Feature vectors for the default 24-subject synthetic dataset."""
    from limbeeg.features import extract_features
    from limbeeg.synthetic import synthetic_trials

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return [extract_features(t) for t in synthetic_trials()]


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed", "skipped"):
        for rep in terminalreporter.stats.get(key, []):
            for name, value in getattr(rep, "user_properties", []):
                if name == "acceptance":
                    lines.append(value)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(set(lines), key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
