import numpy as np
import pytest

from rmsc import SyntheticSpec, generate_synthetic, normalize_unit_l2

# corrupted two-view benchmark used by the robustness and ordering checks
BENCH = dict(n_clusters=3, samples_per_cluster=20, subspace_dim=5, ambient_dims=(60, 60),
             noise_sigma=0.05, outlier_fraction=0.2)


def benchmark(seed, outlier_views=(0,), **over):
    spec = SyntheticSpec(**{**BENCH, **over}, outlier_views=outlier_views, seed=seed)
    ds, outliers = generate_synthetic(spec)
    return normalize_unit_l2(ds), outliers


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_dataset():
    spec = SyntheticSpec(3, 8, 2, (10, 12), noise_sigma=0.01, seed=3)
    ds, _ = generate_synthetic(spec)
    return normalize_unit_l2(ds)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
