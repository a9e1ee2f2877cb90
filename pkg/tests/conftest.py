import os

import numpy as np
import pytest

from sensing.core import make_dictionary, make_identity_base
from sensing.models.configs import BenchmarkConfig, DesignConfig
from sensing.models.matrices import ObjectiveContext


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Keep SSD_ variables from the developer's shell out of config tests"""
    for key in list(os.environ):
        if key.upper().startswith("SSD_"):
            monkeypatch.delenv(key, raising=False)


@pytest.fixture
def rng():
    """Deterministic generator for ad-hoc test data"""
    return np.random.default_rng(12345)


@pytest.fixture
def small_dims():
    """(m, n, l) small enough for fast design runs"""
    return 6, 12, 16


@pytest.fixture
def small_dictionary(small_dims):
    _, n, l = small_dims
    return make_dictionary(n, l, seed=3)


@pytest.fixture
def identity_base(small_dims):
    return make_identity_base(small_dims[1])


@pytest.fixture
def small_design_config(small_dims):
    """Design config on the small dimensions with a short iteration budget"""
    m, n, l = small_dims
    return DesignConfig(m=m, n=n, l=l, kappa=6, xi="welch", lam=0.25, max_iters=60, seed=7)


@pytest.fixture
def small_context(small_dictionary):
    return ObjectiveContext(small_dictionary, 0.25)


@pytest.fixture
def small_benchmark_config(small_dims):
    """Benchmark config on the small dimensions; few signals, short designs"""
    m, n, l = small_dims
    return BenchmarkConfig(
        m=m, n=n, l=l, k=2, j=40, snr_db=20.0, lam=0.25, kappa=6,
        systems=["randn", "bispar", "sparse"], seeds=[0], design_iters=30,
    )


@pytest.fixture
def write_toml(tmp_path):
    """Write a TOML run configuration and return its path"""

    def _write(text: str, name: str = "run.toml"):
        path = tmp_path / name
        path.write_text(text)
        return path

    return _write
