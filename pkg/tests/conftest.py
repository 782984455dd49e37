"""
Shared fixtures: small grids and seeded random generators.
"""

import numpy as np
import pytest

from src.kvn.grids import Grid1D


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def phase_grids():
    """(x, k) grids on [-8, 8) with 64 points each."""
    return (Grid1D.symmetric("x", 64, 8.0), Grid1D.symmetric("k", 64, 8.0))


@pytest.fixture
def quantum_grid():
    return Grid1D.symmetric("q", 128, 16.0)


@pytest.fixture
def hybrid_grids():
    """(q, x, k) grids on [-10, 10) with 32 points each."""
    return tuple(Grid1D.symmetric(label, 32, 10.0) for label in ("q", "x", "k"))


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    """Run inside an empty temporary directory."""
    monkeypatch.chdir(tmp_path)
    return tmp_path
