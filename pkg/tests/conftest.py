"""Shared fixtures for the sketch_learning test suite."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from sketch_learning.baselines import synth_gmm
from sketch_learning.core.models import MapKind, SyntheticSpec
from sketch_learning.features import FeatureMapSpec
from sketch_learning.sketching import sketch_dataset, write_csv_matrix


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def small_data(rng) -> np.ndarray:
    """200 rows in 3-D, no structure; enough to exercise accumulation paths."""
    return rng.standard_normal((200, 3))


@pytest.fixture
def rff_spec() -> FeatureMapSpec:
    return FeatureMapSpec.create(MapKind.RFF_COMPLEX, d=3, m=64, sigma_w=0.5, seed=7)


@pytest.fixture
def quantized_spec() -> FeatureMapSpec:
    return FeatureMapSpec.create(MapKind.RFF_QUANTIZED, d=3, m=64, sigma_w=0.5, seed=7, dither_seed=11)


@pytest.fixture
def quadratic_spec() -> FeatureMapSpec:
    return FeatureMapSpec.create(MapKind.QUADRATIC, d=3, m=48, sigma_w=1.0, seed=7)


@pytest.fixture
def outer_spec() -> FeatureMapSpec:
    return FeatureMapSpec.create(MapKind.OUTER_PRODUCT, d=3)


@pytest.fixture
def three_blobs():
    """Well separated 2-D mixture: k=3, separation 8σ, 3000 samples."""
    spec = SyntheticSpec(k=3, d=2, n=3000, separation=8.0, sigma=0.3, seed=3)
    return synth_gmm(spec)


@pytest.fixture
def blob_sketch(three_blobs):
    """Complex RFF sketch of ``three_blobs`` with a reservoir box."""
    spec = FeatureMapSpec.create(MapKind.RFF_COMPLEX, d=2, m=60, sigma_w=0.35, seed=1)
    return sketch_dataset(three_blobs.data, spec, block_rows=512, seed=0)


@pytest.fixture
def blob_csv(tmp_path: Path, three_blobs) -> Path:
    path = tmp_path / "blobs.csv"
    write_csv_matrix(path, three_blobs.data)
    return path
