"""Shared fixtures for the test suite."""

import numpy as np
import pytest

from superseg import LabelMap, Segmentation, relabel_contiguous


@pytest.fixture
def fixture_4x4():
    """The worked 4x4 metrics fixture: ground truth split between
    columns 1 and 2, segmentation split between columns 2 and 3."""
    gt = LabelMap(np.array([[0, 0, 1, 1]] * 4, dtype=np.int32))
    seg = Segmentation(np.array([[0, 0, 0, 1]] * 4, dtype=np.int32), 2)
    return seg, gt


def random_fixture(rng, max_side=8, max_classes=4, max_regions=5):
    """Random (regions, labels) pair with at least one labeled pixel.

    Regions need not be connected: the metrics are defined on arbitrary
    partitions.
    """
    h = int(rng.integers(1, max_side + 1))
    w = int(rng.integers(1, max_side + 1))
    nreg = int(rng.integers(1, max_regions + 1))
    ncls = int(rng.integers(1, max_classes + 1))
    seg = relabel_contiguous(rng.integers(0, nreg, (h, w)))
    while True:
        labels = rng.integers(-1, ncls, (h, w)).astype(np.int32)
        if (labels != -1).any():
            return seg, LabelMap(labels)
