"""Segmentation metric tests: worked fixtures, identities, error cases,
and randomized cross-checks against the brute-force oracles."""

import numpy as np
import pytest

import oracles
from conftest import random_fixture
from superseg import (UNLABELED, LabelMap, Segmentation, average_purity,
                      boundary_recall, oracle_accuracy, relabel_contiguous,
                      undersegmentation_error)
from superseg.segeval import SegMetricsReport, evaluate, gt_segments


def test_worked_fixture(fixture_4x4):
    seg, gt = fixture_4x4
    assert undersegmentation_error(seg, gt) == 0.5
    assert average_purity(seg, gt) == pytest.approx(5 / 6, abs=1e-15)
    assert oracle_accuracy(seg, gt) == 0.75
    assert boundary_recall(seg, gt, tol=0) == 0.5
    assert boundary_recall(seg, gt, tol=3) == 1.0


def test_perfect_segmentation_identities():
    rng = np.random.default_rng(0)
    for _ in range(10):
        _, gt = random_fixture(rng)
        comps = gt_segments(gt)
        # make the sentinel area its own regions so the partition is total
        seg = relabel_contiguous(np.where(gt.labels == UNLABELED,
                                          comps.max() + 1 + comps, comps))
        assert undersegmentation_error(seg, gt) == 0.0
        assert boundary_recall(seg, gt) == 1.0
        assert average_purity(seg, gt) == 1.0
        assert oracle_accuracy(seg, gt) == 1.0


def test_br_no_gt_boundary_returns_one():
    seg = Segmentation(np.array([[0, 1], [0, 1]], dtype=np.int32), 2)
    gt = LabelMap(np.zeros((2, 2), dtype=np.int32))
    assert boundary_recall(seg, gt) == 1.0


def test_entirely_unlabeled_gt_errors():
    seg = Segmentation(np.zeros((2, 2), dtype=np.int32), 1)
    gt = LabelMap(np.full((2, 2), UNLABELED, dtype=np.int32))
    with pytest.raises(ValueError):
        undersegmentation_error(seg, gt)
    with pytest.raises(ValueError):
        oracle_accuracy(seg, gt)
    with pytest.raises(ValueError):
        average_purity(seg, gt)


def test_dimension_mismatch_errors():
    seg = Segmentation(np.zeros((2, 2), dtype=np.int32), 1)
    gt = LabelMap(np.zeros((3, 3), dtype=np.int32))
    for fn in (undersegmentation_error, boundary_recall, average_purity,
               oracle_accuracy):
        with pytest.raises(ValueError):
            fn(seg, gt)


def test_ue_uses_connected_components():
    # same class on both sides of another class: two gt segments
    gt = LabelMap(np.array([[0, 1, 0]] * 3, dtype=np.int32))
    assert gt_segments(gt).max() == 3
    # one region covering everything leaks the smaller side of each segment
    seg = Segmentation(np.zeros((3, 3), dtype=np.int32), 1)
    assert undersegmentation_error(seg, gt) == (3 + 3 + 3) / 9


def test_metrics_invariant_under_id_permutations():
    rng = np.random.default_rng(1)
    seg, gt = random_fixture(rng, max_side=6)
    seg_perm = relabel_contiguous(seg.region_count - 1 - seg.regions)
    cls_max = int(gt.labels.max())
    gt_perm = LabelMap(np.where(gt.labels == UNLABELED, UNLABELED,
                                cls_max - gt.labels).astype(np.int32))
    for a, b in ((seg, gt), (seg_perm, gt), (seg, gt_perm)):
        assert undersegmentation_error(a, b) == undersegmentation_error(seg, gt)
        assert boundary_recall(a, b) == boundary_recall(seg, gt)
        assert average_purity(a, b) == pytest.approx(average_purity(seg, gt))
        assert oracle_accuracy(a, b) == oracle_accuracy(seg, gt)


def test_oracle_refinement_monotonicity():
    rng = np.random.default_rng(2)
    for _ in range(20):
        seg, gt = random_fixture(rng)
        base = oracle_accuracy(seg, gt)
        # split one region along a random coordinate parity
        rid = int(rng.integers(seg.region_count))
        rows, _ = np.indices(seg.regions.shape)
        split = (seg.regions == rid) & (rows % 2 == 0)
        raw = np.where(split, seg.region_count, seg.regions)
        refined = relabel_contiguous(raw)
        assert oracle_accuracy(refined, gt) >= base - 1e-15


def test_random_cross_check_against_oracles():
    rng = np.random.default_rng(3)
    for _ in range(50):
        seg, gt = random_fixture(rng, max_side=6)
        regions = seg.regions.tolist()
        labels = gt.labels.tolist()
        assert undersegmentation_error(seg, gt) == pytest.approx(
            oracles.bf_undersegmentation_error(regions, labels), abs=1e-12)
        tol = int(rng.integers(0, 4))
        assert boundary_recall(seg, gt, tol) == pytest.approx(
            oracles.bf_boundary_recall(regions, labels, tol), abs=1e-12)
        assert average_purity(seg, gt) == pytest.approx(
            oracles.bf_average_purity(regions, labels), abs=1e-12)
        assert oracle_accuracy(seg, gt) == pytest.approx(
            oracles.bf_oracle_accuracy(regions, labels), abs=1e-12)


def test_csv_row_format(fixture_4x4):
    seg, gt = fixture_4x4
    report = evaluate(seg, gt)
    assert isinstance(report, SegMetricsReport)
    assert report.csv_row("slic") == "slic,2,50.00,100.00,83.33,75.00"
