import json
import math

import numpy as np
import pytest

from src.config import MetricsConfig
from src.errors import ShapeMismatchError
from src.metrics import (
    abe,
    acr,
    binarize,
    binarize_and_label,
    build_report,
    evaluate_sample,
    format_summary,
    mse,
    mse_histogram,
    ssim,
    tpr,
    truth_mask,
    write_report,
)
from src.phantom.sampling import Phantom


def _truth_image(phantom, grid):
    return phantom(grid.centers.reshape(-1, 2)).reshape(grid.image_shape)


def test_ssim_identical_images():
    """Test SSIM of an image with itself on both window paths"""
    rng = np.random.default_rng(0)
    small = rng.random((8, 16))
    large = rng.random((32, 32))
    assert ssim(small, small) == pytest.approx(1.0)
    assert ssim(large, large) == pytest.approx(1.0)
    assert ssim(large, rng.random((32, 32))) < 0.5


def test_ssim_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        ssim(np.zeros((4, 4)), np.zeros((4, 5)))


def test_tpr():
    """Test voxelwise detection rate"""
    truth = np.zeros((4, 4), dtype=bool)
    truth[1:3, 1:3] = True
    found = np.zeros_like(truth)
    found[1, 1:3] = True
    found[0, 0] = True
    assert tpr(found, truth) == 0.5
    assert tpr(truth, truth) == 1.0
    assert math.isnan(tpr(found, np.zeros_like(truth)))
    with pytest.raises(ShapeMismatchError):
        tpr(found, truth[:2])


def test_binarize_threshold():
    """Test the foreground threshold halfway between background and peak"""
    image = np.full((5, 5), 0.01)
    image[2, 2] = 0.05
    image[2, 3] = 0.025
    image[2, 1] = 0.035
    found = binarize(image, background=0.01)
    assert found.sum() == 2
    assert found[2, 2] and found[2, 1] and not found[2, 3]


def test_binarize_requires_detection():
    """Test that a weak peak produces no foreground"""
    image = np.full((5, 5), 0.01)
    image[2, 2] = 0.014
    assert not binarize(image, background=0.01).any()
    assert binarize(image, background=0.01, detection_ratio=1.2).sum() == 1


def test_binarize_respects_mask():
    image = np.full((4, 4), 0.01)
    image[0, 0] = 0.1
    image[3, 3] = 0.08
    mask = np.ones((4, 4), dtype=bool)
    mask[0, 0] = False
    found = binarize(image, background=0.01, mask=mask)
    assert found.sum() == 1 and found[3, 3]


def test_diagonal_blobs_are_separate_components():
    """Test 4-connected labelling"""
    image = np.full((6, 6), 0.01)
    image[1, 1] = image[2, 2] = 0.05
    image[4, 4] = image[4, 5] = 0.05
    labels, count = binarize_and_label(image, background=0.01)
    assert count == 3
    assert labels[4, 4] == labels[4, 5] != 0
    assert labels[1, 1] != labels[2, 2]


def test_error_indices():
    """Test mean absolute and squared error over active voxels"""
    truth = np.zeros((3, 3))
    recon = truth + 0.5
    recon[0, 0] = 2.5
    mask = np.ones((3, 3), dtype=bool)
    mask[0, 0] = False
    assert abe(truth + 0.25, truth) == pytest.approx(0.25)
    assert abe(recon, truth, mask) == pytest.approx(0.5)
    assert mse(recon, truth, mask) == pytest.approx(0.25)
    assert mse(recon, truth) == pytest.approx((8 * 0.25 + 6.25) / 9)
    with pytest.raises(ShapeMismatchError):
        mse(recon, truth[:2])


def test_truth_mask(disc_phantom, small_grid):
    """Test the voxels covered by a disc of radius 1 cm on a 0.625 cm grid"""
    mask = truth_mask(disc_phantom, small_grid)
    assert mask.sum() == 12
    assert not truth_mask(Phantom(0.01), small_grid).any()


def test_acr_of_ground_truth(disc_phantom, small_grid):
    """Test contrast recovery statistics on the exact image"""
    image = _truth_image(disc_phantom, small_grid)
    stats = acr(image, disc_phantom, small_grid)
    assert list(stats) == [4]
    assert stats[4].mean == pytest.approx(0.04)
    assert stats[4].std == pytest.approx(0.0)
    assert stats[4].count == 12
    assert stats[4].truth == pytest.approx(0.04)


def test_acr_interior_only(disc_phantom, small_grid):
    """Test that partial voxels are excluded on request"""
    image = _truth_image(disc_phantom, small_grid)
    assert acr(image, disc_phantom, small_grid, interior_only=True)[4].count == 4
    with pytest.raises(ShapeMismatchError):
        acr(image[:4], disc_phantom, small_grid)


def test_mse_histogram_drops_nan():
    counts, edges = mse_histogram(np.array([0.1, 0.2, np.nan, 0.3]), bins=2, value_range=(0.0, 0.4))
    assert counts.tolist() == [1, 2]
    assert edges.tolist() == [0.0, 0.2, 0.4]


def test_evaluate_exact_reconstruction(disc_phantom, small_grid):
    """Test every index on a perfect reconstruction"""
    truth = _truth_image(disc_phantom, small_grid)
    metrics = evaluate_sample("s0", truth, truth, disc_phantom, small_grid, image_divisor=0.05)
    assert metrics.tpr == 1.0
    assert metrics.abe == 0.0
    assert metrics.mse == 0.0
    assert metrics.ssim == pytest.approx(1.0)
    assert metrics.acr["4"].mean == pytest.approx(0.04)


def test_evaluate_blank_reconstruction(disc_phantom, small_grid):
    """Test that a flat background image detects nothing"""
    truth = _truth_image(disc_phantom, small_grid)
    blank = np.full(small_grid.image_shape, 0.01)
    metrics = evaluate_sample("s1", blank, truth, disc_phantom, small_grid, image_divisor=0.05)
    assert metrics.tpr == 0.0
    assert metrics.abe == pytest.approx(12 * 0.03 / 128)
    assert metrics.mse_physical == pytest.approx(12 * 0.03**2 / 128)
    assert metrics.mse == pytest.approx(metrics.mse_physical / 0.05**2)

    empty = evaluate_sample("s2", blank, blank, Phantom(0.01), small_grid, image_divisor=0.05)
    assert empty.tpr is None
    assert empty.acr == {}


@pytest.fixture
def report_samples(disc_phantom, small_grid):
    truth = _truth_image(disc_phantom, small_grid)
    blank = np.full(small_grid.image_shape, 0.01)
    return [
        evaluate_sample("s0", truth, truth, disc_phantom, small_grid, 0.05),
        evaluate_sample("s1", blank, truth, disc_phantom, small_grid, 0.05),
        evaluate_sample("s2", blank, blank, Phantom(0.01), small_grid, 0.05),
    ]


def test_build_report(report_samples):
    """Test aggregation and pooled contrast bins"""
    report = build_report(report_samples, method="elastic-net", noise_level=0.01)
    assert report.aggregate["tpr"].count == 2
    assert report.aggregate["tpr"].mean == pytest.approx(0.5)
    assert report.aggregate["abe"].count == 3
    pooled = report.acr["4"]
    assert pooled.count == 24
    assert pooled.mean == pytest.approx(0.025)
    assert pooled.std == pytest.approx(0.015)
    assert report.histogram is None


def test_report_histogram(report_samples):
    """Test histograms of two MSE distributions on shared edges"""
    report = build_report(report_samples, compare_mse=np.array([0.0, 1.0]), bins=4)
    assert len(report.histogram["edges"]) == 5
    assert report.histogram["edges"][-1] >= 1.0
    assert sum(report.histogram["counts"]) == 3
    assert sum(report.histogram["compare_counts"]) == 2


def test_write_report(tmp_path, report_samples):
    """Test the per-sample CSV and the aggregate JSON"""
    report = build_report(report_samples, method="rytov")
    csv_path = write_report(report, tmp_path / "metrics")
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "id,tpr,abe,mse,mse_physical,ssim,acr_4"
    assert len(lines) == 4
    assert lines[3].startswith("s2,,")
    assert lines[3].endswith(",")
    stored = json.loads((tmp_path / "metrics.json").read_text())
    assert stored["method"] == "rytov"
    assert "samples" not in stored
    assert stored["aggregate"]["tpr"]["count"] == 2


def test_format_summary(report_samples):
    summary = format_summary(build_report(report_samples[2:], method="nn"))
    assert summary.startswith("method: nn  noise: -")
    assert f"  {'tpr':<13}n/a" in summary
    assert "acr" not in summary.split("ssim")[1]


def test_detection_ratio(disc_phantom, small_grid):
    """Test that a lower detection ratio admits a faint inclusion"""
    truth = _truth_image(disc_phantom, small_grid)
    smooth = truth.copy()
    smooth[truth_mask(disc_phantom, small_grid)] = 0.014
    strict = evaluate_sample("s", smooth, truth, disc_phantom, small_grid, 0.05)
    loose = evaluate_sample("s", smooth, truth, disc_phantom, small_grid, 0.05, MetricsConfig(detection_ratio=1.1))
    assert strict.tpr == 0.0
    assert loose.tpr == 1.0
