"""Image quality indices of absorption reconstructions.

Images are (ny, nx) arrays on a voxel grid. Unless stated otherwise the
indices are computed over active voxels only.
"""

from typing import Dict, Optional, Tuple

import numpy as np
from scipy import ndimage
from skimage.metrics import structural_similarity

from ..config import MetricsConfig
from ..errors import ShapeMismatchError
from ..geometry.voxels import VoxelGrid
from ..phantom.sampling import Phantom
from ..schemas.metrics import BinStatistics

# 4-connectivity
CONNECTIVITY = ndimage.generate_binary_structure(2, 1)


def _pair(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ShapeMismatchError("Images differ in shape", left=a.shape, right=b.shape)
    return a, b


def _active(image: np.ndarray, mask: Optional[np.ndarray]) -> np.ndarray:
    return image if mask is None else image[np.asarray(mask, dtype=bool)]


def binarize(
    image: np.ndarray,
    background: float,
    threshold_fraction: float = 0.5,
    detection_ratio: float = 1.5,
    mask: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Foreground mask: voxels above background + fraction * (max - background).

    Nothing is foreground when the maximum stays below detection_ratio * background.
    """
    image = np.asarray(image, dtype=float)
    active = np.ones(image.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    peak = image[active].max(initial=-np.inf)
    if peak < detection_ratio * background:
        return np.zeros(image.shape, dtype=bool)
    threshold = background + threshold_fraction * (peak - background)
    return (image > threshold) & active


def binarize_and_label(
    image: np.ndarray,
    background: float,
    threshold_fraction: float = 0.5,
    detection_ratio: float = 1.5,
    mask: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, int]:
    """Binarize and label 4-connected foreground components 1..k"""
    foreground = binarize(image, background, threshold_fraction, detection_ratio, mask)
    labels, count = ndimage.label(foreground, structure=CONNECTIVITY)
    return labels, int(count)


def truth_mask(phantom: Phantom, grid: VoxelGrid) -> np.ndarray:
    """Active voxels whose center lies inside a contrast region"""
    inside = phantom.multiplier_map(grid.centers.reshape(-1, 2)).reshape(grid.image_shape) > 1
    return inside & grid.mask


def tpr(reconstructed: np.ndarray, truth: np.ndarray) -> float:
    """
    True positives over true positives plus false negatives, voxelwise.

    Returns NaN when the ground-truth mask is empty.
    """
    reconstructed = np.asarray(reconstructed, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if reconstructed.shape != truth.shape:
        raise ShapeMismatchError("Masks differ in shape", left=reconstructed.shape, right=truth.shape)
    positives = truth.sum()
    if positives == 0:
        return float("nan")
    return float((reconstructed & truth).sum() / positives)


def abe(reconstruction: np.ndarray, truth: np.ndarray, mask: Optional[np.ndarray] = None) -> float:
    """Mean absolute voxel error"""
    a, b = _pair(reconstruction, truth)
    return float(np.mean(np.abs(_active(a - b, mask))))


def mse(reconstruction: np.ndarray, truth: np.ndarray, mask: Optional[np.ndarray] = None) -> float:
    a, b = _pair(reconstruction, truth)
    return float(np.mean(_active(a - b, mask) ** 2))


def _global_ssim(a: np.ndarray, b: np.ndarray, data_range: float, k1: float, k2: float) -> float:
    c1, c2 = (k1 * data_range) ** 2, (k2 * data_range) ** 2
    mu_a, mu_b = a.mean(), b.mean()
    var_a, var_b = a.var(), b.var()
    cov = np.mean((a - mu_a) * (b - mu_b))
    return float(((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / ((mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)))


def ssim(a: np.ndarray, b: np.ndarray, data_range: float = 1.0, config: Optional[MetricsConfig] = None) -> float:
    """
    Structural similarity with a Gaussian window.

    Images smaller than the window fall back to one global window.
    """
    config = config or MetricsConfig()
    a, b = _pair(a, b)
    if min(a.shape) < config.ssim_window:
        return _global_ssim(a, b, data_range, config.ssim_k1, config.ssim_k2)
    return float(
        structural_similarity(
            a,
            b,
            data_range=data_range,
            gaussian_weights=True,
            sigma=config.ssim_sigma,
            use_sample_covariance=False,
            K1=config.ssim_k1,
            K2=config.ssim_k2,
        )
    )


def _interior(region_mask_fn, grid: VoxelGrid) -> np.ndarray:
    half = 0.5 * grid.voxel_size
    inside = np.ones(grid.image_shape, dtype=bool)
    for dx in (-half, half):
        for dy in (-half, half):
            corners = grid.centers.reshape(-1, 2) + np.array([dx, dy])
            inside &= region_mask_fn(corners).reshape(grid.image_shape)
    return inside


def acr(
    reconstruction: np.ndarray,
    phantom: Phantom,
    grid: VoxelGrid,
    interior_only: bool = False,
) -> Dict[int, BinStatistics]:
    """
    Mean and spread of the reconstructed coefficient inside the true regions,
    binned by contrast multiplier.

    With ``interior_only`` a voxel counts only when its whole square lies in
    the region. Empty bins are left out.
    """
    reconstruction = np.asarray(reconstruction, dtype=float)
    if reconstruction.shape != grid.image_shape:
        raise ShapeMismatchError("Image does not match the grid", expected=grid.image_shape, got=reconstruction.shape)
    centers = grid.centers.reshape(-1, 2)
    bins: Dict[int, np.ndarray] = {}
    for multiplier in sorted({r.multiplier for r in phantom.regions}):
        regions = [r for r in phantom.regions if r.multiplier == multiplier]

        def in_bin(points, regions=regions):
            return np.any([r.contains(points) for r in regions], axis=0)

        if interior_only:
            selected = _interior(in_bin, grid)
        else:
            selected = in_bin(centers).reshape(grid.image_shape)
        selected &= grid.mask
        if selected.any():
            bins[multiplier] = reconstruction[selected]

    return {
        m: BinStatistics(mean=float(v.mean()), std=float(v.std()), count=int(v.size), truth=m * phantom.background)
        for m, v in bins.items()
    }


def mse_histogram(values: np.ndarray, bins: int = 20, value_range: Optional[Tuple[float, float]] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Counts and edges of per-sample errors, NaNs dropped"""
    values = np.asarray(values, dtype=float)
    values = values[np.isfinite(values)]
    return np.histogram(values, bins=bins, range=value_range)
