import csv
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

import numpy as np

from ..config import MetricsConfig
from ..geometry.voxels import VoxelGrid
from ..io.manifest import write_json
from ..phantom.sampling import Phantom
from ..schemas.metrics import Aggregate, BinStatistics, MetricReport, SampleMetrics
from .indices import abe, acr, binarize, mse, mse_histogram, ssim, tpr, truth_mask

INDICES = ("tpr", "abe", "mse", "mse_physical", "ssim")


def evaluate_sample(
    sample_id: str,
    reconstruction: np.ndarray,
    truth: np.ndarray,
    phantom: Phantom,
    grid: VoxelGrid,
    image_divisor: float,
    config: Optional[MetricsConfig] = None,
) -> SampleMetrics:
    """
    Indices of one reconstruction.

    Args:
        sample_id: dataset sample id
        reconstruction: reconstructed absorption (cm^-1), (ny, nx)
        truth: ground-truth absorption (cm^-1), (ny, nx)
        phantom: analytic phantom, used for the true foreground and ACR
        grid: voxel grid of both images
        image_divisor: scale mapping physical images to normalized ones
        config: binarization and SSIM parameters
    """
    config = config or MetricsConfig()
    background = phantom.background
    found = binarize(reconstruction, background, config.threshold_fraction, config.detection_ratio, grid.mask)
    normalized_recon = reconstruction / image_divisor
    normalized_truth = truth / image_divisor
    return SampleMetrics(
        id=sample_id,
        tpr=_finite_or_none(tpr(found, truth_mask(phantom, grid))),
        abe=abe(reconstruction, truth, grid.mask),
        mse=mse(normalized_recon, normalized_truth, grid.mask),
        mse_physical=mse(reconstruction, truth, grid.mask),
        ssim=ssim(normalized_recon, normalized_truth, data_range=1.0, config=config),
        acr={str(m): stats for m, stats in acr(reconstruction, phantom, grid).items()},
    )


def _finite_or_none(value: float) -> Optional[float]:
    return value if np.isfinite(value) else None


def _aggregate(values: Iterable[Optional[float]]) -> Aggregate:
    finite = np.array([v for v in values if v is not None and np.isfinite(v)], dtype=float)
    if finite.size == 0:
        return Aggregate()
    return Aggregate(mean=float(finite.mean()), std=float(finite.std()), count=int(finite.size))


def build_report(
    samples: List[SampleMetrics],
    method: str = "",
    noise_level: Optional[float] = None,
    compare_mse: Optional[np.ndarray] = None,
    bins: int = 20,
) -> MetricReport:
    """
    Aggregate per-sample indices.

    ACR bins pool the voxels of every sample; ``compare_mse`` adds a
    histogram of both MSE distributions over shared edges.
    """
    aggregate = {name: _aggregate(getattr(s, name) for s in samples) for name in INDICES}
    pooled: Dict[str, BinStatistics] = {}
    for key in sorted({k for s in samples for k in s.acr}, key=int):
        stats = [s.acr[key] for s in samples if key in s.acr]
        count = sum(b.count for b in stats)
        mean = sum(b.mean * b.count for b in stats) / count
        second = sum((b.std**2 + b.mean**2) * b.count for b in stats) / count
        pooled[key] = BinStatistics(mean=mean, std=float(np.sqrt(max(second - mean**2, 0.0))), count=count, truth=stats[0].truth)

    histogram = None
    if compare_mse is not None:
        current = np.array([s.mse for s in samples])
        combined = np.concatenate([current, np.asarray(compare_mse, dtype=float)])
        finite = combined[np.isfinite(combined)]
        value_range = (float(finite.min()), float(finite.max())) if finite.size else None
        counts, edges = mse_histogram(current, bins, value_range)
        other_counts, _ = mse_histogram(compare_mse, bins, value_range)
        histogram = {"edges": edges.tolist(), "counts": counts.tolist(), "compare_counts": other_counts.tolist()}
    return MetricReport(method=method, noise_level=noise_level, samples=samples, aggregate=aggregate, acr=pooled, histogram=histogram)


def write_report(report: MetricReport, out: Union[str, Path]) -> Path:
    """
    Write ``<out>.csv`` with one row per sample and ``<out>.json`` with the
    aggregate report; returns the CSV path.
    """
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    bins = sorted({k for s in report.samples for k in s.acr}, key=int)
    csv_path = out.with_suffix(".csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["id", *INDICES, *[f"acr_{b}" for b in bins]])
        for s in report.samples:
            row = [s.id] + ["" if getattr(s, name) is None else repr(getattr(s, name)) for name in INDICES]
            row += [repr(s.acr[b].mean) if b in s.acr else "" for b in bins]
            writer.writerow(row)
    write_json(out.with_suffix(".json"), report.model_dump(mode="json", exclude={"samples"}))
    return csv_path


def format_summary(report: MetricReport) -> str:
    """Plain-text table of aggregate indices and ACR bins"""
    lines = [f"method: {report.method or '-'}  noise: {report.noise_level if report.noise_level is not None else '-'}"]
    for name in INDICES:
        agg = report.aggregate.get(name, Aggregate())
        value = "n/a" if agg.mean is None else f"{agg.mean:.6g} +/- {agg.std:.3g} (n={agg.count})"
        lines.append(f"  {name:<13}{value}")
    for key, stats in report.acr.items():
        lines.append(f"  acr {key}x (GT {stats.truth:.3g}): {stats.mean:.6g} +/- {stats.std:.3g}")
    return "\n".join(lines) + "\n"
