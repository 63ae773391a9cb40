from .indices import (
    abe,
    acr,
    binarize,
    binarize_and_label,
    mse,
    mse_histogram,
    ssim,
    tpr,
    truth_mask,
)
from .report import build_report, evaluate_sample, format_summary, write_report
