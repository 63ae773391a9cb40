from pathlib import Path
from typing import Any, Union

import numpy as np

from .base import BaseCheck, CheckChain
from ..errors import DataIOError
from ..io.binary import read_header
from ..schemas.manifest import DatasetManifest
from ..schemas.results import CheckResult


class SinogramPositivityCheck(BaseCheck):
    """Readings must be finite and strictly positive"""

    def supports(self, subject: Any) -> bool:
        return isinstance(subject, np.ndarray) or hasattr(subject, "values")

    def _check(self, sinogram) -> CheckResult:
        values = np.asarray(getattr(sinogram, "values", sinogram))
        if not np.all(np.isfinite(values)):
            return CheckResult(passed=False, message="Sinogram has non-finite readings")
        if np.any(values <= 0):
            return CheckResult(passed=False, message=f"Sinogram has {int((values <= 0).sum())} non-positive readings")
        return CheckResult(passed=True)


class JacobianFiniteCheck(BaseCheck):
    """The sensitivity matrix is finite, has no all-zero row and, for the constant-diffusion kernel, is strictly negative"""

    def supports(self, subject: Any) -> bool:
        return hasattr(subject, "J")

    def _check(self, system) -> CheckResult:
        J = system.J
        if not np.all(np.isfinite(J)):
            return CheckResult(passed=False, message="Jacobian has non-finite entries")
        empty = int(np.count_nonzero(~np.any(J != 0, axis=1)))
        if empty:
            return CheckResult(passed=False, message=f"Jacobian has {empty} all-zero rows")
        if getattr(system, "kernel", None) == "rytov" and np.any(J >= 0):
            return CheckResult(passed=False, message=f"Jacobian has {int((J >= 0).sum())} non-negative sensitivities")
        warnings = None
        if np.any(J > 0):
            warnings = [f"{int((J > 0).sum())} positive sensitivities"]
        return CheckResult(passed=True, warnings=warnings)


class ManifestFilesCheck(BaseCheck):
    """Every file a dataset manifest references exists with the declared dims"""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)

    def supports(self, subject: Any) -> bool:
        return isinstance(subject, DatasetManifest)

    def _expect(self, name: str, dims) -> str:
        path = self.root / name
        if not path.is_file():
            return f"missing file {name}"
        try:
            _, found = read_header(path)
        except DataIOError as e:
            return str(e)
        if list(found) != list(dims):
            return f"{name} has dims {list(found)}, expected {list(dims)}"
        return ""

    def _check(self, manifest: DatasetManifest) -> CheckResult:
        if manifest.n_samples != len(manifest.samples):
            return CheckResult(
                passed=False,
                message=f"manifest declares {manifest.n_samples} samples but lists {len(manifest.samples)}",
            )
        expectations = [(manifest.background, manifest.sinogram_shape), (manifest.mask, manifest.image_shape)]
        for record in manifest.samples:
            expectations.append((record.image, manifest.image_shape))
            expectations.append((record.sinogram, manifest.sinogram_shape))
            expectations.extend((name, manifest.sinogram_shape) for name in record.noisy.values())
        for name, dims in expectations:
            problem = self._expect(name, dims)
            if problem:
                return CheckResult(passed=False, message=problem)
        return CheckResult(passed=True)


def dataset_check_chain(root: Union[str, Path]) -> CheckChain:
    return CheckChain([ManifestFilesCheck(root)])
