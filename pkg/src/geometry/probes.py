from dataclasses import dataclass

import numpy as np

from ..errors import GeometryError
from .shapes import DomainShape


@dataclass(frozen=True, eq=False)
class ProbeLayout:
    """Source and detector positions (cm); sources carry an amplitude"""

    sources: np.ndarray
    amplitudes: np.ndarray
    detectors: np.ndarray
    detector_arclength: np.ndarray

    @property
    def n_s(self) -> int:
        return self.sources.shape[0]

    @property
    def n_d(self) -> int:
        return self.detectors.shape[0]

    @property
    def n_measurements(self) -> int:
        return self.n_s * self.n_d

    def with_amplitudes(self, amplitudes) -> "ProbeLayout":
        amplitudes = np.broadcast_to(np.asarray(amplitudes, dtype=float), (self.n_s,)).copy()
        return ProbeLayout(self.sources, amplitudes, self.detectors, self.detector_arclength)


def build_probe_layout(
    shape: DomainShape,
    n_s: int = 19,
    n_d: int = 200,
    depth: float = 0.1,
    amplitude: float = 1.0,
) -> ProbeLayout:
    """
    Place sources under the bottom plate and detectors on the measuring boundary.

    Sources sit at ``depth`` above y = 0 and split the bottom span into
    ``n_s + 1`` equal intervals. Detectors sit at the centers of ``n_d`` equal
    arc-length cells of the measuring boundary.
    """
    if n_s < 1 or n_d < 1:
        raise GeometryError("Probe counts must be positive", n_s=n_s, n_d=n_d)
    if not 0 < depth < shape.min_dimension:
        raise GeometryError("Source depth must lie inside the domain", depth=depth)

    x_min, x_max = shape.bottom_span
    x = x_min + (np.arange(n_s) + 1) * (x_max - x_min) / (n_s + 1)
    sources = np.column_stack([x, np.full(n_s, depth)])
    if not shape.contains(sources).all():
        raise GeometryError("Sources fall outside the domain", n_s=n_s, depth=depth)

    s = (np.arange(n_d) + 0.5) * shape.measuring_length / n_d
    detectors = shape.measuring_point(s)
    return ProbeLayout(
        sources=sources,
        amplitudes=np.full(n_s, float(amplitude)),
        detectors=detectors,
        detector_arclength=s,
    )
