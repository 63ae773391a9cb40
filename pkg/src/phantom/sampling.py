from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..config import PhantomConfig
from ..errors import GeometryError
from ..geometry.shapes import DomainShape
from ..utils.rng import generator


@dataclass(frozen=True)
class Region:
    """Elliptical contrast region; circular when both radii agree"""

    center: Tuple[float, float]
    radii: Tuple[float, float]
    angle: float = 0.0
    multiplier: int = 3

    @property
    def is_circular(self) -> bool:
        return self.radii[0] == self.radii[1]

    @property
    def bounding_radius(self) -> float:
        return max(self.radii)

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        dx = points[:, 0] - self.center[0]
        dy = points[:, 1] - self.center[1]
        c, s = np.cos(self.angle), np.sin(self.angle)
        u = (dx * c + dy * s) / self.radii[0]
        v = (-dx * s + dy * c) / self.radii[1]
        return u**2 + v**2 <= 1.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "center": list(self.center),
            "radii": list(self.radii),
            "angle": self.angle,
            "multiplier": self.multiplier,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Region":
        return cls(
            center=tuple(float(c) for c in data["center"]),
            radii=tuple(float(r) for r in data["radii"]),
            angle=float(data.get("angle", 0.0)),
            multiplier=int(data["multiplier"]),
        )


@dataclass(frozen=True)
class Phantom:
    """Absorption field: a homogeneous background with contrast regions"""

    background: float
    regions: Tuple[Region, ...] = field(default_factory=tuple)

    def multiplier_map(self, points: np.ndarray) -> np.ndarray:
        """Contrast multiplier at each point, 1 on the background"""
        points = np.atleast_2d(points)
        result = np.ones(len(points))
        for region in self.regions:
            result = np.where(region.contains(points), np.maximum(result, region.multiplier), result)
        return result

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.background * self.multiplier_map(points)

    evaluate = __call__

    @property
    def peak(self) -> float:
        return self.background * max([r.multiplier for r in self.regions], default=1)

    def to_dict(self) -> Dict[str, Any]:
        return {"background": self.background, "regions": [r.to_dict() for r in self.regions]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Phantom":
        return cls(float(data["background"]), tuple(Region.from_dict(r) for r in data["regions"]))


def _sample_regions(
    rng: np.random.Generator,
    shape: DomainShape,
    rules: PhantomConfig,
    elliptical: bool,
) -> List[Region]:
    n_regions = int(rng.integers(rules.min_regions, rules.max_regions + 1))
    x_min, x_max, y_min, y_max = shape.bounding_box
    regions: List[Region] = []

    for _ in range(n_regions):
        for _attempt in range(rules.max_retries):
            if elliptical:
                radii = (float(rng.uniform(rules.min_radius, rules.max_radius)), float(rng.uniform(rules.min_radius, rules.max_radius)))
                angle = float(rng.uniform(0.0, np.pi))
            else:
                r = float(rng.uniform(rules.min_radius, rules.max_radius))
                radii, angle = (r, r), 0.0
            extent = max(radii)
            if x_max - x_min <= 2 * extent or y_max - y_min <= 2 * extent:
                continue
            center = (float(rng.uniform(x_min + extent, x_max - extent)), float(rng.uniform(y_min + extent, y_max - extent)))
            multiplier = int(rng.choice(rules.multipliers))
            if not shape.contains_disk(center, extent):
                continue
            if not rules.allow_overlap and any(
                np.hypot(center[0] - other.center[0], center[1] - other.center[1]) <= extent + other.bounding_radius
                for other in regions
            ):
                continue
            regions.append(Region(center, radii, angle, multiplier))
            break
        else:
            raise GeometryError("Could not place a contrast region", retries=rules.max_retries, placed=len(regions))
    return regions


def sample_phantom(
    seed: int,
    shape: DomainShape,
    rules: Optional[PhantomConfig] = None,
    background: float = 0.01,
) -> Phantom:
    """
    Draw a phantom with circular contrast regions.

    Radii, centers and multipliers are drawn independently per region; a
    region is redrawn until it lies inside the domain without touching the
    others, up to ``rules.max_retries`` attempts.
    """
    rules = rules or PhantomConfig()
    rng = generator(seed)
    return Phantom(background, tuple(_sample_regions(rng, shape, rules, elliptical=False)))


def sample_ood_phantom(
    seed: int,
    shape: DomainShape,
    rules: Optional[PhantomConfig] = None,
    background: float = 0.01,
) -> Phantom:
    """Draw a phantom with elliptical regions of random orientation in [0, pi)"""
    rules = rules or PhantomConfig()
    rng = generator(seed)
    return Phantom(background, tuple(_sample_regions(rng, shape, rules, elliptical=True)))
