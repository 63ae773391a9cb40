from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from ..errors import GeometryError


class DomainKind(str, Enum):
    RECTANGLE = "rectangle"
    SEMI_DISK = "semi_disk"


@dataclass(frozen=True)
class DomainShape:
    """
    Computational domain (lengths in cm).

    The rectangle spans [0, width] x [0, height]. The semi-disk is the upper
    half of the disk of ``radius`` centered at the origin, so both domains
    have their source plate on y = 0.
    """

    kind: DomainKind
    width: float = 0.0
    height: float = 0.0
    radius: float = 0.0

    def __post_init__(self):
        if self.kind == DomainKind.RECTANGLE:
            if self.width <= 0 or self.height <= 0:
                raise GeometryError("Rectangle dimensions must be positive", width=self.width, height=self.height)
        elif self.radius <= 0:
            raise GeometryError("Semi-disk radius must be positive", radius=self.radius)

    @classmethod
    def rectangle(cls, width: float = 10.0, height: float = 5.0) -> "DomainShape":
        return cls(DomainKind.RECTANGLE, width=width, height=height)

    @classmethod
    def semi_disk(cls, radius: float = 5.0) -> "DomainShape":
        return cls(DomainKind.SEMI_DISK, radius=radius)

    @classmethod
    def from_config(cls, geometry) -> "DomainShape":
        if geometry.domain == DomainKind.RECTANGLE.value:
            return cls.rectangle(geometry.width, geometry.height)
        return cls.semi_disk(geometry.radius)

    @property
    def is_rectangle(self) -> bool:
        return self.kind == DomainKind.RECTANGLE

    @property
    def bounding_box(self) -> Tuple[float, float, float, float]:
        """(x_min, x_max, y_min, y_max)"""
        if self.is_rectangle:
            return 0.0, self.width, 0.0, self.height
        return -self.radius, self.radius, 0.0, self.radius

    @property
    def bottom_span(self) -> Tuple[float, float]:
        x_min, x_max, _, _ = self.bounding_box
        return x_min, x_max

    @property
    def min_dimension(self) -> float:
        if self.is_rectangle:
            return min(self.width, self.height)
        return self.radius

    @property
    def area(self) -> float:
        if self.is_rectangle:
            return self.width * self.height
        return 0.5 * np.pi * self.radius**2

    @property
    def measuring_length(self) -> float:
        """Length of the boundary carrying detectors (everything but the bottom)"""
        if self.is_rectangle:
            return 2.0 * self.height + self.width
        return np.pi * self.radius

    def contains(self, points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        """Membership of points in the closed domain, up to ``tol``"""
        points = np.atleast_2d(points)
        x, y = points[:, 0], points[:, 1]
        if self.is_rectangle:
            return (x >= -tol) & (x <= self.width + tol) & (y >= -tol) & (y <= self.height + tol)
        return (x**2 + y**2 <= self.radius**2 + tol) & (y >= -tol)

    def contains_disk(self, center: Tuple[float, float], radius: float) -> bool:
        """Whether the closed disk lies entirely inside the domain"""
        cx, cy = center
        if self.is_rectangle:
            return (
                cx - radius >= 0.0
                and cx + radius <= self.width
                and cy - radius >= 0.0
                and cy + radius <= self.height
            )
        return np.hypot(cx, cy) + radius <= self.radius and cy - radius >= 0.0

    def measuring_point(self, s: np.ndarray) -> np.ndarray:
        """
        Points on the measuring boundary at arc length ``s``.

        The rectangle path runs up the left side, along the top and down the
        right side; the semi-disk path runs along the arc from (-r, 0) to (r, 0).
        """
        s = np.asarray(s, dtype=float)
        if self.is_rectangle:
            w, h = self.width, self.height
            points = np.empty(s.shape + (2,))
            left = s <= h
            top = (s > h) & (s <= h + w)
            right = s > h + w
            points[left] = np.stack([np.zeros(left.sum()), s[left]], axis=-1)
            points[top] = np.stack([s[top] - h, np.full(top.sum(), h)], axis=-1)
            points[right] = np.stack([np.full(right.sum(), w), h - (s[right] - h - w)], axis=-1)
            return points
        theta = np.pi - s / self.radius
        return np.stack([self.radius * np.cos(theta), self.radius * np.sin(theta)], axis=-1)
