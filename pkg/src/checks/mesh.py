from typing import Any

import numpy as np

from .base import BaseCheck, CheckChain
from ..schemas.results import CheckResult


class _MeshCheck(BaseCheck):
    def supports(self, subject: Any) -> bool:
        return hasattr(subject, "elements") and hasattr(subject, "boundary_edges")


class MeshOrientationCheck(_MeshCheck):
    """Every element must have positive signed area"""

    def _check(self, mesh) -> CheckResult:
        areas = mesh.areas
        bad = int(np.count_nonzero(areas <= 0))
        if bad:
            return CheckResult(passed=False, message=f"{bad} elements have non-positive signed area")
        return CheckResult(passed=True)


class MeshBoundaryCheck(_MeshCheck):
    """Every boundary edge belongs to exactly one element and carries a known tag"""

    def __init__(self, tags=("bottom", "lateral_top")):
        self.tags = set(tags)

    def _check(self, mesh) -> CheckResult:
        vertices = mesh.elements[:, :3]
        element_edges = np.concatenate([np.sort(vertices[:, pair], axis=1) for pair in ((0, 1), (1, 2), (2, 0))])
        unique, counts = np.unique(element_edges, axis=0, return_counts=True)
        count_of = {(int(a), int(b)): int(c) for (a, b), c in zip(unique, counts)}

        boundary = np.sort(mesh.boundary_edges[:, :2], axis=1)
        for a, b in boundary:
            if count_of.get((int(a), int(b)), 0) != 1:
                return CheckResult(passed=False, message=f"Boundary edge ({a}, {b}) is not on exactly one element")

        unknown = set(mesh.boundary_tags.tolist()) - self.tags
        if unknown:
            return CheckResult(passed=False, message=f"Unknown boundary tags: {sorted(unknown)}")

        n_open = int(np.count_nonzero(counts == 1))
        if n_open != len(boundary):
            return CheckResult(
                passed=False,
                message=f"{n_open} open element edges but {len(boundary)} tagged boundary edges",
            )
        return CheckResult(passed=True)


class MeshContainmentCheck(_MeshCheck):
    """Node coordinates lie in the closure of the domain"""

    def __init__(self, tol: float = 1e-9):
        self.tol = tol

    def _check(self, mesh) -> CheckResult:
        inside = mesh.shape.contains(mesh.nodes, tol=self.tol)
        if not inside.all():
            return CheckResult(passed=False, message=f"{int((~inside).sum())} nodes lie outside the domain")

        warnings = None
        if mesh.max_diameter > np.sqrt(2.0) * mesh.h * (1 + 1e-9):
            warnings = [f"max element diameter {mesh.max_diameter:.4g} exceeds sqrt(2)*h"]
        return CheckResult(passed=True, warnings=warnings)


def mesh_check_chain() -> CheckChain:
    return CheckChain([MeshOrientationCheck(), MeshBoundaryCheck(), MeshContainmentCheck()])
