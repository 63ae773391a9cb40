import numpy as np
import pytest

from src.errors import GeometryError, ShapeMismatchError
from src.geometry import (
    BOTTOM,
    LATERAL_TOP,
    DomainShape,
    build_mesh,
    build_probe_layout,
    build_voxel_grid,
    rasterize,
)


def test_rectangle_p1_counts(coarse_p1_mesh):
    """Test element and node counts of a structured rectangle mesh"""
    assert coarse_p1_mesh.n_elements == 400
    assert coarse_p1_mesh.n_nodes == 231
    assert coarse_p1_mesh.elements.shape == (400, 3)


def test_rectangle_p2_counts(coarse_mesh):
    """Test that P2 adds one node per unique edge"""
    assert coarse_mesh.n_elements == 400
    assert coarse_mesh.n_nodes == 231 + 630
    assert coarse_mesh.elements.shape == (400, 6)


def test_orientation_and_area(coarse_mesh, rectangle):
    """Test positive signed areas summing to the domain area"""
    assert np.all(coarse_mesh.areas > 0)
    assert coarse_mesh.areas.sum() == pytest.approx(rectangle.area)


def test_diameter_bound(coarse_mesh):
    """Test that no element is wider than sqrt(2) h"""
    assert coarse_mesh.max_diameter <= np.sqrt(2.0) * 0.5 + 1e-12


def test_boundary_tags(coarse_mesh):
    """Test that bottom edges lie on y = 0 and the rest on the measuring boundary"""
    bottom = coarse_mesh.boundary_nodes(BOTTOM)
    assert np.allclose(coarse_mesh.nodes[bottom, 1], 0.0)
    lateral = coarse_mesh.nodes[coarse_mesh.boundary_nodes(LATERAL_TOP)]
    on_side = np.isclose(lateral[:, 0], 0.0) | np.isclose(lateral[:, 0], 10.0) | np.isclose(lateral[:, 1], 5.0)
    assert on_side.all()
    # 20 bottom cells, 10 + 20 + 10 measuring cells
    assert len(coarse_mesh.boundary_edges_tagged(BOTTOM)) == 20
    assert len(coarse_mesh.boundary_edges_tagged(LATERAL_TOP)) == 40


def test_midpoints_are_edge_centers(coarse_mesh):
    """Test that P2 midpoint nodes sit halfway along their edge"""
    elements = coarse_mesh.elements
    nodes = coarse_mesh.nodes
    expected = 0.5 * (nodes[elements[:, 0]] + nodes[elements[:, 1]])
    assert np.allclose(nodes[elements[:, 3]], expected)


def test_semi_disk_mesh(semi_disk):
    """Test a semi-disk mesh covers the half disk"""
    mesh = build_mesh(semi_disk, 0.5, order=1)
    assert np.all(mesh.areas > 0)
    assert mesh.areas.sum() == pytest.approx(semi_disk.area, rel=0.02)
    assert semi_disk.contains(mesh.nodes).all()
    bottom = mesh.nodes[mesh.boundary_nodes(BOTTOM)]
    assert np.allclose(bottom[:, 1], 0.0)
    arc = mesh.nodes[mesh.boundary_nodes(LATERAL_TOP)]
    assert np.allclose(np.hypot(arc[:, 0], arc[:, 1]), 5.0)


@pytest.mark.parametrize("h", [0.0, -0.1, 6.0])
def test_invalid_mesh_size(rectangle, h):
    """Test that non-positive or oversized h is rejected"""
    with pytest.raises(GeometryError):
        build_mesh(rectangle, h)


def test_invalid_domain():
    """Test degenerate domains"""
    with pytest.raises(GeometryError):
        DomainShape.rectangle(width=0.0)
    with pytest.raises(GeometryError):
        DomainShape.semi_disk(radius=-1.0)


def test_interpolation_reproduces_linear_fields(coarse_mesh):
    """Test that interpolation rows sum to one and are exact on linear fields"""
    points = np.array([[0.3, 0.2], [5.0, 2.5], [9.99, 4.99], [7.1, 0.0]])
    matrix = coarse_mesh.interpolation_matrix(points)
    assert np.allclose(np.asarray(matrix.sum(axis=1)).ravel(), 1.0)
    field = 2.0 * coarse_mesh.nodes[:, 0] - 3.0 * coarse_mesh.nodes[:, 1] + 1.0
    expected = 2.0 * points[:, 0] - 3.0 * points[:, 1] + 1.0
    assert np.allclose(matrix @ field, expected)


def test_locate_outside(coarse_mesh):
    """Test that points far outside the mesh are rejected"""
    with pytest.raises(GeometryError, match="outside"):
        coarse_mesh.locate(np.array([[20.0, 20.0]]))


def test_probe_layout(rectangle):
    """Test source spacing and detector placement"""
    layout = build_probe_layout(rectangle)
    assert layout.n_s == 19
    assert layout.n_d == 200
    assert layout.n_measurements == 3800
    assert np.allclose(layout.sources[:, 1], 0.1)
    assert np.allclose(np.diff(layout.sources[:, 0]), 0.5)
    assert layout.sources[0, 0] == pytest.approx(0.5)
    on_boundary = (
        np.isclose(layout.detectors[:, 0], 0.0)
        | np.isclose(layout.detectors[:, 0], 10.0)
        | np.isclose(layout.detectors[:, 1], 5.0)
    )
    assert on_boundary.all()
    assert np.all(np.diff(layout.detector_arclength) > 0)


def test_probe_layout_semi_disk(semi_disk):
    """Test detectors on the arc of the semi-disk"""
    layout = build_probe_layout(semi_disk, n_s=5, n_d=40)
    assert np.allclose(np.hypot(layout.detectors[:, 0], layout.detectors[:, 1]), 5.0)
    assert np.all(layout.detectors[:, 1] > 0)


def test_probe_layout_invalid(rectangle):
    """Test invalid probe counts and depths"""
    with pytest.raises(GeometryError):
        build_probe_layout(rectangle, n_s=0)
    with pytest.raises(GeometryError):
        build_probe_layout(rectangle, depth=10.0)


def test_with_amplitudes(small_layout):
    """Test per-source amplitudes"""
    scaled = small_layout.with_amplitudes(2.0)
    assert np.allclose(scaled.amplitudes, 2.0)
    assert np.allclose(small_layout.amplitudes, 1.0)


def test_voxel_grid_defaults(rectangle, semi_disk):
    """Test the default reconstruction grids"""
    grid = build_voxel_grid(rectangle)
    assert grid.image_shape == (40, 80)
    assert grid.V == 3200
    assert grid.voxel_size == pytest.approx(0.125)

    disk = build_voxel_grid(semi_disk)
    assert disk.image_shape == (20, 40)
    assert 0 < disk.V < 800
    assert semi_disk.contains(disk.active_centers).all()


def test_voxel_grid_must_be_square(rectangle):
    """Test that inconsistent nx and ny are rejected"""
    with pytest.raises(GeometryError):
        build_voxel_grid(rectangle, nx=16, ny=16)


def test_voxel_row_zero_is_top(small_grid):
    """Test image orientation"""
    centers = small_grid.centers
    assert centers[0, 0, 1] > centers[-1, 0, 1]
    assert centers[0, 0, 0] < centers[0, -1, 0]


def test_voxel_vector_layout(small_grid):
    """Test scattering V-vectors into images and back"""
    values = np.arange(small_grid.V, dtype=float)
    image = small_grid.to_image(values)
    assert image.shape == small_grid.image_shape
    assert np.array_equal(small_grid.from_image(image), values)
    with pytest.raises(ShapeMismatchError):
        small_grid.to_image(values[:-1])


def test_voxel_index(small_grid):
    """Test point to voxel lookup"""
    index = small_grid.voxel_index(np.array([[0.1, 4.9], [9.9, 0.1]]))
    assert index[0] == 0
    assert index[1] == small_grid.V - 1


def test_rasterize_callable_and_nodal(small_grid, coarse_mesh):
    """Test sampling analytic and nodal fields on the grid"""
    image = rasterize(lambda p: p[:, 0], small_grid)
    assert np.allclose(image[0], small_grid.centers[0, :, 0])
    nodal = coarse_mesh.nodes[:, 1].copy()
    image = rasterize(nodal, small_grid, mesh=coarse_mesh)
    assert np.allclose(image, small_grid.centers[..., 1])
    with pytest.raises(ShapeMismatchError):
        rasterize(nodal[:-1], small_grid, mesh=coarse_mesh)


def test_export_text(tmp_path, coarse_p1_mesh):
    """Test the plain-text mesh listing"""
    path = tmp_path / "mesh.txt"
    coarse_p1_mesh.export_text(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "mesh rectangle order 1 h 0.5"
    assert sum(line.startswith("node ") for line in lines) == 231
    assert sum(line.startswith("element ") for line in lines) == 400
    assert sum(line.startswith("boundary bottom ") for line in lines) == 20
    assert sum(line.startswith("boundary lateral_top ") for line in lines) == 40
