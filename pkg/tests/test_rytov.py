import numpy as np
import pytest

from src.errors import InvalidParameterError, ShapeMismatchError
from src.forward import ForwardModel
from src.geometry import build_voxel_grid, DomainShape
from src.rytov import assemble_jacobian, background_solve, build_rhs, rytov_system, voxel_quadrature


@pytest.fixture(scope="module")
def background(small_scene):
    scene = small_scene
    return background_solve(scene.mesh, scene.config.optics, scene.layout, scene.config.forward)


@pytest.fixture(scope="module")
def jacobian(background, small_scene):
    return assemble_jacobian(background, small_scene.grid, small_scene.config.optics)


def test_background_matches_forward_model(background, small_scene):
    """Test that the background sinogram equals a plain forward solve"""
    expected = small_scene.model.sinogram(small_scene.config.optics.mu_a_background).values
    assert np.allclose(background.sinogram.values, expected)
    assert background.fluence.shape == (small_scene.mesh.n_nodes, 3)
    assert background.adjoint.shape == (small_scene.mesh.n_nodes, 12)


def test_adjoint_reciprocity(background, small_scene):
    """Test that readings equal the source loads paired with the adjoint fields"""
    loads = small_scene.model.loads
    reciprocal = (background.adjoint.T @ loads).T
    assert np.allclose(reciprocal, background.sinogram.values, rtol=1e-8)


def _central_column(model, grid, mu0, v, step=1e-5):
    """Central difference of the log sinogram with respect to voxel v"""
    values = np.full(grid.V, mu0)
    values[v] = mu0 + step
    up = model.sinogram(grid.piecewise_field(values, background=mu0)).flat
    values[v] = mu0 - step
    down = model.sinogram(grid.piecewise_field(values, background=mu0)).flat
    return (np.log(up) - np.log(down)) / (2 * step)


def test_jacobian_shape_and_sign(jacobian, small_scene):
    """Test row ordering dims and that absorption lowers every log reading"""
    assert jacobian.J.shape == (36, small_scene.grid.V)
    assert jacobian.M == 36
    assert jacobian.V == small_scene.grid.V
    assert jacobian.kernel == "rytov"
    assert np.all(np.isfinite(jacobian.J))
    assert np.all(jacobian.J < 0)


def test_voxel_quadrature_covers_domain(small_scene):
    """Test that the voxel weights partition the rectangle area"""
    P = voxel_quadrature(small_scene.mesh, small_scene.grid)
    assert P.shape[0] == small_scene.grid.V
    assert np.all(np.diff(P.indptr) > 0)
    assert P.sum() == pytest.approx(small_scene.grid.V * small_scene.grid.voxel_area, rel=1e-12)


def test_jacobian_matches_constant_diffusion_differences(jacobian, small_scene):
    """Test two columns against central differences with D held at its background value"""
    scene = small_scene
    forward = scene.config.forward.model_copy(update={"diffusion": "constant"})
    model = ForwardModel(scene.mesh, scene.layout, scene.config.optics, forward)
    mu0 = scene.config.optics.mu_a_background
    for v in scene.grid.voxel_index(np.array([[5.1, 2.6], [0.3, 3.9]])):
        column = _central_column(model, scene.grid, mu0, v)
        assert np.allclose(jacobian.J[:, v], column, rtol=1e-3, atol=1e-6 * np.abs(column).max())


def test_full_kernel_matches_coupled_differences(background, small_scene):
    """Test the full kernel against central differences of the coupled forward model"""
    scene = small_scene
    full = assemble_jacobian(background, scene.grid, scene.config.optics, kernel="full")
    v = scene.grid.voxel_index(np.array([[5.1, 2.6]]))[0]
    column = _central_column(scene.model, scene.grid, scene.config.optics.mu_a_background, v)
    assert np.allclose(full.J[:, v], column, rtol=1e-3, atol=1e-6 * np.abs(column).max())


def test_kernels_differ(jacobian, background, small_scene):
    """Test that the reduced kernel drops the gradient term"""
    full = assemble_jacobian(background, small_scene.grid, small_scene.config.optics, kernel="full")
    assert full.kernel == "full"
    assert not np.allclose(full.J, jacobian.J)


def test_unknown_kernel(background, small_scene):
    """Test unknown kernel names"""
    with pytest.raises(InvalidParameterError):
        assemble_jacobian(background, small_scene.grid, small_scene.config.optics, kernel="born")


def test_grid_domain_mismatch(background, small_scene):
    """Test a voxel grid of another domain"""
    grid = build_voxel_grid(DomainShape.semi_disk())
    with pytest.raises(ShapeMismatchError):
        assemble_jacobian(background, grid, small_scene.config.optics)


def test_single_precision(background, small_scene):
    """Test float32 storage"""
    system = assemble_jacobian(background, small_scene.grid, small_scene.config.optics, single_precision=True)
    assert system.J.dtype == np.float32


def test_build_rhs():
    """Test the log-ratio right-hand side"""
    b = build_rhs(np.array([2.0, 1.0, 0.5]), np.array([1.0, 1.0, 1.0]))
    assert np.allclose(b, np.log([2.0, 1.0, 0.5]))
    with pytest.raises(InvalidParameterError):
        build_rhs(np.array([1.0, 0.0]), np.array([1.0, 1.0]))
    with pytest.raises(ShapeMismatchError):
        build_rhs(np.ones(3), np.ones(2))


def test_with_rhs(jacobian):
    """Test attaching measured data to a system"""
    y0 = jacobian.background_sinogram.flat
    system = jacobian.with_rhs(y0 * 1.1)
    assert np.allclose(system.b, np.log(1.1))
    assert system.J is jacobian.J


def test_rytov_system(small_scene):
    """Test the combined background solve and assembly"""
    scene = small_scene
    system = rytov_system(scene.mesh, scene.config.optics, scene.layout, scene.grid, scene.config.forward)
    assert system.J.shape == (scene.layout.n_measurements, scene.grid.V)
    assert system.b is None
