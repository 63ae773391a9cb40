import numpy as np
import pytest
from scipy.sparse import linalg as spla

from src.config import OpticalConfig
from src.errors import InvalidParameterError, ShapeMismatchError, SolverError
from src.forward import (
    FactorizedOperator,
    ForwardModel,
    assemble_system,
    diffusion_coefficient,
    l2_error,
    manufactured_problem,
    measure,
    solve_forward,
)
from src.forward.assembly import boundary_load, gaussian_source_samples, volume_load
from src.geometry import build_mesh


def _manufactured_error(rectangle, h: float, order: int) -> float:
    optics = OpticalConfig()
    mu_a = 0.05
    mesh = build_mesh(rectangle, h, order=order)
    exact, f, g = manufactured_problem(optics, mu_a)
    system = assemble_system(mesh, mu_a, optics)
    load = volume_load(mesh, f) + boundary_load(mesh, g)
    nodal = system.expand(spla.spsolve(system.matrix, system.restrict(load)))
    return l2_error(mesh, nodal, exact)


def test_diffusion_coefficient():
    """Test D = 1 / (3 (mu_a + mu_s'))"""
    optics = OpticalConfig()
    assert float(diffusion_coefficient(0.01, optics)) == pytest.approx(1.0 / 0.63)
    assert optics.background_diffusion == pytest.approx(1.0 / 0.63)


@pytest.mark.parametrize("order,min_rate", [(1, 1.7), (2, 2.6)])
def test_manufactured_solution_converges(rectangle, order, min_rate):
    """Test the L2 convergence rate against an exact solution"""
    coarse = _manufactured_error(rectangle, 1.0, order)
    fine = _manufactured_error(rectangle, 0.5, order)
    assert fine < coarse
    assert np.log2(coarse / fine) > min_rate


def test_quadratic_beats_linear(rectangle):
    """Test that P2 is more accurate than P1 on the same mesh"""
    assert _manufactured_error(rectangle, 0.5, 2) < _manufactured_error(rectangle, 0.5, 1)


def test_system_is_symmetric(coarse_mesh):
    """Test exact symmetry of the assembled operator"""
    system = assemble_system(coarse_mesh, 0.01, OpticalConfig())
    matrix = system.matrix
    assert abs(matrix - matrix.T).max() == 0.0
    assert matrix.shape[0] == coarse_mesh.n_nodes - len(coarse_mesh.boundary_nodes("bottom"))


def test_nodal_and_callable_absorption_agree(coarse_mesh):
    """Test that equivalent absorption fields assemble the same operator"""
    optics = OpticalConfig()
    scalar = assemble_system(coarse_mesh, 0.02, optics).matrix
    nodal = assemble_system(coarse_mesh, np.full(coarse_mesh.n_nodes, 0.02), optics).matrix
    analytic = assemble_system(coarse_mesh, lambda p: np.full(len(p), 0.02), optics).matrix
    assert abs(scalar - nodal).max() < 1e-14
    assert abs(scalar - analytic).max() < 1e-14


def test_invalid_absorption(coarse_mesh):
    """Test that non-positive absorption is rejected"""
    with pytest.raises(InvalidParameterError):
        assemble_system(coarse_mesh, 0.0, OpticalConfig())
    with pytest.raises(ShapeMismatchError):
        assemble_system(coarse_mesh, np.ones(3), OpticalConfig())


def test_constant_diffusion_option(coarse_mesh):
    """Test that holding D only changes the operator away from the background absorption"""
    optics = OpticalConfig()
    coupled = assemble_system(coarse_mesh, optics.mu_a_background, optics).matrix
    held = assemble_system(coarse_mesh, optics.mu_a_background, optics, constant_diffusion=True).matrix
    assert abs(coupled - held).max() < 1e-14

    coupled = assemble_system(coarse_mesh, 0.5, optics).matrix
    held = assemble_system(coarse_mesh, 0.5, optics, constant_diffusion=True).matrix
    assert abs(coupled - held).max() > 1e-3


def test_gaussian_source_weights(coarse_mesh):
    """Test that source samples stay inside the domain and keep the amplitude"""
    points, weights = gaussian_source_samples(np.array([5.0, 0.1]), 0.05, coarse_mesh, amplitude=2.0)
    assert weights.sum() == pytest.approx(2.0)
    assert np.all(points[:, 1] >= 0.0)
    assert len(points) < 49
    with pytest.raises(InvalidParameterError):
        gaussian_source_samples(np.array([20.0, 20.0]), 0.05, coarse_mesh)


def test_sinogram_positive(small_scene):
    """Test that background readings are finite and positive"""
    sinogram = small_scene.model.sinogram(0.01)
    assert sinogram.values.shape == (3, 12)
    assert sinogram.M == 36
    assert np.all(np.isfinite(sinogram.values))
    assert np.all(sinogram.values > 0)


def test_absorption_lowers_readings(small_scene):
    """Test that a more absorbing medium reads less light everywhere"""
    low = small_scene.model.sinogram(0.01).values
    high = small_scene.model.sinogram(0.02).values
    assert np.all(high < low)


def test_readings_scale_with_amplitude(small_scene):
    """Test linearity in the source amplitudes"""
    scene = small_scene
    base = scene.model.sinogram(0.01).values
    doubled = ForwardModel(scene.mesh, scene.layout.with_amplitudes(2.0), scene.config.optics, scene.config.forward)
    assert np.allclose(doubled.sinogram(0.01).values, 2.0 * base, rtol=1e-10)


def test_solve_forward_and_measure(small_scene):
    """Test that per-source fields measure to the model's sinogram"""
    scene = small_scene
    fields = solve_forward(scene.mesh, 0.01, scene.config.optics, scene.layout, scene.config.forward)
    assert len(fields) == scene.layout.n_s
    assert [field.source_index for field in fields] == [0, 1, 2]
    sinogram = measure(fields, scene.layout)
    assert np.allclose(sinogram.values, scene.model.sinogram(0.01).values)
    with pytest.raises(ShapeMismatchError):
        measure(fields[:2], scene.layout)
    with pytest.raises(ShapeMismatchError):
        measure([], scene.layout)


def test_cg_matches_direct(coarse_mesh):
    """Test that both linear solvers agree"""
    system = assemble_system(coarse_mesh, 0.01, OpticalConfig())
    rhs = np.random.default_rng(0).standard_normal((system.matrix.shape[0], 2))
    direct = FactorizedOperator(system.matrix, "direct").solve(rhs)
    iterative = FactorizedOperator(system.matrix, "cg", rtol=1e-8).solve(rhs)
    assert np.allclose(direct, iterative, rtol=1e-5, atol=1e-8)


def test_cg_uses_incomplete_lu_preconditioner(coarse_mesh, mocker):
    """Test that conjugate gradients is preconditioned by ILU of the symmetric matrix"""
    spilu = mocker.spy(spla, "spilu")
    system = assemble_system(coarse_mesh, 0.01, OpticalConfig())
    operator = FactorizedOperator(system.matrix, "cg")
    spilu.assert_called_once()
    assert isinstance(operator._preconditioner, spla.LinearOperator)
    assert operator._preconditioner.shape == system.matrix.shape


def test_unknown_solver(coarse_mesh):
    """Test unknown linear solver names"""
    system = assemble_system(coarse_mesh, 0.01, OpticalConfig())
    with pytest.raises(SolverError):
        FactorizedOperator(system.matrix, "magic")


def test_cg_residual_check(coarse_mesh):
    """Test that an unconverged solve raises"""
    system = assemble_system(coarse_mesh, 0.01, OpticalConfig())
    operator = FactorizedOperator(system.matrix, "cg", rtol=1e-14, max_iter=1)
    rhs = np.ones(system.matrix.shape[0])
    with pytest.raises(SolverError, match="residual"):
        operator.solve(rhs)
