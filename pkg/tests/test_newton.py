"""Newton–Green 修正"""

import numpy as np
import pytest

from sasaki_deform.ambient.structure import AmbientStructure
from sasaki_deform.core.errors import DivergenceError, ParameterError
from sasaki_deform.deform.newton import green_solve, newton_green_correct
from sasaki_deform.deform.normal import exp_deform, identification_inverse, random_normal_field
from sasaki_deform.deform.operators import assemble_operator
from sasaki_deform.mesh.builders import build_clifford_circle

SEGMENTS = 64


@pytest.fixture(scope="module")
def circle64():
    return build_clifford_circle(SEGMENTS)


def _perturbed(mesh, embedding, seed: int, amplitude: float):
    field = random_normal_field(mesh, embedding, seed=seed, amplitude=amplitude)
    return exp_deform(mesh, embedding, field, 1.0)


def test_exact_input_needs_no_iterations(circle64) -> None:
    mesh, embedding = circle64
    corrected, log = newton_green_correct(mesh, embedding, AmbientStructure.standard(1))
    assert log.converged
    assert log.iterations == 0
    np.testing.assert_array_equal(corrected.points, embedding.points)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_recovers_from_small_noise(circle64, seed: int) -> None:
    mesh, embedding = circle64
    noisy = _perturbed(mesh, embedding, seed, 0.01)
    _, log = newton_green_correct(mesh, noisy, AmbientStructure.standard(1))
    assert log.converged
    assert log.final_residual < 1e-8
    assert log.iterations <= 6
    residuals = log.residuals
    for k in range(2, len(residuals)):
        assert residuals[k] <= 0.3 * residuals[k - 1]


def test_large_start_residual_diverges(circle64) -> None:
    mesh, embedding = circle64
    structure = AmbientStructure.standard(1)
    angles = np.arange(SEGMENTS) * 2 * np.pi / SEGMENTS
    field = identification_inverse(
        mesh, embedding, structure, 0.3 * np.cos(angles), np.zeros(mesh.count(1))
    )
    far = exp_deform(mesh, embedding, field, 1.0)
    with pytest.raises(DivergenceError) as info:
        newton_green_correct(mesh, far, structure)
    assert info.value.log


def test_iteration_cap_returns_best(circle64) -> None:
    mesh, embedding = circle64
    noisy = _perturbed(mesh, embedding, 0, 0.01)
    corrected, log = newton_green_correct(mesh, noisy, AmbientStructure.standard(1), max_iter=0)
    assert not log.converged
    assert len(log.residuals) == 1
    np.testing.assert_array_equal(corrected.points, noisy.points)


def test_green_solve_inverts_on_range(torus_ops, rng: np.random.Generator) -> None:
    operator = assemble_operator("nx_complex", torus_ops, 3.0)
    x = rng.standard_normal(operator.n_in)
    value = operator.apply(x)
    y = green_solve(operator, value)
    step = operator.solve_mass(operator.domain, operator.weak_apply1_t(y))
    np.testing.assert_allclose(operator.apply(step), value, atol=1e-8)


@pytest.mark.slow
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_recovers_on_fine_circle(seed: int) -> None:
    mesh, embedding = build_clifford_circle(256)
    noisy = _perturbed(mesh, embedding, seed, 0.01)
    _, log = newton_green_correct(mesh, noisy, AmbientStructure.standard(1))
    assert log.converged
    assert log.iterations <= 6
    residuals = log.residuals
    for k in range(2, len(residuals)):
        assert residuals[k] <= 0.3 * residuals[k - 1]


def test_unknown_kind_rejected(circle64) -> None:
    with pytest.raises(ParameterError):
        newton_green_correct(*circle64, AmbientStructure.standard(1), kind="lagrangian")
