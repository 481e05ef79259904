"""法标架、法丛识别及其逆、指数映射"""

import logging

import numpy as np
import pytest

from sasaki_deform.ambient.structure import AmbientStructure
from sasaki_deform.core.config import settings
from sasaki_deform.core.errors import ParameterError, StepSizeError
from sasaki_deform.deform.normal import (
    NormalField,
    exp_deform,
    identification_inverse,
    identification_matrix,
    normal_frames,
    normal_identification,
    random_normal_field,
    reeb_field,
    tangent_spaces,
)
from sasaki_deform.deform.pullback import eta_order, integrate_eta
from sasaki_deform.mesh.builders import build_clifford_circle
from sasaki_deform.mesh.complex import to_real
from sasaki_deform.mesh.metric import real_inner


class TestFrames:
    @pytest.mark.parametrize("source", ["circle", "torus"])
    def test_orthonormal_and_normal(self, request: pytest.FixtureRequest, source: str) -> None:
        mesh, embedding = request.getfixturevalue(source)
        frames = normal_frames(mesh, embedding)
        width = mesh.dim + 1
        assert frames.shape == (mesh.n_vertices, width, mesh.dim + 1)
        gram = real_inner(frames[:, :, None, :], frames[:, None, :, :])
        np.testing.assert_allclose(gram, np.broadcast_to(np.eye(width), gram.shape), atol=1e-12)
        radial = real_inner(embedding.points[:, None, :], frames)
        assert np.max(np.abs(radial)) < 1e-12
        tangent = tangent_spaces(mesh, embedding)
        overlap = np.einsum("vkm,vjm->vkj", to_real(frames), tangent)
        assert np.max(np.abs(overlap)) < 1e-12

    def test_first_vector_is_reeb(self, circle) -> None:
        mesh, embedding = circle
        frames = normal_frames(mesh, embedding)
        np.testing.assert_allclose(frames[:, 0, :], 1j * embedding.points, atol=1e-12)


class TestIdentification:
    def test_reeb_field_maps_to_constant(self, torus, torus_structure) -> None:
        mesh, embedding = torus
        f, alpha = normal_identification(
            mesh, embedding, torus_structure, reeb_field(embedding, torus_structure)
        )
        np.testing.assert_allclose(f.values, 1.0, atol=1e-12)
        assert np.max(np.abs(alpha.values)) < 1e-12

    def test_inverse_reproduces_pair(self, torus, torus_structure) -> None:
        mesh, embedding = torus
        field = random_normal_field(mesh, embedding, seed=4)
        f, alpha = normal_identification(mesh, embedding, torus_structure, field)
        recovered = identification_inverse(
            mesh, embedding, torus_structure, f.values, alpha.values
        )
        f2, alpha2 = normal_identification(mesh, embedding, torus_structure, recovered)
        np.testing.assert_allclose(f2.values, f.values, atol=1e-8)
        np.testing.assert_allclose(alpha2.values, alpha.values, atol=1e-8)

    def test_transverse_field_has_no_reeb_part(self, torus, torus_structure) -> None:
        mesh, embedding = torus
        field = random_normal_field(mesh, embedding, seed=1, transverse=True)
        f, _ = normal_identification(mesh, embedding, torus_structure, field)
        assert np.max(np.abs(f.values)) < 1e-12

    def test_alpha_matches_edge_integral_variation(self, torus, torus_structure) -> None:
        mesh, embedding = torus
        edges = mesh.edges
        field = random_normal_field(mesh, embedding, seed=3, amplitude=0.5)
        f, alpha = normal_identification(mesh, embedding, torus_structure, field)
        rule = eta_order(settings.QUADRATURE_ORDER)
        step = 1e-4
        ahead = integrate_eta(
            exp_deform(mesh, embedding, field, step), edges, torus_structure, rule
        )
        behind = integrate_eta(
            exp_deform(mesh, embedding, field, -step), edges, torus_structure, rule
        )
        expected = f.values[edges[:, 1]] - f.values[edges[:, 0]] + 2 * alpha.values
        np.testing.assert_allclose((ahead - behind) / (2 * step), expected, atol=1e-7)

    def test_matrix_agrees_with_identification(self, torus, torus_structure) -> None:
        mesh, embedding = torus
        frames = normal_frames(mesh, embedding)
        field = random_normal_field(mesh, embedding, seed=6, frames=frames)
        coeff = real_inner(frames, field.values[:, None, :]).ravel()
        f, alpha = normal_identification(mesh, embedding, torus_structure, field)
        matrix = identification_matrix(mesh, embedding, torus_structure, frames)
        np.testing.assert_allclose(
            matrix @ coeff, np.concatenate([f.values, alpha.values]), atol=1e-12
        )

    def test_length_mismatch(self, torus, torus_structure) -> None:
        mesh, embedding = torus
        with pytest.raises(ParameterError):
            identification_inverse(mesh, embedding, torus_structure, np.zeros(3), np.zeros(3))


class TestExpDeform:
    def test_zero_step_is_identity(self, circle) -> None:
        mesh, embedding = circle
        field = random_normal_field(mesh, embedding, seed=0)
        moved = exp_deform(mesh, embedding, field, 0.0)
        np.testing.assert_allclose(moved.points, embedding.points, atol=1e-15)

    def test_reeb_step_is_rotation(self, circle) -> None:
        mesh, embedding = circle
        structure = AmbientStructure.standard(1)
        moved = exp_deform(mesh, embedding, reeb_field(embedding, structure), 0.2)
        np.testing.assert_allclose(moved.points, np.exp(0.2j) * embedding.points, atol=1e-12)

    def test_step_size_bound(self, circle) -> None:
        mesh, embedding = circle
        field = random_normal_field(mesh, embedding, seed=0)
        with pytest.raises(StepSizeError):
            exp_deform(mesh, embedding, field, 2.0 * settings.NORMAL_RADIUS)

    def test_radial_part_projected(
        self, circle, monkeypatch: pytest.MonkeyPatch, caplog: pytest.LogCaptureFixture
    ) -> None:
        monkeypatch.setattr(logging.getLogger("sasaki_deform"), "propagate", True)
        mesh, embedding = circle
        field = NormalField(1j * embedding.points + 0.5 * embedding.points)
        with caplog.at_level(logging.WARNING, logger="sasaki_deform"):
            moved = exp_deform(mesh, embedding, field, 0.1)
        assert "projecting" in caplog.text
        np.testing.assert_allclose(moved.points, np.exp(0.1j) * embedding.points, atol=1e-12)

    def test_random_field_amplitude(self, torus) -> None:
        field = random_normal_field(*torus, seed=2, amplitude=0.01)
        assert field.max_norm == pytest.approx(0.01)

    @pytest.mark.parametrize("seed", range(3))
    def test_random_field_smooth_between_vertices(self, seed: int) -> None:
        # 标架符号逐顶点任意，场本身应随加密变平滑
        jumps = []
        for segments in (512, 1024):
            field = random_normal_field(*build_clifford_circle(segments), seed=seed)
            jumps.append(np.max(np.linalg.norm(np.diff(field.values, axis=0), axis=1)))
        assert jumps[0] < 0.5
        assert jumps[1] < 0.6 * jumps[0]
