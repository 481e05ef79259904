"""单纯复形、内置网格、细分、诱导度量与网格文件"""

import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sasaki_deform.core.errors import InvalidMeshError, MeshParseError, SingularMetricError
from sasaki_deform.mesh.builders import (
    build_clifford_circle,
    build_clifford_torus,
    build_random_loop,
    build_round_circle,
)
from sasaki_deform.mesh.complex import Embedding, SimplicialComplex, to_complex, to_real
from sasaki_deform.mesh.io import dumps, load_mesh, loads, save_mesh
from sasaki_deform.mesh.metric import (
    MetricData,
    flat_torus_metric,
    induced_metric,
    simplex_volumes,
)
from sasaki_deform.mesh.refine import refine, refine_times


class TestComplex:
    def test_circle_betti(self, circle) -> None:
        mesh, _ = circle
        assert mesh.betti_numbers() == [1, 1]

    def test_torus_betti(self, torus) -> None:
        mesh, _ = torus
        assert mesh.betti_numbers() == [1, 2, 1]

    def test_torus_counts(self, torus) -> None:
        mesh, _ = torus
        assert [mesh.count(k) for k in range(3)] == [64, 192, 128]

    @given(n1=st.integers(3, 6), n2=st.integers(3, 6), levels=st.integers(0, 1))
    def test_boundary_of_boundary(self, n1: int, n2: int, levels: int) -> None:
        mesh, embedding = refine_times(*build_clifford_torus(n1, n2), levels)
        product = mesh.boundary(1) @ mesh.boundary(2)
        assert product.count_nonzero() == 0

    def test_duplicate_simplex(self) -> None:
        with pytest.raises(InvalidMeshError):
            SimplicialComplex.from_tables(1, 3, {1: np.array([[0, 1], [1, 2], [2, 0], [1, 0]])})

    def test_inconsistent_orientation(self) -> None:
        mesh, _ = build_clifford_torus(3, 3)
        top = mesh.top.copy()
        top[0, [0, 1]] = top[0, [1, 0]]
        with pytest.raises(InvalidMeshError):
            SimplicialComplex(dim=2, simplices=mesh.simplices[:-1] + (top,))

    def test_reversed_keeps_topology(self, torus) -> None:
        mesh, _ = torus
        assert mesh.reversed().betti_numbers() == [1, 2, 1]

    def test_off_sphere_rejected(self) -> None:
        with pytest.raises(InvalidMeshError) as info:
            Embedding(points=np.array([[1.0, 0.1]], dtype=complex))
        assert info.value.detail["vertex"] == 0

    def test_real_complex_layout(self, rng: np.random.Generator) -> None:
        z = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
        real = to_real(z)
        assert real[0, 1] == z[0, 0].imag
        np.testing.assert_array_equal(to_complex(real), z)


class TestBuilders:
    def test_circle_is_legendrian_polygon(self, circle) -> None:
        _, embedding = circle
        pts = embedding.points
        np.testing.assert_allclose(np.abs(pts), 1 / np.sqrt(2))

    def test_too_few_segments(self) -> None:
        with pytest.raises(InvalidMeshError):
            build_clifford_circle(2)
        with pytest.raises(InvalidMeshError):
            build_clifford_torus(2, 5)

    def test_control_curves_on_sphere(self) -> None:
        for mesh, embedding in (build_round_circle(16, np.pi / 4), build_random_loop(16, seed=3)):
            assert mesh.dim == 1
            np.testing.assert_allclose(np.linalg.norm(embedding.points, axis=1), 1.0)


class TestRefine:
    def test_circle_counts(self, circle) -> None:
        mesh, embedding = refine(*circle)
        assert mesh.n_vertices == 64 and mesh.count(1) == 64
        np.testing.assert_allclose(np.linalg.norm(embedding.points, axis=1), 1.0)

    def test_torus_counts(self, torus) -> None:
        mesh, _ = refine(*torus)
        assert [mesh.count(k) for k in range(3)] == [64 + 192, 2 * 192 + 3 * 128, 4 * 128]
        assert mesh.betti_numbers() == [1, 2, 1]

    def test_edge_length_halves(self, circle) -> None:
        coarse = simplex_volumes(circle[0], circle[1], 1).max()
        fine_mesh, fine_emb = refine(*circle)
        fine = simplex_volumes(fine_mesh, fine_emb, 1).max()
        assert fine / coarse == pytest.approx(0.5, rel=1e-2)


class TestMetric:
    def test_circle_length(self, circle) -> None:
        metric = induced_metric(*circle)
        n = 32
        assert metric.total_volume == pytest.approx(2 * n * np.sin(np.pi / n))

    def test_torus_area_converges(self) -> None:
        # Clifford 环面面积 4π²/√3
        exact = 4 * np.pi**2 / np.sqrt(3)
        errors = []
        for size in (8, 16):
            metric = induced_metric(*build_clifford_torus(size, size))
            errors.append(abs(metric.total_volume - exact))
        assert errors[0] / errors[1] > 3.0

    def test_degenerate_simplex(self) -> None:
        with pytest.raises(SingularMetricError) as info:
            MetricData.from_gram(np.array([[[1.0, 1.0], [1.0, 1.0]]]))
        assert info.value.simplex == 0

    def test_scaled(self, torus) -> None:
        metric = induced_metric(*torus)
        assert metric.scaled(4.0).total_volume == pytest.approx(4.0 * metric.total_volume)

    def test_flat_torus_area(self, torus) -> None:
        mesh, _ = torus
        metric = flat_torus_metric(mesh, 8, 8, np.eye(2))
        assert metric.total_volume == pytest.approx(1.0)


class TestMeshIO:
    def test_file_round_trip(self, torus, tmp_path: Path) -> None:
        mesh, embedding = torus
        path = save_mesh(mesh, embedding, tmp_path / "torus.json")
        loaded_mesh, loaded_emb = load_mesh(path)
        np.testing.assert_array_equal(loaded_emb.points, embedding.points)
        np.testing.assert_array_equal(loaded_mesh.top, mesh.top)
        assert dumps(loaded_mesh, loaded_emb) == dumps(mesh, embedding)

    def test_signed_zero_written_as_zero(self) -> None:
        mesh, embedding = build_clifford_circle(8)
        real = to_real(embedding.points)
        real[real == 0.0] = -0.0
        points = np.empty(embedding.points.shape, dtype=np.complex128)
        points.real, points.imag = real[:, 0::2], real[:, 1::2]
        flipped = Embedding(points)
        coords = to_real(flipped.points)
        assert np.signbit(coords[coords == 0.0]).any()
        text = dumps(mesh, flipped)
        written = np.array(json.loads(text)["vertices"])
        assert not np.signbit(written[written == 0.0]).any()
        assert dumps(*loads(text)) == text

    def test_not_json(self) -> None:
        with pytest.raises(MeshParseError) as info:
            loads("{not json")
        assert info.value.detail["line"] == 1

    def test_wrong_ambient_dim(self, circle) -> None:
        raw = json.loads(dumps(*circle))
        raw["ambient_dim"] = 6
        with pytest.raises(MeshParseError):
            loads(json.dumps(raw))

    def test_missing_key_names_field(self, circle) -> None:
        raw = json.loads(dumps(*circle))
        del raw["vertices"]
        with pytest.raises(MeshParseError) as info:
            loads(json.dumps(raw))
        assert info.value.detail["field"] == "vertices"
        assert info.value.exit_code == 2

    def test_sphere_tolerance(self, circle) -> None:
        raw = json.loads(dumps(*circle))
        raw["vertices"][0][0] *= 1.01
        with pytest.raises(InvalidMeshError):
            loads(json.dumps(raw))
        mesh, _ = loads(json.dumps(raw), sphere_tol=0.1)
        assert mesh.n_vertices == 32
