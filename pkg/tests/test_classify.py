"""相位提取与分类"""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sasaki_deform.ambient.structure import AmbientStructure
from sasaki_deform.core.errors import NotNearLegendrianError
from sasaki_deform.deform.classify import (
    calibrated,
    classify,
    max_edge_length,
    phase_extract,
    verdict,
    wrap_angle,
)
from sasaki_deform.deform.linearization import convergence_table
from sasaki_deform.mesh.builders import (
    build_clifford_circle,
    build_clifford_torus,
    build_random_loop,
    build_round_circle,
)
from sasaki_deform.mesh.refine import refine


class TestPhase:
    def test_circle_phase(self, circle) -> None:
        estimate = phase_extract(*circle, AmbientStructure.standard(1))
        assert estimate.mean == pytest.approx(-np.pi / 2, abs=1e-10)
        assert estimate.max_deviation < 1e-10

    def test_torus_phase(self, torus) -> None:
        estimate = phase_extract(*torus, AmbientStructure.standard(2))
        assert abs(abs(estimate.mean) - np.pi) < 1e-8

    @given(theta=st.floats(-3.0, 3.0))
    def test_calibration_removes_phase(self, theta: float) -> None:
        mesh, embedding = build_clifford_circle(16)
        structure = calibrated(mesh, embedding, AmbientStructure.standard(1, theta))
        assert abs(phase_extract(mesh, embedding, structure).mean) < 1e-10

    def test_non_legendrian_rejected(self) -> None:
        # 纬圆上 |*ι*ψ| = cos φ
        mesh, embedding = build_round_circle(32, 1.4)
        with pytest.raises(NotNearLegendrianError) as info:
            phase_extract(mesh, embedding, AmbientStructure.standard(1))
        assert info.value.detail["modulus"] < 0.5

    def test_wrap_angle(self) -> None:
        wrapped = wrap_angle(np.array([3 * np.pi / 2, -3 * np.pi / 2]))
        np.testing.assert_allclose(wrapped, [-np.pi / 2, np.pi / 2])


class TestVerdict:
    def test_bands(self) -> None:
        assert verdict(0.05, 0.1, 10.0, 100.0).status == "pass"
        assert verdict(0.5, 0.1, 10.0, 100.0).status == "indeterminate"
        assert verdict(2.0, 0.1, 10.0, 100.0).status == "fail"
        assert verdict(0.05, 0.1, 10.0, 100.0).value


class TestClassify:
    def test_circle(self, circle) -> None:
        record = classify(*circle, AmbientStructure.standard(1))
        h = max_edge_length(*circle)
        assert record.legendrian.status == "pass"
        assert record.legendrian.residual < 10 * h * h
        assert record.theta_special.status == "pass"
        assert record.minimal_legendrian.status == "pass"
        # N = 32 时 |ψ^Im| ≈ 1 落在 10h² 与 100h² 之间
        assert record.special_legendrian.status != "pass"
        assert record.theta_hat == pytest.approx(-np.pi / 2, abs=1e-10)

    def test_fine_circle_not_special_for_zero_phase(self) -> None:
        record = classify(*build_clifford_circle(128), AmbientStructure.standard(1))
        assert record.special_legendrian.status == "fail"
        assert record.theta_special.status == "pass"

    def test_rotated_special(self) -> None:
        mesh, embedding = build_clifford_circle(128)
        record = classify(mesh, embedding, AmbientStructure.standard(1), rotate_special=True)
        h = record.mesh_size
        assert record.special_legendrian.status == "pass"
        assert record.special_legendrian.residual < 10 * h * h

    def test_torus(self, torus) -> None:
        record = classify(*torus, AmbientStructure.standard(2))
        assert record.legendrian.status == "pass"
        assert record.theta_special.status == "pass"
        assert record.phase is not None and record.phase.modulus_defect < 0.5

    def test_fixed_theta(self, circle) -> None:
        record = classify(*circle, AmbientStructure.standard(1), theta=0.3)
        assert record.theta_hat == 0.3
        assert record.theta_special.status != "pass"

    def test_random_loop_fails(self) -> None:
        record = classify(*build_random_loop(256, seed=5), AmbientStructure.standard(1))
        assert record.legendrian.status != "pass"
        assert record.theta_special.status != "pass"

    def test_residuals_converge(self) -> None:
        # 对 Legendre 边精确为零的例子，收敛表在机器零处不给出阶
        meshes = [build_clifford_torus(6, 6)]
        meshes.append(refine(*meshes[0]))
        records = [classify(*m, AmbientStructure.standard(2)) for m in meshes]
        table = convergence_table(
            [r.theta_special.residual for r in records],
            [r.mesh_size for r in records],
            "theta_special",
        )
        assert len(table.rows) == 2
        for row in table.rows[1:]:
            assert row.order is None or row.order > 1.8


@pytest.mark.slow
@pytest.mark.parametrize(
    "source",
    [lambda: build_clifford_circle(256), lambda: build_clifford_torus(64, 64)],
    ids=["circle-256", "torus-64"],
)
def test_desk_scale_classification(source) -> None:
    mesh, embedding = source()
    record = classify(mesh, embedding, AmbientStructure.standard(mesh.dim))
    h = record.mesh_size
    assert record.legendrian.residual < 10 * h * h
    assert record.theta_special.residual < 10 * h * h
