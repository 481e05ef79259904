"""弦单形上的拉回积分与离散映射 F"""

import numpy as np
import pytest

from sasaki_deform.ambient.structure import AmbientStructure
from sasaki_deform.core.errors import DimensionError, ParameterError
from sasaki_deform.deform.pullback import (
    KINDS,
    interval_rule,
    pullback,
    residual_components,
    residual_layout,
    residual_map,
    simplex_rule,
)
from sasaki_deform.mesh.builders import build_round_circle
from sasaki_deform.mesh.refine import refine


@pytest.mark.parametrize("order", [1, 2, 3, 5])
def test_rules_integrate_constants(order: int) -> None:
    _, w1 = interval_rule(order)
    _, w2 = simplex_rule(2, order)
    assert w1.sum() == pytest.approx(1.0)
    assert w2.sum() == pytest.approx(0.5)


def test_simplex_rule_exact_for_quadratics() -> None:
    bary, weights = simplex_rule(2, 3)
    # ∫_T λ₁λ₂ = 1/24
    assert (bary[:, 1] * bary[:, 2]) @ weights == pytest.approx(1.0 / 24.0)


class TestPullback:
    def test_clifford_circle_is_legendrian(self, circle) -> None:
        result = pullback(*circle, AmbientStructure.standard(1), "eta")
        assert result.max_density < 1e-12

    def test_circle_psi_volume(self, circle, circle_structure) -> None:
        # 校准后 ι*ψ 为正实体积形式
        re = pullback(*circle, circle_structure, "psi_re")
        im = pullback(*circle, circle_structure, "psi_im")
        assert im.max_density < 1e-10
        # 弦的径向投影是大圆弧，总长 2π
        assert re.total == pytest.approx(2 * np.pi, rel=1e-6)

    def test_torus_omega_vanishes(self, torus) -> None:
        result = pullback(*torus, AmbientStructure.standard(2), "omega_T")
        assert result.max_density < 1e-3

    def test_latitude_circle_not_legendrian(self) -> None:
        mesh, embedding = build_round_circle(32, np.pi / 4)
        result = pullback(mesh, embedding, AmbientStructure.standard(1), "eta")
        assert result.max_density > 0.1

    def test_omega_on_curve_rejected(self, circle) -> None:
        with pytest.raises(DimensionError):
            pullback(*circle, AmbientStructure.standard(1), "omega_T")

    def test_structure_dimension_mismatch(self, circle) -> None:
        with pytest.raises(DimensionError):
            pullback(*circle, AmbientStructure.standard(2), "eta")

    def test_unknown_form(self, circle) -> None:
        with pytest.raises(ParameterError):
            pullback(*circle, AmbientStructure.standard(1), "theta")
        with pytest.raises(ParameterError):
            pullback(*circle, AmbientStructure.standard(1), "eta", quadrature_order=0)

    def test_latitude_eta_converges(self) -> None:
        # 纬圆 ∫η = 2π sin²φ，顶点取在纬圆上时弦多边形误差 O(h²)
        structure = AmbientStructure.standard(1)
        phi = np.pi / 3
        exact = 2 * np.pi * np.sin(phi) ** 2
        errors = [
            abs(pullback(*build_round_circle(n, phi), structure, "eta").total - exact)
            for n in (16, 32, 64)
        ]
        assert errors[0] / errors[1] > 3.5
        assert errors[1] / errors[2] > 3.5

    def test_midpoint_refinement_keeps_great_arcs(self) -> None:
        # η̃ 径向不变，弦上的积分等于投影大圆弧上的积分；中点细分不改变这些弧
        structure = AmbientStructure.standard(1)
        coarse = build_round_circle(16, np.pi / 3)
        totals = [pullback(*m, structure, "eta", 6).total for m in (coarse, refine(*coarse))]
        assert totals[1] == pytest.approx(totals[0], rel=1e-8)


class TestResidualMap:
    def test_layout_drops_high_degrees(self) -> None:
        assert residual_layout("nx_complex", 1) == [("P", 0)]
        assert residual_layout("contact_cy", 2) == [("P", 0), ("E", 1), ("W", 2)]
        assert residual_layout("minimal_legendrian", 1) == [("dP", 1), ("E", 1)]

    def test_unknown_kind(self) -> None:
        with pytest.raises(ParameterError):
            residual_layout("lagrangian", 2)

    @pytest.mark.parametrize("kind", KINDS)
    def test_lengths_match_layout(self, torus, torus_structure, torus_ops, kind: str) -> None:
        value = residual_map(kind, *torus, torus_structure, torus_ops)
        expected = sum(torus_ops.size(k) for _, k in residual_layout(kind, 2))
        assert value.shape == (expected,)

    def test_w_is_half_d_of_e(self, torus, torus_structure, torus_ops) -> None:
        parts = residual_components(*torus, torus_structure, torus_ops)
        np.testing.assert_allclose(parts["W"], 0.5 * (torus_ops.d[1] @ parts["E"]))
