"""线性化一致性与收敛表"""

import numpy as np
import pytest

from sasaki_deform.ambient.structure import AmbientStructure
from sasaki_deform.core.errors import ParameterError
from sasaki_deform.deform.linearization import (
    convergence_table,
    first_order_defect,
    linearization_ratios,
)
from sasaki_deform.mesh.builders import build_clifford_circle
from sasaki_deform.schemas.run import KINDS

FINE_SEGMENTS = 512


@pytest.fixture(scope="module")
def fine_circle():
    return build_clifford_circle(FINE_SEGMENTS)


@pytest.mark.parametrize("seed", range(5))
def test_ratio_bounded_for_exact_derivative(torus, torus_structure, seed: int) -> None:
    # E 与 W 分量的离散导数就是 D₁，比值只剩 O(1) 的二阶项
    result = linearization_ratios("legendrian_complex", *torus, torus_structure, seed=seed)
    assert len(result.ratios) == 3
    assert all(np.isfinite(result.ratios))
    assert result.spread < 0.3


@pytest.mark.parametrize(
    "kind", ["special_legendrian", "nx_complex", "transverse", "contact_cy", "minimal_legendrian"]
)
def test_ratio_finite_for_other_kinds(torus, torus_structure, kind: str) -> None:
    result = linearization_ratios(kind, *torus, torus_structure, seed=1)
    assert result.kind == kind
    assert len(result.ratios) == 3
    assert all(np.isfinite(r) and r >= 0 for r in result.ratios)


def test_ratio_on_circle(circle, circle_structure) -> None:
    result = linearization_ratios("legendrian_complex", *circle, circle_structure, seed=3)
    assert result.spread < 0.3


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("kind", KINDS)
def test_ratio_bounded_for_every_kind(fine_circle, kind: str, seed: int) -> None:
    # P 分量与 D₁ 差 O(h²)，细网格上这一项在 1/t 放大后仍远小于二阶项
    result = linearization_ratios(kind, *fine_circle, AmbientStructure.standard(1), seed=seed)
    assert all(np.isfinite(result.ratios))
    assert result.spread < 0.3


def test_calibration_applied_before_comparison(circle) -> None:
    rotated = AmbientStructure.standard(1).rotated(0.7)
    result = linearization_ratios("legendrian_complex", *circle, rotated, seed=2)
    assert result.spread < 0.3


def test_exact_components_agree_with_operator(torus, torus_structure) -> None:
    defect = first_order_defect("legendrian_complex", *torus, torus_structure, seed=4)
    assert defect < 1e-6


def test_weight_component_defect_is_second_order() -> None:
    structure = AmbientStructure.standard(1)
    coarse = first_order_defect("nx_complex", *build_clifford_circle(64), structure)
    fine = first_order_defect("nx_complex", *build_clifford_circle(128), structure)
    assert fine < coarse / 3


def test_rejects_non_positive_steps(circle) -> None:
    with pytest.raises(ParameterError):
        linearization_ratios(
            "nx_complex", *circle, AmbientStructure.standard(1), steps=(1e-2, 0.0)
        )


def test_convergence_table_second_order() -> None:
    sizes = [0.4, 0.2, 0.1]
    table = convergence_table([3.0 * h * h for h in sizes], sizes, "demo")
    assert table.quantity == "demo"
    assert table.rows[0].ratio is None and table.rows[0].order is None
    for row in table.rows[1:]:
        assert row.ratio == pytest.approx(4.0)
        assert row.order == pytest.approx(2.0)


def test_convergence_table_skips_machine_zero() -> None:
    table = convergence_table([1e-3, 1e-15], [0.2, 0.1])
    assert table.rows[1].ratio is None
    assert table.rows[1].order is None


def test_convergence_table_length_mismatch() -> None:
    with pytest.raises(ParameterError):
        convergence_table([1.0, 0.5], [0.1])
