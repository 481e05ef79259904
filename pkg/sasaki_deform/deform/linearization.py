"""
线性化一致性与收敛阶

‖F(exp_{tv}) − F(0) − t·D₁(f, α)‖_M / t² 在 t → 0 时应有界；
减去 F(0) 使底网格的离散残差不进入比值。
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from sasaki_deform.ambient.structure import AmbientStructure
from sasaki_deform.core.config import settings
from sasaki_deform.core.errors import ParameterError
from sasaki_deform.dec.operators import assemble_operators
from sasaki_deform.deform.classify import calibrated
from sasaki_deform.deform.normal import exp_deform, normal_identification, random_normal_field
from sasaki_deform.deform.operators import assemble_operator
from sasaki_deform.deform.pullback import residual_map
from sasaki_deform.mesh.complex import Embedding, SimplicialComplex
from sasaki_deform.mesh.metric import induced_metric
from sasaki_deform.schemas.reports import ConvergenceRow, ConvergenceTable

logger = logging.getLogger(__name__)

DEFAULT_STEPS = (1e-2, 5e-3, 2.5e-3)
MACHINE_ZERO = 1e-13


@dataclass
class LinearizationResult:
    kind: str
    seed: int
    steps: List[float]
    ratios: List[float]

    @property
    def spread(self) -> float:
        """(max − min) / max"""
        top = max(self.ratios)
        return (top - min(self.ratios)) / top if top > 0 else 0.0


def _first_order(
    kind: str,
    mesh: SimplicialComplex,
    embedding: Embedding,
    structure: AmbientStructure,
    seed: int,
    kappa: Optional[float],
    order: int,
    calibrate: bool,
):
    """(结构, 法向场, D₁v, F(0), 输出质量)"""
    if calibrate:
        structure = calibrated(mesh, embedding, structure)
    ops = assemble_operators(mesh, induced_metric(mesh, embedding))
    operator = assemble_operator(kind, ops, structure.kappa if kappa is None else kappa)
    field = random_normal_field(mesh, embedding, seed, transverse=kind == "transverse")
    f, alpha = normal_identification(mesh, embedding, structure, field, order)
    parts = {0: f.values, 1: alpha.values}
    direction = np.concatenate([parts[k] for k in operator.domain])
    derivative = operator.apply(direction)
    if kind == "contact_cy":
        derivative[: ops.size(0)] += structure.kappa * f.values
    base = residual_map(kind, mesh, embedding, structure, ops, order)
    return structure, field, derivative, base, operator.mass_out


def linearization_ratios(
    kind: str,
    mesh: SimplicialComplex,
    embedding: Embedding,
    structure: AmbientStructure,
    seed: int = settings.SEED,
    steps: Sequence[float] = DEFAULT_STEPS,
    kappa: Optional[float] = None,
    order: int = settings.QUADRATURE_ORDER,
    calibrate: bool = True,
) -> LinearizationResult:
    """
    D₁ 是在 ι*ψ 为正实数的结构上推导的，calibrate 时先把相位转到 −θ̂。
    contact_cy 是 κ = 0 的算子；球面结构 κ > 0，比较时在 P 分量上补 κf。

    Raises:
        ParameterError: 步长非正
        StepSizeError: t·max‖v‖ 超出法向半径
        NotNearLegendrianError: 校准相位时 |*ι*ψ| 过小
    """
    if not steps or min(steps) <= 0:
        raise ParameterError("步长必须为正", steps=list(steps))
    structure, field, derivative, base, mass = _first_order(
        kind, mesh, embedding, structure, seed, kappa, order, calibrate
    )

    ratios = []
    for t in steps:
        moved = exp_deform(mesh, embedding, field, t)
        value = residual_map(kind, mesh, moved, structure, order=order)
        remainder = value - base - t * derivative
        ratios.append(float(np.sqrt(max(remainder @ (mass @ remainder), 0.0))) / t**2)
    logger.debug("linearization %s seed %d: ratios %s", kind, seed, ratios)
    return LinearizationResult(kind=kind, seed=seed, steps=list(steps), ratios=ratios)


def first_order_defect(
    kind: str,
    mesh: SimplicialComplex,
    embedding: Embedding,
    structure: AmbientStructure,
    seed: int = settings.SEED,
    step: float = 1e-5,
    kappa: Optional[float] = None,
    order: int = settings.QUADRATURE_ORDER,
    calibrate: bool = True,
) -> float:
    """
    ‖(F(exp tv) − F(exp −tv))/2t − D₁v‖ / ‖D₁v‖

    E、W 分量与 D₁ 逐位一致，只剩差分截断；P 分量带 O(h²) 的离散化差。
    """
    if step <= 0:
        raise ParameterError("步长必须为正", step=step)
    structure, field, derivative, _, mass = _first_order(
        kind, mesh, embedding, structure, seed, kappa, order, calibrate
    )
    plus = residual_map(kind, mesh, exp_deform(mesh, embedding, field, step), structure, order=order)
    minus = residual_map(
        kind, mesh, exp_deform(mesh, embedding, field, -step), structure, order=order
    )
    gap = (plus - minus) / (2 * step) - derivative
    scale = float(np.sqrt(max(derivative @ (mass @ derivative), 0.0)))
    if scale <= MACHINE_ZERO:
        return 0.0
    return float(np.sqrt(max(gap @ (mass @ gap), 0.0))) / scale


def convergence_table(
    values: Sequence[float], sizes: Sequence[float], quantity: str = "residual"
) -> ConvergenceTable:
    """相邻两级的比值与观测阶 log(r)/log(h_{k-1}/h_k)"""
    if len(values) != len(sizes):
        raise ParameterError("values 与 sizes 长度不一致", values=len(values), sizes=len(sizes))
    rows = []
    for level, (value, size) in enumerate(zip(values, sizes)):
        ratio: Optional[float] = None
        order: Optional[float] = None
        if level > 0 and min(values[level - 1], value) > MACHINE_ZERO:
            ratio = values[level - 1] / value
            order = float(np.log(ratio) / np.log(sizes[level - 1] / size))
        rows.append(
            ConvergenceRow(
                level=level, size=float(size), value=float(value), ratio=ratio, order=order
            )
        )
    return ConvergenceTable(quantity=quantity, rows=rows)
