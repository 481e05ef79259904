"""
Newton–Green 修正：v ← v − D₁*·G·F(v)

<rationale>
每步在当前嵌入上重新组装：
1. F = residual_map(kind)，残差 ‖F‖_M / sqrt(Vol)
2. 解 P₂ y = F（弱形式 P₂w y = M_out F，在 (Ker P₂)^⊥ 上取伪逆）
3. δ(f, α) = −D₁* y = −M_in⁻¹ W₁ᵀ y，于是 D₁δ = −F
4. 识别逆映射得到法向量场，exp_deform 走一步
</rationale>

<design-decision>
G 的两种实现：
- 值域维数 ≤ DENSE_LIMIT: eigh 稠密伪逆，截断 KERNEL_TOL·λ_max
- 否则: MINRES（P₂ 对称半正定，右端近似在值域内）
结构相位只在开始时校准一次，迭代中不再旋转。
</design-decision>

<warning>
残差连续两次增大、或步长超出法向半径，都按发散处理并带上残差日志。
</warning>
"""

import logging
from typing import Optional, Tuple

import numpy as np
import scipy.linalg as la
from scipy.sparse.linalg import LinearOperator, minres

from sasaki_deform.ambient.structure import AmbientStructure
from sasaki_deform.core.config import settings
from sasaki_deform.core.errors import (
    DivergenceError,
    FrameError,
    ParameterError,
    SolverError,
    StepSizeError,
)
from sasaki_deform.dec.operators import assemble_operators
from sasaki_deform.deform.classify import calibrated
from sasaki_deform.deform.normal import exp_deform, identification_inverse
from sasaki_deform.deform.operators import BlockOperator, assemble_operator
from sasaki_deform.deform.pullback import residual_map
from sasaki_deform.mesh.complex import Embedding, SimplicialComplex, check_compatible
from sasaki_deform.mesh.metric import induced_metric
from sasaki_deform.schemas.run import KINDS, NewtonLog

logger = logging.getLogger(__name__)


def green_solve(operator: BlockOperator, value: np.ndarray) -> np.ndarray:
    """P₂ y = value 的最小范数解（value 为强形式）"""
    rhs = operator.mass_out @ value
    if operator.n_out <= settings.DENSE_LIMIT:
        eigvals, eigvecs = la.eigh(operator.p2())
        top = max(float(np.max(np.abs(eigvals))), np.finfo(float).tiny)
        keep = np.abs(eigvals) > settings.KERNEL_TOL * top
        coeff = (eigvecs[:, keep].T @ rhs) / eigvals[keep]
        return eigvecs[:, keep] @ coeff
    size = operator.n_out
    p2 = LinearOperator((size, size), matvec=operator.apply_p2_weak, dtype=np.float64)
    solution, info = minres(p2, rhs, rtol=1e-12, maxiter=10 * size)
    if info > 0:
        raise SolverError("Green 算子的 MINRES 求解未收敛", iterations=int(info))
    return solution


def residual_norm(operator: BlockOperator, value: np.ndarray, volume: float) -> float:
    return float(np.sqrt(max(value @ (operator.mass_out @ value), 0.0) / volume))


def newton_green_correct(
    mesh: SimplicialComplex,
    embedding: Embedding,
    structure: AmbientStructure,
    kind: str = "nx_complex",
    max_iter: Optional[int] = None,
    tol: Optional[float] = None,
    order: int = settings.QUADRATURE_ORDER,
    calibrate: bool = True,
) -> Tuple[Embedding, NewtonLog]:
    """
    把近似解修正到 F = 0

    Returns:
        (收敛的嵌入或残差最小的迭代, 日志)

    Raises:
        DivergenceError: 初始残差超出 NEWTON_START_BOUND、连续两次增大或步长越界
        ParameterError: 未知算子种类
        NotNearLegendrianError: 校准相位时 |*ι*ψ| 过小
    """
    check_compatible(mesh, embedding)
    if kind not in KINDS:
        raise ParameterError(f"未知算子种类: {kind}", kind=kind, known=list(KINDS))
    max_iter = settings.NEWTON_MAX_ITER if max_iter is None else max_iter
    tol = settings.NEWTON_TOL if tol is None else tol
    if calibrate:
        structure = calibrated(mesh, embedding, structure)
    log = NewtonLog(kind=kind, theta=structure.theta)

    current = embedding
    best, best_residual = embedding, np.inf
    increases = 0
    for iteration in range(max_iter + 1):
        metric = induced_metric(mesh, current)
        ops = assemble_operators(mesh, metric)
        operator = assemble_operator(kind, ops, structure.kappa)
        value = residual_map(kind, mesh, current, structure, ops, order)
        residual = residual_norm(operator, value, metric.total_volume)
        log.residuals.append(residual)
        logger.debug("newton %s iteration %d: residual %.3e", kind, iteration, residual)

        if iteration == 0 and residual > settings.NEWTON_START_BOUND:
            raise DivergenceError(
                f"初始残差 {residual:.3e} 超出 Newton 收敛域 {settings.NEWTON_START_BOUND}",
                log=log.residuals,
            )
        if len(log.residuals) >= 2 and residual > log.residuals[-2]:
            increases += 1
            if increases >= 2:
                raise DivergenceError("Newton 残差连续两次增大", log=log.residuals)
        else:
            increases = 0
        if residual < best_residual:
            best, best_residual = current, residual
        if residual <= tol:
            log.converged = True
            break
        if iteration == max_iter:
            break

        correction = -operator.solve_mass(
            operator.domain, operator.weak_apply1_t(green_solve(operator, value))
        )
        parts = operator.split(correction, operator.domain)
        f = parts[0] if operator.domain[0] == 0 else np.zeros(mesh.n_vertices)
        alpha = parts[-1]
        try:
            field = identification_inverse(mesh, current, structure, f, alpha, order=order)
            current = exp_deform(mesh, current, field, 1.0)
        except (StepSizeError, FrameError) as exc:
            raise DivergenceError(
                f"Newton 步离开法向邻域: {exc.message}", log=log.residuals, cause=exc.to_dict()
            ) from exc

    if log.converged:
        logger.info(
            "newton %s converged in %d iterations (residual %.3e)",
            kind,
            log.iterations,
            log.final_residual,
        )
        return current, log
    logger.warning(
        "newton %s stopped after %d iterations at residual %.3e; returning best iterate",
        kind,
        log.iterations,
        best_residual,
    )
    return best, log
