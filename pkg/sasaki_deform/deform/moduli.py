"""
模空间切空间：Ker D₁ 的维数、基与预测刻画的比较

<rationale>
预测维数（与 D₁ 在同一组离散空间上计算）：
- special_legendrian: Δ₀ 在 2κ 附近的特征值簇（κ < 0 时为 0）
- transverse: 调和 1-形式个数
- nx_complex: κ ≠ 0 为闭 1-余链维数 N₁ − rank d₁；κ = 0 为 V + b₁
- legendrian_complex: 图 {(f, −½df)}，维数 V
- contact_cy: 没有 κ 平移，核是常数 f，维数 b₀
- minimal_legendrian: 簇 + 常数
</rationale>

<design-decision>
截断怎么取？
- 精确核（复形类、contact_cy）: 相对截断 KERNEL_TOL
- 按特征值簇计数的种类: 把窗口边界 λ_b 换算成 D₁ 在 (f, −½df) 型模式上的
  加权奇异值，作为绝对截断，使核计数与簇计数在同一窗口下比较
</design-decision>
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import scipy.linalg as la
from scipy.sparse.linalg import LinearOperator, cg

from sasaki_deform.ambient.structure import AmbientStructure
from sasaki_deform.core.config import settings
from sasaki_deform.core.errors import SolverError
from sasaki_deform.dec.kernel import KernelResult, kernel_dim
from sasaki_deform.dec.operators import FormOperators, assemble_operators
from sasaki_deform.dec.spectra import EigenCluster, eigen_cluster, harmonic_basis
from sasaki_deform.deform.operators import BlockOperator, assemble_operator
from sasaki_deform.deform.pullback import residual_map
from sasaki_deform.mesh.complex import Embedding, SimplicialComplex
from sasaki_deform.mesh.metric import induced_metric
from sasaki_deform.schemas.reports import ClusterSummary, ModuliReport

logger = logging.getLogger(__name__)

EXACT_KINDS = ("nx_complex", "legendrian_complex", "transverse", "contact_cy")
REEB_TOL = 1e-8
SINGULAR_VALUES_REPORTED = 8


@dataclass
class ModuliTangent:
    report: ModuliReport
    kernel: KernelResult
    operator: BlockOperator
    clusters: List[EigenCluster] = field(default_factory=list)

    @property
    def basis(self) -> np.ndarray:
        return self.kernel.basis


def special_tolerance(kappa: float, window: float) -> float:
    return window * max(2.0 * abs(kappa), 1.0) / (abs(kappa) + 2.0)


def minimal_tolerance(kappa: float, window: float) -> float:
    """窗口边界 λ_b 上 (f, −½df) 模式的加权奇异值 |κ − λ_b/2|·√λ_b / √(1 + λ_b/4)，不超过窗口"""
    if kappa <= 0:
        return window
    edge = 2.0 * kappa + window * max(2.0 * kappa, 1.0)
    sigma = abs(0.5 * edge - kappa) * np.sqrt(edge) / np.sqrt(1.0 + 0.25 * edge)
    return float(min(sigma, window))


def kernel_tolerance(kind: str, kappa: float, window: float) -> Dict[str, float]:
    """{"tol": 截断, "absolute": 0/1}"""
    if kind in EXACT_KINDS:
        return {"tol": settings.KERNEL_TOL, "absolute": 0.0}
    if kind == "minimal_legendrian":
        return {"tol": minimal_tolerance(kappa, window), "absolute": 1.0}
    return {"tol": special_tolerance(kappa, window), "absolute": 1.0}


def _cluster(ops: FormOperators, kappa: float, window: float) -> Optional[EigenCluster]:
    if kappa < 0:
        return None
    return eigen_cluster(ops, 0, 2.0 * kappa, window)


def _rank_d1(ops: FormOperators) -> int:
    if ops.dim < 2:
        return 0
    return ops.size(2) - ops.mesh.betti_numbers()[2]


def predicted_dim(
    kind: str, ops: FormOperators, kappa: float, cluster: Optional[EigenCluster]
) -> int:
    count = len(cluster) if cluster is not None else 0
    if kind == "special_legendrian":
        return count
    if kind == "transverse":
        return len(harmonic_basis(ops, 1))
    if kind == "nx_complex":
        if kappa != 0:
            return ops.size(1) - _rank_d1(ops)
        return ops.size(0) + ops.mesh.betti_numbers()[1]
    if kind == "legendrian_complex":
        return ops.size(0)
    if kind == "contact_cy":
        return ops.mesh.betti_numbers()[0]
    return count + 1 if kappa > 0 else 1


def reeb_in_kernel(operator: BlockOperator) -> bool:
    """(f, α) = (1, 0) 是否在 Ker D₁ 中"""
    if operator.domain[0] != 0:
        return False
    x = np.zeros(operator.n_in)
    x[: operator.ops.size(0)] = 1.0
    image = operator.apply(x)
    size = float(np.sqrt(x @ (operator.mass_in @ x)))
    norm = float(np.sqrt(max(image @ (operator.mass_out @ image), 0.0)))
    return norm <= REEB_TOL * max(1.0, abs(operator.kappa)) * size


def p2_kernel_dim(operator: BlockOperator, tol: float = settings.KERNEL_TOL) -> Optional[int]:
    """稠密规模下 (P₂, M_out) 的零特征值个数"""
    if operator.n_out > settings.DENSE_LIMIT:
        return None
    values = la.eigh(operator.p2(), operator.mass_out.toarray(), eigvals_only=True)
    top = max(float(np.max(np.abs(values))), np.finfo(float).tiny) if values.size else 1.0
    return int(np.count_nonzero(np.abs(values) < tol * top))


def moduli_tangent(
    kind: str,
    ops: FormOperators,
    kappa: float,
    window: float = settings.CLUSTER_WINDOW,
) -> ModuliTangent:
    """
    Ker D₁ 及其与预测刻画的比较

    Raises:
        ParameterError: 未知 kind
        SolverError: 迭代核计算失败
    """
    operator = assemble_operator(kind, ops, kappa)
    clusters: List[EigenCluster] = []
    cluster = None
    if kind in ("special_legendrian", "minimal_legendrian"):
        cluster = _cluster(ops, kappa, window)
        if cluster is not None:
            clusters.append(cluster)
    predicted = predicted_dim(kind, ops, kappa, cluster)
    tolerance = kernel_tolerance(kind, kappa, window)

    kernel = kernel_dim(
        operator.weak1(),
        operator.mass_in,
        operator.mass_out,
        tolerance["tol"],
        absolute=bool(tolerance["absolute"]),
        weak=True,
        expected=predicted,
    )

    extra = None
    if kind == "minimal_legendrian":
        extra = kernel.dim - (len(cluster) if cluster is not None and kappa > 0 else 0)
    report = ModuliReport(
        kind=kind,
        kappa=float(kappa),
        kernel_dim=kernel.dim,
        predicted_dim=predicted,
        match=kernel.dim == predicted,
        cokernel_dim=kernel.cokernel_dim,
        clusters=[
            ClusterSummary(
                degree=c.degree,
                target=c.target,
                window=c.radius,
                values=[float(v) for v in c.values],
                ambiguous=c.ambiguous,
            )
            for c in clusters
        ],
        tolerances={"cut": float(kernel.cut), "window": float(window), **tolerance},
        reeb_in_kernel=reeb_in_kernel(operator),
        p2_kernel_dim=p2_kernel_dim(operator),
        trivial_extra_dim=extra,
        smallest_singular_values=[
            float(s) for s in kernel.singular_values[:SINGULAR_VALUES_REPORTED]
        ],
        ambiguous=any(c.ambiguous for c in clusters),
    )
    if not report.match:
        logger.warning(
            "%s κ=%g: kernel dim %d differs from predicted %d",
            kind,
            kappa,
            report.kernel_dim,
            report.predicted_dim,
        )
    logger.info("moduli %s κ=%g: dim %d (predicted %d)", kind, kappa, kernel.dim, predicted)
    return ModuliTangent(report=report, kernel=kernel, operator=operator, clusters=clusters)


def least_squares_residual(operator: BlockOperator, target: np.ndarray) -> np.ndarray:
    """F − D₁x*，x* 使 ‖F − D₁x‖_M 最小"""
    if operator.n_in <= settings.DENSE_LIMIT:
        l_out = la.cholesky(operator.mass_out.toarray(), lower=True)
        strong = operator.strong1()
        solution = la.lstsq(l_out.T @ strong, l_out.T @ target, lapack_driver="gelsy")[0]
        return target - strong @ solution

    size = operator.n_in
    normal = LinearOperator(
        (size, size),
        matvec=lambda x: operator.weak_apply1_t(
            operator.solve_mass(operator.codomain, operator.weak_apply1(x))
        ),
        dtype=np.float64,
    )
    rhs = operator.weak_apply1_t(operator.mass_out @ target)
    solution, info = cg(normal, rhs, rtol=1e-12, atol=0.0, maxiter=10 * size)
    if info > 0:
        raise SolverError("最小二乘的正规方程未收敛", iterations=int(info))
    return target - operator.apply(solution)


def image_defect(
    kind: str,
    mesh: SimplicialComplex,
    embedding: Embedding,
    structure: AmbientStructure,
    kappa: Optional[float] = None,
    order: int = settings.QUADRATURE_ORDER,
) -> float:
    """‖F − D₁x*‖_M / ‖F‖_M：F 在 Ker D₁* 上投影的相对大小"""
    ops = assemble_operators(mesh, induced_metric(mesh, embedding))
    operator = assemble_operator(kind, ops, structure.kappa if kappa is None else kappa)
    value = residual_map(kind, mesh, embedding, structure, ops, order)
    norm = float(np.sqrt(value @ (operator.mass_out @ value)))
    if norm == 0.0:
        return 0.0
    residual = least_squares_residual(operator, value)
    return float(np.sqrt(max(residual @ (operator.mass_out @ residual), 0.0))) / norm
