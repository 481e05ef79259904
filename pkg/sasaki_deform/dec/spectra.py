"""
广义特征问题 (Δ_k, M_k)：特征值簇与调和基

<rationale>
求解策略：
- 未知量 < DENSE_LIMIT: scipy.linalg.eigh 稠密求解，结果确定
- 否则: eigsh 移位求逆，固定初始向量 v0（由 SEED 生成），逐步加倍请求个数直到窗口被覆盖
- k ≥ 1 的大网格使用混合形式 [[−M_{k-1}, d_{k-1}ᵀM_k],[M_k d_{k-1}, d_kᵀM_{k+1}d_k]]，
  质量矩阵 blockdiag(0, M_k)，避免显式 M_{k-1}⁻¹
- 调和形式 = Ker d_k ∩ Ker d_{k-1}ᵀM_k，检测时 grad-div 部分用对角逆，核不变
</rationale>

<design-decision>
为什么移位点略偏离目标 λ*？
- λ* 本身常是精确特征值（λ*=0 时的常函数），K − λ*M 的LU会奇异
- 偏移 0.1·窗口半径 后仍按到移位点的距离判断覆盖
</design-decision>
"""

import logging
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh
from scipy.sparse.linalg import norm as sparse_norm

from sasaki_deform.core.config import settings
from sasaki_deform.core.errors import ParameterError, SolverError
from sasaki_deform.dec.operators import Cochain, FormOperators

logger = logging.getLogger(__name__)

AMBIGUITY_BAND = 0.1


@dataclass
class EigenCluster:
    """窗口 |λ − λ*| ≤ δ·max(λ*,1) 内的特征对（特征向量按列，M_k-正交归一）"""

    degree: int
    target: float
    radius: float
    values: np.ndarray
    vectors: np.ndarray
    nearby: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ambiguous: bool = False

    def __len__(self) -> int:
        return int(self.values.size)

    def __iter__(self) -> Iterator[Tuple[float, np.ndarray]]:
        for idx, value in enumerate(self.values):
            yield float(value), self.vectors[:, idx]


def fixed_start(size: int, seed: Optional[int] = None) -> np.ndarray:
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    start = rng.standard_normal(size)
    return start / np.linalg.norm(start)


def m_orthonormalize(vectors: np.ndarray, mass: sp.spmatrix) -> np.ndarray:
    if vectors.shape[1] == 0:
        return vectors
    gram = vectors.T @ (mass @ vectors)
    gram = 0.5 * (gram + gram.T)
    chol = la.cholesky(gram, lower=True)
    return la.solve_triangular(chol, vectors.T, lower=True).T


def _weak_pencil(ops: FormOperators, k: int) -> Tuple[np.ndarray, np.ndarray]:
    return ops.laplacian_weak_dense(k), ops.star[k].toarray()


def _sparse_pencil(ops: FormOperators, k: int) -> Tuple[sp.csr_matrix, sp.csr_matrix, int]:
    """返回 (A, B, 前导辅助变量个数)"""
    if k == 0:
        return ops.stiffness0, ops.star[0], 0
    lower = ops.star[k - 1]
    coupling = (ops.star[k] @ ops.d[k - 1]).tocsr()
    a = sp.bmat([[-lower, coupling.T], [coupling, ops.curl_part(k)]]).tocsc()
    b = sp.block_diag([sp.csr_matrix(lower.shape), ops.star[k]]).tocsc()
    return a, b, lower.shape[0]


def _shift_invert(
    a: sp.spmatrix,
    b: sp.spmatrix,
    sigma: float,
    count: int,
    size: int,
) -> Tuple[np.ndarray, np.ndarray]:
    try:
        values, vectors = eigsh(
            a,
            k=count,
            M=b,
            sigma=sigma,
            which="LM",
            v0=fixed_start(size),
            maxiter=settings.EIGSH_MAXITER,
        )
    except ArpackNoConvergence as exc:
        raise SolverError(
            "ARPACK移位求逆未收敛",
            iterations=settings.EIGSH_MAXITER,
            converged=len(exc.eigenvalues),
        ) from exc
    order = np.argsort(values)
    return values[order], vectors[:, order]


def spectrum_near(
    ops: FormOperators, k: int, center: float, reach: float
) -> Tuple[np.ndarray, np.ndarray]:
    """(Δ_k, M_k) 在 [center − reach, center + reach] 内的全部特征对

    Δ_k 半正定，负的舍入误差截到 0 后再按窗口筛选。

    Raises:
        ParameterError: k 超出网格维数
    """
    if not 0 <= k <= ops.dim:
        raise ParameterError(f"形式次数越界: {k}", degree=k, dim=ops.dim)
    n = ops.size(k)
    if n < settings.DENSE_LIMIT:
        stiff, mass = _weak_pencil(ops, k)
        values, vectors = la.eigh(stiff, mass)
        values = np.clip(values, 0.0, None)
        keep = np.abs(values - center) <= reach
        return values[keep], vectors[:, keep]

    a, b, offset = _sparse_pencil(ops, k)
    sigma = center - 0.1 * reach
    count = min(12, n - 1)
    while True:
        values, vectors = _shift_invert(a, b, sigma, count, a.shape[0])
        finite = np.isfinite(values)
        values, vectors = values[finite], vectors[offset:, finite]
        values = np.clip(values, 0.0, None)
        if values.size and np.max(np.abs(values - sigma)) > reach + abs(center - sigma):
            break
        if count >= n - 1:
            raise SolverError("移位求逆无法覆盖特征值窗口", iterations=count, degree=k)
        count = min(2 * count, n - 1)
        logger.debug("eigen window not covered, requesting %d pairs", count)
    keep = np.abs(values - center) <= reach
    vectors = m_orthonormalize(vectors[:, keep], ops.star[k])
    return values[keep], vectors


def eigen_cluster(
    ops: FormOperators,
    degree: int,
    target: float,
    window: float = settings.CLUSTER_WINDOW,
) -> EigenCluster:
    """
    特征值簇：|λ − λ*| ≤ δ·max(λ*, 1)

    Raises:
        ParameterError: λ* < 0 或 δ ∉ (0,1)
        SolverError: 迭代求解失败
    """
    if target < 0:
        raise ParameterError(f"目标特征值必须非负: {target}", target=target)
    if not 0.0 < window < 1.0:
        raise ParameterError(f"窗口必须在 (0,1) 内: {window}", window=window)
    if not 0 <= degree <= ops.dim:
        raise ParameterError(f"形式次数越界: {degree}", degree=degree)
    radius = window * max(target, 1.0)
    values, vectors = spectrum_near(ops, degree, target, radius * (1.0 + AMBIGUITY_BAND))
    distance = np.abs(values - target)
    inside = distance <= radius
    band = np.abs(distance - radius) <= AMBIGUITY_BAND * radius
    cluster = EigenCluster(
        degree=degree,
        target=target,
        radius=radius,
        values=values[inside],
        vectors=vectors[:, inside],
        nearby=values,
        ambiguous=bool(band.any()),
    )
    if cluster.ambiguous:
        logger.warning("eigen cluster near λ*=%g has values within 10%% of the window edge", target)
    logger.debug("eigen cluster λ*=%g: %d pairs %s", target, len(cluster), cluster.values)
    return cluster


def harmonic_basis(
    ops: FormOperators, degree: int, tol: float = settings.HARMONIC_TOL
) -> List[Cochain]:
    """M_k-正交归一的调和 k-形式基"""
    if tol <= 0:
        raise ParameterError(f"tol 必须为正: {tol}", tol=tol)
    stiff = ops.lumped_laplacian_weak(degree)
    mass = ops.star[degree]
    scale = max(1.0, float(sparse_norm(stiff, 1) / sparse_norm(mass, 1)))
    threshold = tol * scale
    n = mass.shape[0]

    if n < settings.DENSE_LIMIT:
        values, vectors = la.eigh(stiff.toarray(), mass.toarray())
        keep = values < threshold
        basis = vectors[:, keep]
    else:
        expected = ops.mesh.betti_numbers()[degree]
        count = min(expected + 4, n - 1)
        shift = -0.01 * scale
        while True:
            values, vectors = _shift_invert(stiff.tocsc(), mass.tocsc(), shift, count, n)
            if values.max() >= threshold or count >= n - 1:
                break
            count = min(2 * count, n - 1)
        basis = m_orthonormalize(vectors[:, values < threshold], mass)
    logger.debug("harmonic %d-forms: %d", degree, basis.shape[1])
    return [Cochain(degree, basis[:, i]) for i in range(basis.shape[1])]


def harmonic_matrix(
    ops: FormOperators, degree: int, tol: float = settings.HARMONIC_TOL
) -> np.ndarray:
    basis = harmonic_basis(ops, degree, tol)
    if not basis:
        return np.zeros((ops.size(degree), 0))
    return np.stack([c.values for c in basis], axis=1)
