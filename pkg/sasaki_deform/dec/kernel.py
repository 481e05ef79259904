"""
带质量矩阵加权的核维数

<rationale>
A: (Λ_in, M_in) → (Λ_out, M_out)，弱形式 W = M_out·A。
奇异值取加权意义：σ² 为 (Wᵀ M_out⁻¹ W, M_in) 的广义特征值。
- 稠密路径: Cholesky 因子 L_in, L_out，对 L_out⁻¹ W L_in⁻ᵀ 做SVD
- 迭代路径: 正规算子的移位求逆，通过增广稀疏分解
  [[M_out, W], [Wᵀ, −ε M_in]] 作用 (N + ε M_in)⁻¹，不显式形成 M_out⁻¹
</rationale>

<design-decision>
截断 cut 的两种模式：
- 相对 (absolute=False): cut = tol · σ_max，适用于精确为零的核
- 绝对 (absolute=True): cut = tol，适用于按特征值窗口换算的簇计数
迭代路径中相对容差不低于 1e-4（Lanczos 对小奇异值只有平方精度）。
</design-decision>
"""

import logging
from dataclasses import dataclass
from typing import Any, Optional, Union

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, splu

from sasaki_deform.core.config import settings
from sasaki_deform.core.errors import ParameterError, SolverError
from sasaki_deform.dec.spectra import fixed_start, m_orthonormalize

logger = logging.getLogger(__name__)

ITERATIVE_REL_FLOOR = 1e-4

MatrixLike = Union[sp.spmatrix, np.ndarray, Any]


@dataclass
class KernelResult:
    """
    Attributes:
        dim: 核维数
        basis: (n_in, dim)，M_in-正交归一
        cokernel_dim: n_out − rank
        singular_values: 升序的加权奇异值（迭代路径只含最小的一段）
        cut: 实际使用的截断
    """

    dim: int
    basis: np.ndarray
    cokernel_dim: int
    singular_values: np.ndarray
    cut: float


def _dense(op: MatrixLike) -> np.ndarray:
    if isinstance(op, np.ndarray):
        return op
    return np.asarray(op.toarray())


def _sparse(op: MatrixLike) -> sp.csr_matrix:
    if sp.issparse(op):
        return op.tocsr()
    logger.warning("iterative kernel path densifies a %s operator", type(op).__name__)
    return sp.csr_matrix(_dense(op))


def _kernel_dense(
    weak: np.ndarray, m_in: sp.spmatrix, m_out: sp.spmatrix, tol: float, absolute: bool
) -> KernelResult:
    n_out, n_in = weak.shape
    l_in = la.cholesky(m_in.toarray(), lower=True)
    l_out = la.cholesky(m_out.toarray(), lower=True)
    scaled = la.solve_triangular(l_out, weak, lower=True)
    scaled = la.solve_triangular(l_in, scaled.T, lower=True).T
    _, sigma, vh = la.svd(scaled, full_matrices=True, lapack_driver="gesvd")
    top = float(sigma.max()) if sigma.size else 0.0
    cut = tol if absolute else tol * max(top, np.finfo(float).tiny)
    rank = int(np.count_nonzero(sigma >= cut))
    null_rows = vh[rank:, :].T
    basis = la.solve_triangular(l_in.T, null_rows, lower=False)
    padded = np.concatenate([np.zeros(max(n_in - sigma.size, 0)), np.sort(sigma)])
    return KernelResult(
        dim=n_in - rank,
        basis=basis,
        cokernel_dim=n_out - rank,
        singular_values=padded,
        cut=cut,
    )


def _eigsh(operator: Any, **kwargs: Any) -> Any:
    try:
        return eigsh(operator, maxiter=settings.EIGSH_MAXITER, **kwargs)
    except ArpackNoConvergence as exc:
        raise SolverError(
            "ARPACK在核计算中未收敛",
            iterations=settings.EIGSH_MAXITER,
            converged=len(exc.eigenvalues),
        ) from exc


def _kernel_iterative(
    weak: sp.csr_matrix,
    m_in: sp.spmatrix,
    m_out: sp.spmatrix,
    tol: float,
    absolute: bool,
    expected: Optional[int],
) -> KernelResult:
    n_out, n_in = weak.shape
    lu_out = splu(m_out.tocsc())
    lu_in = splu(m_in.tocsc())
    normal = LinearOperator(
        (n_in, n_in), matvec=lambda x: weak.T @ lu_out.solve(weak @ x), dtype=np.float64
    )
    m_inv = LinearOperator((n_in, n_in), matvec=lu_in.solve, dtype=np.float64)
    top_eig = _eigsh(normal, k=1, M=m_in, Minv=m_inv, which="LA", v0=fixed_start(n_in))[0]
    mu_max = float(top_eig[0])
    if absolute:
        cut = tol
    else:
        rel = max(tol, ITERATIVE_REL_FLOOR)
        if rel > tol:
            logger.debug("iterative kernel: relative tol raised from %g to %g", tol, rel)
        cut = rel * np.sqrt(max(mu_max, 0.0))

    shift = 1e-10 * max(mu_max, 1.0)
    augmented = sp.bmat([[m_out, weak], [weak.T, -shift * m_in]]).tocsc()
    lu_aug = splu(augmented)

    def apply_inverse(b: np.ndarray) -> np.ndarray:
        rhs = np.concatenate([np.zeros(n_out), -np.ravel(b)])
        return lu_aug.solve(rhs)[n_out:]

    op_inv = LinearOperator((n_in, n_in), matvec=apply_inverse, dtype=np.float64)
    count = min((expected or 6) + 4, n_in - 1)
    while True:
        values, vectors = _eigsh(
            normal, k=count, M=m_in, sigma=-shift, which="LM", OPinv=op_inv, v0=fixed_start(n_in)
        )
        order = np.argsort(values)
        values, vectors = values[order], vectors[:, order]
        sigma = np.sqrt(np.clip(values, 0.0, None))
        if sigma.max() >= cut:
            break
        if count >= n_in - 1:
            raise SolverError("核维数超出迭代求解能力", iterations=count, size=n_in)
        count = min(2 * count, n_in - 1)
        logger.debug("kernel search widened to %d pairs", count)
    keep = sigma < cut
    dim = int(np.count_nonzero(keep))
    basis = m_orthonormalize(vectors[:, keep], m_in)
    return KernelResult(
        dim=dim,
        basis=basis,
        cokernel_dim=n_out - n_in + dim,
        singular_values=sigma,
        cut=float(cut),
    )


def kernel_dim(
    op: MatrixLike,
    m_in: sp.spmatrix,
    m_out: sp.spmatrix,
    tol: float = settings.KERNEL_TOL,
    *,
    absolute: bool = False,
    weak: bool = False,
    expected: Optional[int] = None,
) -> KernelResult:
    """
    加权奇异值小于截断的方向数与核基

    Args:
        op: 强形式 A（weak=False）或弱形式 W = M_out·A（weak=True）
        m_in / m_out: 定义域与值域的质量矩阵
        tol: 相对或绝对截断
        expected: 迭代路径的初始请求个数提示

    Raises:
        ParameterError: tol ≤ 0 或形状不匹配
    """
    if tol <= 0:
        raise ParameterError(f"tol 必须为正: {tol}", tol=tol)
    n_out, n_in = op.shape
    if m_in.shape != (n_in, n_in) or m_out.shape != (n_out, n_out):
        raise ParameterError(
            "质量矩阵与算子形状不匹配", shape=list(op.shape), m_in=m_in.shape[0], m_out=m_out.shape[0]
        )
    dense = n_in <= settings.DENSE_LIMIT and n_out <= 2 * settings.DENSE_LIMIT
    if dense:
        matrix = _dense(op)
        if not weak:
            matrix = m_out @ matrix
        result = _kernel_dense(np.asarray(matrix), m_in, m_out, tol, absolute)
    else:
        matrix = _sparse(op)
        if not weak:
            matrix = (m_out @ matrix).tocsr()
        result = _kernel_iterative(matrix, m_in, m_out, tol, absolute, expected)
    logger.debug(
        "kernel_dim: %s path, shape %dx%d, dim=%d cut=%.3e",
        "dense" if dense else "iterative",
        n_out,
        n_in,
        result.dim,
        result.cut,
    )
    return result
