"""
离散Hodge分解 ω = dα + δβ + h

<rationale>
- 恰当部分: M_k-正交投影到 Im d_{k-1}，解相容的半正定正规方程
  d_{k-1}ᵀ M_k d_{k-1} a = d_{k-1}ᵀ M_k ω
  小规模用稠密最小二乘，大规模用共轭梯度（从零出发，解落在值域内）
- 调和部分: 投影到 harmonic_basis 张成的空间
- 余恰当部分: 剩余项，三部分之和按构造精确等于输入
</rationale>
"""

import logging
from typing import NamedTuple

import numpy as np
import scipy.linalg as la
from scipy.sparse.linalg import cg

from sasaki_deform.core.config import settings
from sasaki_deform.core.errors import ParameterError, SolverError
from sasaki_deform.dec.operators import Cochain, FormOperators
from sasaki_deform.dec.spectra import harmonic_matrix

logger = logging.getLogger(__name__)

CG_RTOL = 1e-13
ACCEPT_RTOL = 1e-10


class HodgeParts(NamedTuple):
    exact: Cochain
    coexact: Cochain
    harmonic: Cochain


def _exact_potential(ops: FormOperators, k: int, values: np.ndarray) -> np.ndarray:
    d = ops.d[k - 1]
    rhs = d.T @ (ops.star[k] @ values)
    normal = (d.T @ ops.star[k] @ d).tocsr()
    if normal.shape[0] < settings.DENSE_LIMIT:
        solution, *_ = la.lstsq(normal.toarray(), rhs, lapack_driver="gelsy")
        return solution

    scale = float(np.linalg.norm(rhs))
    if scale == 0.0:
        return np.zeros(normal.shape[0])
    maxiter = 10 * normal.shape[0]
    solution, info = cg(normal, rhs, rtol=CG_RTOL, atol=0.0, maxiter=maxiter)
    residual = float(np.linalg.norm(normal @ solution - rhs) / scale)
    if info != 0:
        if residual > ACCEPT_RTOL:
            raise SolverError(
                "Hodge分解中共轭梯度未收敛", iterations=maxiter, residual=residual, degree=k
            )
        logger.debug("cg stalled at relative residual %.2e, accepted", residual)
    return solution


def hodge_decompose(cochain: Cochain, ops: FormOperators) -> HodgeParts:
    """
    ω = 恰当 + 余恰当 + 调和，三部分两两 M_k-正交

    Raises:
        ParameterError: 次数不在 0..n
        SolverError: 迭代求解不收敛
    """
    k = cochain.degree
    if not 0 <= k <= ops.dim:
        raise ParameterError(f"形式次数越界: {k}", degree=k)
    values = np.asarray(cochain.values, dtype=np.float64)
    if values.shape != (ops.size(k),):
        raise ParameterError("余链长度与单形数不符", degree=k, length=int(values.size))

    if k == 0:
        exact = np.zeros_like(values)
    else:
        exact = ops.d[k - 1] @ _exact_potential(ops, k, values)

    basis = harmonic_matrix(ops, k)
    remainder = values - exact
    harmonic = basis @ (basis.T @ (ops.star[k] @ remainder))
    coexact = remainder - harmonic
    logger.debug(
        "hodge_decompose k=%d: |exact|=%.3e |coexact|=%.3e |harmonic|=%.3e",
        k,
        ops.norm(k, exact),
        ops.norm(k, coexact),
        ops.norm(k, harmonic),
    )
    return HodgeParts(Cochain(k, exact), Cochain(k, coexact), Cochain(k, harmonic))
