"""
离散外微分与Whitney形式Hodge星

<rationale>
算子设计：
- d[k] = ∂_{k+1}ᵀ：带符号整数关联矩阵（以float存储，数值上精确）
- star[k]: Whitney形式Galerkin质量矩阵，仅由顶单形组装
  * M_0 = vol/((n+1)(n+2))·(1+δ_ij)
  * M_n = diag(1/vol)
  * n=2 时 M_1 由 λ_i dλ_j − λ_j dλ_i 的积分给出
- 余微分 δ_k = M_{k-1}⁻¹ d_{k-1}ᵀ M_k 通过缓存的稀疏LU作用，从不显式求逆
</rationale>

<design-decision>
为什么不用圆心对偶的对角星？
- 球面投影网格不一定是Delaunay，钝角三角形上对角星会失去正定性
- Galerkin质量矩阵在任何非退化网格上都对称正定
</design-decision>

Dependencies:
    - scipy.sparse: 稀疏组装
    - scipy.sparse.linalg.splu: 质量矩阵分解
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from sasaki_deform.core.errors import AssemblyError, ParameterError
from sasaki_deform.mesh.complex import SimplicialComplex
from sasaki_deform.mesh.metric import MetricData

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Cochain:
    """每个有向 k-单形一个值"""

    degree: int
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values))


def _barycentric_gram(gram: np.ndarray) -> np.ndarray:
    """⟨dλ_i, dλ_j⟩，形状 (F, n+1, n+1)"""
    n = gram.shape[1]
    basis = np.vstack([-np.ones((1, n)), np.eye(n)])
    inverse = np.linalg.inv(gram)
    return np.einsum("ia,fab,jb->fij", basis, inverse, basis)


def _assemble(
    rows: List[np.ndarray], cols: List[np.ndarray], vals: List[np.ndarray], size: int
) -> sp.csr_matrix:
    return sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
    ).tocsr()


def vertex_mass(mesh: SimplicialComplex, metric: MetricData) -> sp.csr_matrix:
    n = mesh.dim
    tri = mesh.top
    factor = metric.volumes / ((n + 1) * (n + 2))
    rows, cols, vals = [], [], []
    for i in range(n + 1):
        for j in range(n + 1):
            rows.append(tri[:, i])
            cols.append(tri[:, j])
            vals.append(factor * (2.0 if i == j else 1.0))
    return _assemble(rows, cols, vals, mesh.n_vertices)


def top_mass(mesh: SimplicialComplex, metric: MetricData) -> sp.csr_matrix:
    return sp.diags(1.0 / metric.volumes).tocsr()


def edge_mass(mesh: SimplicialComplex, metric: MetricData) -> sp.csr_matrix:
    """n=2 的Whitney 1-形式质量矩阵"""
    tri = mesh.top
    grad = _barycentric_gram(metric.gram)
    local_pairs = [(0, 1), (1, 2), (0, 2)]
    edge_ids = np.empty((len(tri), 3), dtype=np.int64)
    heads = np.empty((len(tri), 3), dtype=np.int64)
    tails = np.empty((len(tri), 3), dtype=np.int64)
    edges = mesh.edges
    for t, simplex in enumerate(tri):
        for slot, (p, q) in enumerate(local_pairs):
            e = mesh.index_of(1, (simplex[p], simplex[q]))
            edge_ids[t, slot] = e
            if edges[e, 0] == simplex[p]:
                heads[t, slot], tails[t, slot] = p, q
            else:
                heads[t, slot], tails[t, slot] = q, p

    vol = metric.volumes
    f_idx = np.arange(len(tri))

    def moment(i: np.ndarray, j: np.ndarray) -> np.ndarray:
        return vol * (1.0 + (i == j)) / 12.0

    def g(i: np.ndarray, j: np.ndarray) -> np.ndarray:
        return grad[f_idx, i, j]

    rows, cols, vals = [], [], []
    for s in range(3):
        a, b = heads[:, s], tails[:, s]
        for u in range(3):
            c, d = heads[:, u], tails[:, u]
            entry = (
                moment(a, c) * g(b, d)
                - moment(a, d) * g(b, c)
                - moment(b, c) * g(a, d)
                + moment(b, d) * g(a, c)
            )
            rows.append(edge_ids[:, s])
            cols.append(edge_ids[:, u])
            vals.append(entry)
    return _assemble(rows, cols, vals, mesh.count(1))


class FormOperators:
    """
    组装后的外微分、质量矩阵与余微分

    组装后不可变；质量矩阵的LU分解按需缓存。
    """

    def __init__(self, mesh: SimplicialComplex, metric: MetricData) -> None:
        if metric.gram.shape[0] != mesh.count(mesh.dim) or metric.dim != mesh.dim:
            raise ParameterError("度量与网格不匹配", simplices=int(metric.gram.shape[0]))
        self.mesh = mesh
        self.metric = metric
        self.dim = mesh.dim
        self.d: List[sp.csr_matrix] = [
            mesh.coboundary(k).astype(np.float64) for k in range(self.dim)
        ]
        stars = [vertex_mass(mesh, metric)]
        if self.dim == 2:
            stars.append(edge_mass(mesh, metric))
        stars.append(top_mass(mesh, metric))
        self.star: List[sp.csr_matrix] = stars
        self._lu: Dict[int, object] = {}
        for k, mass in enumerate(self.star):
            diagonal = mass.diagonal()
            if not np.all(diagonal > 0):
                bad = int(np.flatnonzero(~(diagonal > 0))[0])
                raise AssemblyError(f"{k}-形式质量矩阵在第 {bad} 个单形处非正", degree=k, simplex=bad)
        logger.debug(
            "assembled operators: dim=%d sizes=%s", self.dim, [m.shape[0] for m in self.star]
        )

    # ========== 尺寸 ==========

    def size(self, k: int) -> int:
        if k < 0 or k > self.dim:
            return 0
        return int(self.star[k].shape[0])

    # ========== 质量矩阵 ==========

    def mass_solve(self, k: int, rhs: np.ndarray) -> np.ndarray:
        """M_k⁻¹ rhs"""
        if k not in self._lu:
            try:
                self._lu[k] = splu(self.star[k].tocsc())
            except RuntimeError as exc:
                raise AssemblyError(f"{k}-形式质量矩阵奇异", degree=k) from exc
        lu = self._lu[k]
        rhs = np.asarray(rhs, dtype=np.float64)
        return lu.solve(rhs)  # type: ignore[attr-defined]

    def inner(self, k: int, a: np.ndarray, b: np.ndarray) -> float:
        return float(a @ (self.star[k] @ b))

    def norm(self, k: int, a: np.ndarray) -> float:
        return float(np.sqrt(max(self.inner(k, a, a), 0.0)))

    @cached_property
    def lumped_inverse(self) -> List[sp.csr_matrix]:
        """对角逆（取质量矩阵对角元），仅用于核检测"""
        return [sp.diags(1.0 / m.diagonal()).tocsr() for m in self.star]

    # ========== 微分算子 ==========

    def exterior(self, k: int, a: np.ndarray) -> np.ndarray:
        return self.d[k] @ a

    def codiff(self, k: int, a: np.ndarray) -> np.ndarray:
        """δ_k a = M_{k-1}⁻¹ d_{k-1}ᵀ M_k a"""
        if not 1 <= k <= self.dim:
            raise ParameterError(f"余微分次数越界: k={k}", degree=k)
        return self.mass_solve(k - 1, self.d[k - 1].T @ (self.star[k] @ a))

    @cached_property
    def stiffness0(self) -> sp.csr_matrix:
        """弱形式 Δ_0: d_0ᵀ M_1 d_0"""
        return (self.d[0].T @ self.star[1] @ self.d[0]).tocsr()

    def curl_part(self, k: int) -> sp.csr_matrix:
        """d_kᵀ M_{k+1} d_k（k = n 时为零）"""
        size = self.size(k)
        if k >= self.dim:
            return sp.csr_matrix((size, size))
        return (self.d[k].T @ self.star[k + 1] @ self.d[k]).tocsr()

    def laplacian(self, k: int, a: np.ndarray) -> np.ndarray:
        """强形式 Δ_k a = δd a + dδ a"""
        out = np.zeros(self.size(k))
        if k < self.dim:
            out += self.codiff(k + 1, self.d[k] @ a)
        if k > 0:
            out += self.d[k - 1] @ self.codiff(k, a)
        return out

    def laplacian_weak_dense(self, k: int) -> np.ndarray:
        """稠密弱形式 Δ_k（小网格）"""
        weak = self.curl_part(k).toarray()
        if k > 0:
            coupling = (self.star[k] @ self.d[k - 1]).toarray()
            weak += coupling @ self.mass_solve(k - 1, coupling.T)
        return weak

    def lumped_laplacian_weak(self, k: int) -> sp.csr_matrix:
        """grad-div部分用对角逆代替 M_{k-1}⁻¹：核与 Δ_k 的核相同"""
        weak = self.curl_part(k)
        if k > 0:
            coupling = (self.star[k] @ self.d[k - 1]).tocsr()
            weak = weak + coupling @ self.lumped_inverse[k - 1] @ coupling.T
        return weak.tocsr()


def assemble_operators(mesh: SimplicialComplex, metric: MetricData) -> FormOperators:
    return FormOperators(mesh, metric)
