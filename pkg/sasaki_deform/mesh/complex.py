"""
单纯复形与球面嵌入

<rationale>
数据模型设计：
- SimplicialComplex: 有向单形表 + 带符号关联矩阵 ∂_k（整数稀疏矩阵）
- 单形方向即元组顺序；查找面时用排序后的顶点键
- Embedding: 顶点在 S^{2n+1} ⊂ ℂ^{n+1} 上的复坐标
- 构造后不可变，可在线程间共享
</rationale>

<design-decision>
为什么Betti数用连通分支而不是数值秩？
- ∂_1 的秩 = V − 顶点图连通分支数
- 对一致定向的闭伪流形，∂_n 的核由每个对偶连通分支上的定向链张成
- 两者都是精确整数计算，与度量无关
</design-decision>

Dependencies:
    - numpy: 单形表
    - scipy.sparse / scipy.sparse.csgraph: 关联矩阵与连通分支

Related:
    - sasaki_deform/mesh/builders.py: 内置Clifford网格
    - sasaki_deform/dec/operators.py: d_k = ∂_{k+1}ᵀ
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from sasaki_deform.core.config import settings
from sasaki_deform.core.errors import InvalidMeshError

logger = logging.getLogger(__name__)


def permutation_sign(seq: Sequence[int]) -> int:
    """元组相对于其升序排列的置换符号"""
    items = list(seq)
    sign = 1
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if items[i] > items[j]:
                sign = -sign
    return sign


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    """
    紧致 n 维流形 X 的有向单纯复形（n = 1 或 2）

    Attributes:
        dim: 流形维数 n
        simplices: simplices[k] 为 (N_k, k+1) 整数数组，k = 0..n；simplices[0] 为 arange(V)
    """

    dim: int
    simplices: Tuple[np.ndarray, ...]
    _lookup: List[Dict[Tuple[int, ...], int]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise InvalidMeshError(f"只支持 1 维或 2 维流形，收到 dim={self.dim}", dim=self.dim)
        if len(self.simplices) != self.dim + 1:
            raise InvalidMeshError("单形表层数必须为 dim+1", levels=len(self.simplices))
        lookup: List[Dict[Tuple[int, ...], int]] = []
        for k, table in enumerate(self.simplices):
            if table.ndim != 2 or table.shape[1] != k + 1:
                raise InvalidMeshError(f"{k}-单形表形状错误", degree=k, shape=list(table.shape))
            keys: Dict[Tuple[int, ...], int] = {}
            for idx, row in enumerate(table):
                key = tuple(sorted(int(v) for v in row))
                if len(set(key)) != k + 1:
                    raise InvalidMeshError(f"{k}-单形 {idx} 有重复顶点", degree=k, simplex=idx)
                if key in keys:
                    raise InvalidMeshError(f"{k}-单形 {idx} 重复出现", degree=k, simplex=idx)
                keys[key] = idx
            lookup.append(keys)
        object.__setattr__(self, "_lookup", lookup)
        self._validate()

    # ========== 构造 ==========

    @classmethod
    def from_tables(cls, dim: int, n_vertices: int, tables: Dict[int, np.ndarray]) -> "SimplicialComplex":
        simplices = [np.arange(n_vertices, dtype=np.int64).reshape(-1, 1)]
        for k in range(1, dim + 1):
            if k not in tables:
                raise InvalidMeshError(f"缺少 {k}-单形表", degree=k)
            table = np.asarray(tables[k], dtype=np.int64).reshape(-1, k + 1)
            if table.size and (table.min() < 0 or table.max() >= n_vertices):
                raise InvalidMeshError(f"{k}-单形引用了不存在的顶点", degree=k)
            simplices.append(table)
        return cls(dim=dim, simplices=tuple(simplices))

    # ========== 基本属性 ==========

    @property
    def n_vertices(self) -> int:
        return int(self.simplices[0].shape[0])

    def count(self, k: int) -> int:
        return int(self.simplices[k].shape[0])

    @property
    def top(self) -> np.ndarray:
        return self.simplices[self.dim]

    @property
    def edges(self) -> np.ndarray:
        return self.simplices[1]

    @cached_property
    def orientation(self) -> np.ndarray:
        """顶单形元组顺序相对升序的符号"""
        return np.array([permutation_sign(row) for row in self.top], dtype=np.int64)

    def index_of(self, k: int, vertices: Sequence[int]) -> int:
        key = tuple(sorted(int(v) for v in vertices))
        try:
            return self._lookup[k][key]
        except KeyError:
            raise InvalidMeshError(f"面 {key} 不在 {k}-单形表中", degree=k, face=list(key)) from None

    # ========== 关联矩阵 ==========

    @cached_property
    def _boundaries(self) -> Tuple[sp.csr_matrix, ...]:
        mats = []
        for k in range(1, self.dim + 1):
            rows: List[int] = []
            cols: List[int] = []
            vals: List[int] = []
            lower = self.simplices[k - 1]
            for j, simplex in enumerate(self.simplices[k]):
                for i in range(k + 1):
                    face = [int(v) for v in np.delete(simplex, i)]
                    idx = self.index_of(k - 1, face)
                    stored = [int(v) for v in lower[idx]]
                    relative = permutation_sign([stored.index(v) for v in face])
                    rows.append(idx)
                    cols.append(j)
                    vals.append((-1) ** i * relative)
            mats.append(
                sp.csr_matrix(
                    (np.array(vals, dtype=np.int64), (rows, cols)),
                    shape=(self.count(k - 1), self.count(k)),
                )
            )
        return tuple(mats)

    def boundary(self, k: int) -> sp.csr_matrix:
        """∂_k: C_k → C_{k-1}，k = 1..n"""
        if not 1 <= k <= self.dim:
            raise InvalidMeshError(f"边界算子次数越界: k={k}", degree=k)
        return self._boundaries[k - 1]

    def coboundary(self, k: int) -> sp.csr_matrix:
        """d_k = ∂_{k+1}ᵀ: C^k → C^{k+1}"""
        return self.boundary(k + 1).T.tocsr()

    # ========== 拓扑 ==========

    def _validate(self) -> None:
        for k in range(2, self.dim + 1):
            product = self.boundary(k - 1) @ self.boundary(k)
            if product.count_nonzero():
                raise InvalidMeshError(f"∂_{k-1}∂_{k} ≠ 0", degree=k)
        top_boundary = self.boundary(self.dim).tocsr()
        for face in range(top_boundary.shape[0]):
            start, stop = top_boundary.indptr[face], top_boundary.indptr[face + 1]
            signs = top_boundary.data[start:stop]
            if len(signs) > 2:
                raise InvalidMeshError("非流形面：被超过两个顶单形共享", face=face)
            if len(signs) == 2 and signs.sum() != 0:
                raise InvalidMeshError("顶单形定向不一致", face=face)
        logger.debug(
            "complex ok: dim=%d counts=%s", self.dim, [self.count(k) for k in range(self.dim + 1)]
        )

    def _components(self, degree: int) -> Tuple[int, np.ndarray]:
        if degree == 0:
            edges = self.edges
            n = self.n_vertices
            adjacency = sp.coo_matrix(
                (np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n)
            )
        else:
            incidence = abs(self.boundary(self.dim)).astype(np.float64)
            adjacency = (incidence.T @ incidence).tocoo()
        count, labels = connected_components(adjacency, directed=False)
        return int(count), labels

    def betti_numbers(self) -> List[int]:
        """从整数关联矩阵的秩计算 b_0..b_n"""
        counts = [self.count(k) for k in range(self.dim + 1)]
        b0_components, _ = self._components(0)
        n_dual, labels = self._components(self.dim)
        boundary_faces = np.asarray(abs(self.boundary(self.dim)).sum(axis=1)).ravel() == 1
        open_components = set()
        if boundary_faces.any():
            cofaces = abs(self.boundary(self.dim))[np.flatnonzero(boundary_faces)].tocoo()
            open_components = set(labels[cofaces.col].tolist())
        top_cycles = n_dual - len(open_components)

        ranks = [0] * (self.dim + 2)
        ranks[1] = counts[0] - b0_components
        if self.dim > 1:
            ranks[self.dim] = counts[self.dim] - top_cycles
        return [counts[k] - ranks[k] - ranks[k + 1] for k in range(self.dim + 1)]

    def reversed(self) -> "SimplicialComplex":
        """翻转所有顶单形的方向"""
        top = self.top.copy()
        top[:, [0, 1]] = top[:, [1, 0]]
        return SimplicialComplex(dim=self.dim, simplices=self.simplices[:-1] + (top,))


def to_complex(coords: np.ndarray) -> np.ndarray:
    """(..., 2m) 交错实坐标 (Re z1, Im z1, ...) → (..., m) 复坐标"""
    coords = np.asarray(coords, dtype=np.float64)
    return coords[..., 0::2] + 1j * coords[..., 1::2]


def to_real(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],), dtype=np.float64)
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


@dataclass(frozen=True, eq=False)
class Embedding:
    """
    顶点嵌入 ι: X → S^{2n+1}

    points 以复坐标存储，形状 (V, n+1)；ambient_dim = 2n+2 为实维数。
    """

    points: np.ndarray
    sphere_tol: float = settings.SPHERE_TOL

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=np.complex128)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 2:
            raise InvalidMeshError("顶点坐标必须是二维数组", shape=list(pts.shape))
        if self.sphere_tol < 0:
            raise InvalidMeshError("sphere_tol 必须非负", sphere_tol=self.sphere_tol)
        defect = np.abs(np.linalg.norm(pts, axis=1) - 1.0)
        if defect.size and defect.max() > self.sphere_tol:
            worst = int(np.argmax(defect))
            raise InvalidMeshError(
                f"顶点 {worst} 不在单位球面上: |‖x‖−1| = {defect[worst]:.3e}",
                vertex=worst,
                defect=float(defect[worst]),
                sphere_tol=self.sphere_tol,
            )

    @property
    def n_vertices(self) -> int:
        return int(self.points.shape[0])

    @property
    def ambient_dim(self) -> int:
        return 2 * int(self.points.shape[1])

    @property
    def coords(self) -> np.ndarray:
        return to_real(self.points)

    def moved(self, points: np.ndarray) -> "Embedding":
        return Embedding(points=points, sphere_tol=self.sphere_tol)


def check_compatible(mesh: SimplicialComplex, embedding: Embedding) -> None:
    if embedding.n_vertices != mesh.n_vertices:
        raise InvalidMeshError(
            "嵌入顶点数与复形不一致",
            mesh_vertices=mesh.n_vertices,
            embedding_vertices=embedding.n_vertices,
        )
    if embedding.ambient_dim != 2 * mesh.dim + 2:
        raise InvalidMeshError(
            "环境维数必须为 2n+2", dim=mesh.dim, ambient_dim=embedding.ambient_dim
        )
