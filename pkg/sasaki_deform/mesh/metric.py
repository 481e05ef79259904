"""
诱导度量 ι*g

<rationale>
- 每个顶单形存储弦边向量的Gram矩阵，体积由Gram行列式给出
- 合成度量（平环面）直接给出网格坐标下的常数Gram，用于谱的解析对照
- scaled(a) 实现 g ↦ a·g，用于D-同伦的谱记账
</rationale>
"""

import logging
from dataclasses import dataclass
from math import factorial

import numpy as np

from sasaki_deform.core.errors import SingularMetricError
from sasaki_deform.mesh.complex import Embedding, SimplicialComplex, check_compatible

logger = logging.getLogger(__name__)

DEGENERACY_RATIO = 1e-14


def real_inner(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """ℂ^{n+1} 上的实内积 ⟨u,v⟩ = Re Σ ū v（末轴求和）"""
    return np.real(np.sum(np.conj(u) * v, axis=-1))


def top_edge_vectors(mesh: SimplicialComplex, embedding: Embedding) -> np.ndarray:
    """(F, n, n+1) 复数组：每个顶单形从第一个顶点出发的弦边向量"""
    pts = embedding.points[mesh.top]
    return pts[:, 1:, :] - pts[:, :1, :]


@dataclass(frozen=True, eq=False)
class MetricData:
    """
    每个顶单形上的正定Gram矩阵与体积

    Attributes:
        gram: (F, n, n)
        volumes: (F,) 顶单形测度
        total_volume: Σ volumes
    """

    gram: np.ndarray
    volumes: np.ndarray
    total_volume: float

    @property
    def dim(self) -> int:
        return int(self.gram.shape[1])

    @classmethod
    def from_gram(cls, gram: np.ndarray) -> "MetricData":
        gram = np.asarray(gram, dtype=np.float64)
        n = gram.shape[1]
        det = np.linalg.det(gram)
        diag = np.prod(np.diagonal(gram, axis1=1, axis2=2), axis=1)
        bad = np.flatnonzero(~(det > DEGENERACY_RATIO * np.maximum(diag, 1e-300)))
        if bad.size:
            simplex = int(bad[0])
            raise SingularMetricError(
                f"顶单形 {simplex} 退化：Gram行列式 {det[simplex]:.3e}",
                simplex=simplex,
                det=float(det[simplex]),
            )
        volumes = np.sqrt(det) / factorial(n)
        return cls(gram=gram, volumes=volumes, total_volume=float(volumes.sum()))

    def scaled(self, a: float) -> "MetricData":
        """g ↦ a·g"""
        return MetricData.from_gram(self.gram * a)


def induced_metric(mesh: SimplicialComplex, embedding: Embedding) -> MetricData:
    check_compatible(mesh, embedding)
    vectors = top_edge_vectors(mesh, embedding)
    gram = real_inner(vectors[:, :, None, :], vectors[:, None, :, :])
    metric = MetricData.from_gram(gram)
    logger.debug("induced metric: %d simplices, total volume %.12g", len(gram), metric.total_volume)
    return metric


def simplex_volumes(mesh: SimplicialComplex, embedding: Embedding, k: int) -> np.ndarray:
    """任意次数弦单形的测度（k = 0 时为 1）"""
    table = mesh.simplices[k]
    if k == 0:
        return np.ones(len(table))
    pts = embedding.points[table]
    vectors = pts[:, 1:, :] - pts[:, :1, :]
    gram = real_inner(vectors[:, :, None, :], vectors[:, None, :, :])
    det = np.clip(np.linalg.det(gram), 0.0, None)
    return np.sqrt(det) / factorial(k)


def flat_torus_metric(
    mesh: SimplicialComplex,
    n1: int,
    n2: int,
    gram: np.ndarray,
    period: float = 1.0,
) -> MetricData:
    """
    Clifford环面组合结构上的平度量

    网格坐标 (i,j) ↦ (period·i/n1, period·j/n2)，常数度量张量 gram (2×2)。
    """
    gram = np.asarray(gram, dtype=np.float64)
    tri = mesh.top
    i = tri // n2
    j = tri % n2
    di = (i[:, 1:] - i[:, :1] + n1 // 2) % n1 - n1 // 2
    dj = (j[:, 1:] - j[:, :1] + n2 // 2) % n2 - n2 // 2
    vectors = np.stack([di * period / n1, dj * period / n2], axis=-1)
    grams = np.einsum("fia,ab,fjb->fij", vectors, gram, vectors)
    return MetricData.from_gram(grams)
