"""
弦单形上的拉回积分与离散非线性映射 F

<rationale>
- η̃、ω^T、ψ̃ 都沿 r∂/∂r 不变且与 r∂/∂r 的缩并为零，
  所以弦单形上的积分等于其径向投影到球面上的积分
- 积分采用张量积Gauss求积（三角形用Duffy坍缩）
- ω^T 的三角形积分在 F 中用 Stokes 公式 ½∮η 计算，与 E 精确相容
</rationale>

<design-decision>
F 的分量（按算子种类组合）：
- P: *ι*ψ^Im 的 Galerkin 顶点函数 M₀⁻¹W，W_v = Σ_T ∫_T λ_v ψ^Im
- E: ι*η 的边积分
- Wω: ι*ω^T 的三角形积分 = ½ d₁E
- dP: minimal_legendrian 用 d₀P
</design-decision>
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from sasaki_deform.ambient.structure import AmbientStructure
from sasaki_deform.core.config import settings
from sasaki_deform.core.errors import DimensionError, ParameterError
from sasaki_deform.dec.operators import FormOperators, assemble_operators
from sasaki_deform.mesh.complex import Embedding, SimplicialComplex, check_compatible
from sasaki_deform.mesh.metric import induced_metric, simplex_volumes
from sasaki_deform.schemas.run import KINDS

logger = logging.getLogger(__name__)

FORM_NAMES = ("eta", "psi_re", "psi_im", "omega_T")

# F 的 E 分量与法向识别共用的最低求积阶
ETA_MIN_ORDER = 4


@dataclass
class PullbackResidual:
    """
    Attributes:
        form: eta | psi_re | psi_im | omega_T
        values: 每个 k-单形上的积分
        volumes: 每个 k-单形的测度
        l2: sqrt(Σ values²/volumes)
        max_density: max |values|/volumes
    """

    form: str
    degree: int
    values: np.ndarray
    volumes: np.ndarray
    l2: float
    max_density: float

    @property
    def total(self) -> float:
        return float(self.values.sum())


# ========== 求积规则 ==========

@lru_cache(maxsize=16)
def interval_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """[0,1] 上的 Gauss–Legendre 点与权"""
    nodes, weights = leggauss(order)
    return 0.5 * (nodes + 1.0), 0.5 * weights


@lru_cache(maxsize=16)
def simplex_rule(dim: int, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    参考单形上的重心坐标求积 (Q, dim+1) 与权（权和 = 1/dim!）
    """
    s, w = interval_rule(order)
    if dim == 1:
        return np.stack([1.0 - s, s], axis=1), w
    u, v = np.meshgrid(s, s, indexing="ij")
    wu, wv = np.meshgrid(w, w, indexing="ij")
    u, v = u.ravel(), v.ravel()
    lam1 = u
    lam2 = v * (1.0 - u)
    bary = np.stack([1.0 - lam1 - lam2, lam1, lam2], axis=1)
    return bary, (wu * wv).ravel() * (1.0 - u)


def _simplex_points(points: np.ndarray, table: np.ndarray, bary: np.ndarray) -> np.ndarray:
    """(S, Q, n+1) 弦单形上的求积点"""
    return np.einsum("qi,sim->sqm", bary, points[table])


def _edge_vectors(points: np.ndarray, table: np.ndarray) -> np.ndarray:
    pts = points[table]
    return pts[:, 1:, :] - pts[:, :1, :]


# ========== 拉回积分 ==========

def integrate_eta(
    embedding: Embedding, edges: np.ndarray, structure: AmbientStructure, order: int
) -> np.ndarray:
    bary, weights = simplex_rule(1, order)
    quad = _simplex_points(embedding.points, edges, bary)
    delta = _edge_vectors(embedding.points, edges)[:, 0, :]
    values = structure.eval_eta(quad, delta[:, None, :])
    return values @ weights


def eta_order(order: int) -> int:
    return max(order, ETA_MIN_ORDER)


def eta_variation(
    points: np.ndarray,
    edges: np.ndarray,
    structure: AmbientStructure,
    start: np.ndarray,
    end: np.ndarray,
    order: int,
) -> np.ndarray:
    """
    顶点沿 (start, end) 移动时 integrate_eta 的一阶变分（同一求积规则）

    Args:
        start / end: (E, ..., n+1)，两端顶点的位移；中间轴原样广播
    """
    s, w = interval_rule(order)
    x0, x1 = points[edges[:, 0]], points[edges[:, 1]]
    lead = (len(edges),) + (1,) * (np.ndim(start) - 2) + (x0.shape[-1],)
    x0, x1 = x0.reshape(lead), x1.reshape(lead)
    delta = x1 - x0
    spread = end - start
    total = np.zeros(np.broadcast_shapes(np.shape(start), np.shape(end))[:-1])
    for sq, wq in zip(s, w):
        p = (1.0 - sq) * x0 + sq * x1
        moving = (1.0 - sq) * start + sq * end
        total += wq * (
            structure.eval_eta_variation(p, moving, delta) + structure.eval_eta(p, spread)
        )
    return total


def integrate_omega(
    embedding: Embedding, triangles: np.ndarray, structure: AmbientStructure, order: int
) -> np.ndarray:
    bary, weights = simplex_rule(2, order)
    quad = _simplex_points(embedding.points, triangles, bary)
    vectors = _edge_vectors(embedding.points, triangles)
    values = structure.eval_omega_T(quad, vectors[:, None, 0, :], vectors[:, None, 1, :])
    return values @ weights


def psi_samples(
    embedding: Embedding, top: np.ndarray, structure: AmbientStructure, order: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """顶单形求积点上的 ψ̃(e_1..e_n)，返回 (值 (F,Q), 重心坐标, 权)"""
    n = top.shape[1] - 1
    bary, weights = simplex_rule(n, order)
    quad = _simplex_points(embedding.points, top, bary)
    vectors = _edge_vectors(embedding.points, top)
    values = structure.eval_psi(quad, vectors[:, None, :, :])
    return values, bary, weights


def pullback(
    mesh: SimplicialComplex,
    embedding: Embedding,
    structure: AmbientStructure,
    form: str,
    quadrature_order: int = settings.QUADRATURE_ORDER,
) -> PullbackResidual:
    """
    每个弦单形上 ι*φ 的积分

    Raises:
        DimensionError: 形式次数 > n
        ParameterError: 未知形式或求积阶 < 1
    """
    check_compatible(mesh, embedding)
    if form not in FORM_NAMES:
        raise ParameterError(f"未知形式: {form}", form=form, known=list(FORM_NAMES))
    if quadrature_order < 1:
        raise ParameterError(f"求积阶必须 ≥ 1: {quadrature_order}", order=quadrature_order)
    if structure.n != mesh.dim:
        raise DimensionError("结构维数与网格维数不一致", n=structure.n, dim=mesh.dim)
    degree = {"eta": 1, "psi_re": mesh.dim, "psi_im": mesh.dim, "omega_T": 2}[form]
    if degree > mesh.dim:
        raise DimensionError(f"{form} 是 {degree}-形式，超过流形维数 {mesh.dim}", degree=degree)

    if form == "eta":
        values = integrate_eta(embedding, mesh.edges, structure, quadrature_order)
    elif form == "omega_T":
        values = integrate_omega(embedding, mesh.top, structure, quadrature_order)
    else:
        samples, _, weights = psi_samples(embedding, mesh.top, structure, quadrature_order)
        integral = samples @ weights
        values = integral.real if form == "psi_re" else integral.imag
    volumes = simplex_volumes(mesh, embedding, degree)
    return PullbackResidual(
        form=form,
        degree=degree,
        values=values,
        volumes=volumes,
        l2=float(np.sqrt(np.sum(values**2 / volumes))),
        max_density=float(np.max(np.abs(values) / volumes)),
    )


# ========== 离散非线性映射 ==========

def galerkin_psi_im(
    mesh: SimplicialComplex,
    embedding: Embedding,
    structure: AmbientStructure,
    ops: FormOperators,
    order: int = settings.QUADRATURE_ORDER,
) -> np.ndarray:
    """*ι*ψ^Im 在 P1 元上的 Galerkin 投影（当前度量的 M₀）"""
    samples, bary, weights = psi_samples(embedding, mesh.top, structure, order)
    local = np.einsum("fq,qi,q->fi", samples.imag, bary, weights)
    load = np.zeros(mesh.n_vertices)
    np.add.at(load, mesh.top.ravel(), local.ravel())
    return ops.mass_solve(0, load)


def residual_components(
    mesh: SimplicialComplex,
    embedding: Embedding,
    structure: AmbientStructure,
    ops: Optional[FormOperators] = None,
    order: int = settings.QUADRATURE_ORDER,
) -> Dict[str, np.ndarray]:
    """P、E、Wω、dP 四个分量（n = 1 时没有 Wω）"""
    if ops is None:
        ops = assemble_operators(mesh, induced_metric(mesh, embedding))
    psi_im = galerkin_psi_im(mesh, embedding, structure, ops, order)
    eta = integrate_eta(embedding, mesh.edges, structure, eta_order(order))
    out = {"P": psi_im, "E": eta, "dP": ops.d[0] @ psi_im}
    if mesh.dim >= 2:
        out["W"] = 0.5 * (ops.d[1] @ eta)
    return out


def residual_layout(kind: str, dim: int) -> List[Tuple[str, int]]:
    """F 的分量名与次数，与 D₁ 的值域一致"""
    layouts = {
        "special_legendrian": [("P", 0), ("E", 1)],
        "nx_complex": [("P", 0), ("W", 2)],
        "legendrian_complex": [("E", 1), ("W", 2)],
        "transverse": [("P", 0), ("W", 2)],
        "contact_cy": [("P", 0), ("E", 1), ("W", 2)],
        "minimal_legendrian": [("dP", 1), ("E", 1)],
    }
    if kind not in layouts:
        raise ParameterError(f"未知算子种类: {kind}", kind=kind, known=list(KINDS))
    return [(name, degree) for name, degree in layouts[kind] if degree <= dim]


def residual_map(
    kind: str,
    mesh: SimplicialComplex,
    embedding: Embedding,
    structure: AmbientStructure,
    ops: Optional[FormOperators] = None,
    order: int = settings.QUADRATURE_ORDER,
) -> np.ndarray:
    """离散 F(ι)，按 residual_layout 顺序拼接"""
    layout = residual_layout(kind, mesh.dim)
    parts = residual_components(mesh, embedding, structure, ops, order)
    return np.concatenate([parts[name] for name, _ in layout])
