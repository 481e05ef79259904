"""
法向量场与 NX ≅ Λ⁰ ⊕ Λ¹ 的离散识别

<rationale>
- 顶点切空间: 相邻弦边去掉径向分量后，协方差矩阵的前 n 个特征向量
- 法标架: {ix, i·t_1, …, i·t_n} 投影掉切空间与 x 后正交化（近Legendre时即 ξ 与 J(TX)）
- 识别: f_v = η(v_v)；α_e = ½(δE_e − (f₁ − f₀))，δE 是 E 分量（弦上 ∫η̃ 的求积）
  在顶点位移下的一阶变分。由 Cartan 公式它等于 ∫_e ½ i_V dη，
  且离散层面 δE = d₀f + 2α、δ(½d₁E) = d₁α 精确成立
- 逆映射: 在法标架系数上做稀疏最小二乘（边行按边长缩放）
- 随机场: 光滑环境向量场在法空间上的正交投影，与标架的符号和旋转无关
</rationale>

<design-decision>
为什么逆映射用全局最小二乘而不是逐顶点求解？
- α 是边上的量，每个顶点的法向量只能通过相邻边整体确定
- 偶数段圆上标架系数存在锯齿核（α 只看相邻顶点平均），
  lsqr 从零出发返回最小范数解
- 最小范数解与标架的选取无关（标架正交归一）
</design-decision>
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import lsqr

from sasaki_deform.ambient.structure import AmbientStructure
from sasaki_deform.core.config import settings
from sasaki_deform.core.errors import FrameError, ParameterError, SolverError, StepSizeError
from sasaki_deform.dec.operators import Cochain
from sasaki_deform.deform.pullback import eta_order, eta_variation
from sasaki_deform.mesh.complex import (
    Embedding,
    SimplicialComplex,
    check_compatible,
    to_complex,
    to_real,
)
from sasaki_deform.mesh.metric import real_inner

logger = logging.getLogger(__name__)

FRAME_TOL = 1e-3
TANGENCY_WARN = 1e-10
LSQR_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class NormalField:
    """每个顶点一个环境向量 (V, n+1) 复坐标"""

    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.complex128))

    def scaled(self, factor: float) -> "NormalField":
        return NormalField(self.values * factor)

    @property
    def max_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.values, axis=1))) if len(self.values) else 0.0


# ========== 标架 ==========

def tangent_spaces(mesh: SimplicialComplex, embedding: Embedding) -> np.ndarray:
    """(V, n, 2n+2) 实坐标下的正交归一切标架"""
    check_compatible(mesh, embedding)
    pts = embedding.points
    edges = mesh.edges
    delta = pts[edges[:, 1]] - pts[edges[:, 0]]
    real_dim = 2 * pts.shape[1]
    cov = np.zeros((mesh.n_vertices, real_dim, real_dim))
    for end in (0, 1):
        vertex = edges[:, end]
        base = pts[vertex]
        projected = delta - real_inner(base, delta)[:, None] * base
        real = to_real(projected)
        real /= np.linalg.norm(real, axis=1, keepdims=True)
        np.add.at(cov, vertex, real[:, :, None] * real[:, None, :])
    _, vectors = np.linalg.eigh(cov)
    top = vectors[:, :, ::-1][:, :, : mesh.dim]
    return np.transpose(top, (0, 2, 1))


def normal_frames(mesh: SimplicialComplex, embedding: Embedding) -> np.ndarray:
    """
    (V, n+1, n+1) 复坐标的正交归一法标架，第一个向量近似 ix

    Raises:
        FrameError: 投影后的候选向量近似线性相关
    """
    pts = embedding.points
    tangent = to_complex(tangent_spaces(mesh, embedding))
    candidates = np.concatenate([1j * pts[:, None, :], 1j * tangent], axis=1)
    real = to_real(candidates)
    basis = np.concatenate([to_real(pts)[:, None, :], to_real(tangent)], axis=1)
    coeff = np.einsum("vkm,vjm->vkj", real, basis)
    real = real - np.einsum("vkj,vjm->vkm", coeff, basis)

    q, r = np.linalg.qr(np.transpose(real, (0, 2, 1)))
    diag = np.diagonal(r, axis1=1, axis2=2)
    scale = np.abs(diag).min(axis=1)
    if scale.min() < FRAME_TOL:
        worst = int(np.argmin(scale))
        raise FrameError(
            f"顶点 {worst} 的法标架退化", vertex=worst, conditioning=float(scale[worst])
        )
    q = q * np.sign(diag)[:, None, :]
    return to_complex(np.transpose(q, (0, 2, 1)))


# ========== 识别 ==========

def normal_identification(
    mesh: SimplicialComplex,
    embedding: Embedding,
    structure: AmbientStructure,
    field: NormalField,
    order: int = settings.QUADRATURE_ORDER,
) -> Tuple[Cochain, Cochain]:
    """v ↦ (i_vη, ½ i_v dη)，α 取 E 分量一阶变分去掉 df 后的一半"""
    check_compatible(mesh, embedding)
    v = field.values
    if v.shape != embedding.points.shape:
        raise ParameterError("法向量场形状与嵌入不符", shape=list(v.shape))
    pts = embedding.points
    edges = mesh.edges
    f = structure.eval_eta(pts, v)
    rule = eta_order(order)
    variation = eta_variation(pts, edges, structure, v[edges[:, 0]], v[edges[:, 1]], rule)
    alpha = 0.5 * (variation - (f[edges[:, 1]] - f[edges[:, 0]]))
    return Cochain(0, f), Cochain(1, alpha)


def identification_matrix(
    mesh: SimplicialComplex,
    embedding: Embedding,
    structure: AmbientStructure,
    frames: np.ndarray,
    order: int = settings.QUADRATURE_ORDER,
) -> sp.csr_matrix:
    """标架系数 c (V·(n+1)) ↦ (f, α)，与 normal_identification 是同一个线性映射"""
    pts = embedding.points
    n_vertices, width = frames.shape[0], frames.shape[1]
    edges = mesh.edges
    n_edges = len(edges)
    rows, cols, vals = [], [], []

    f_vals = structure.eval_eta(pts[:, None, :], frames)
    rows.append(np.repeat(np.arange(n_vertices), width))
    cols.append(np.arange(n_vertices * width))
    vals.append(f_vals.ravel())

    rule = eta_order(order)
    for end, vertex in ((0, edges[:, 0]), (1, edges[:, 1])):
        moving = frames[vertex]
        still = np.zeros_like(moving)
        if end == 0:
            variation = eta_variation(pts, edges, structure, moving, still, rule)
            block = 0.5 * (variation + f_vals[vertex])
        else:
            variation = eta_variation(pts, edges, structure, still, moving, rule)
            block = 0.5 * (variation - f_vals[vertex])
        rows.append(np.repeat(n_vertices + np.arange(n_edges), width))
        cols.append((vertex[:, None] * width + np.arange(width)[None, :]).ravel())
        vals.append(block.ravel())
    return sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_vertices + n_edges, n_vertices * width),
    ).tocsr()


def identification_inverse(
    mesh: SimplicialComplex,
    embedding: Embedding,
    structure: AmbientStructure,
    f: np.ndarray,
    alpha: np.ndarray,
    frames: Optional[np.ndarray] = None,
    order: int = settings.QUADRATURE_ORDER,
) -> NormalField:
    """
    (f, α) ↦ v，法空间上的最小二乘解

    Raises:
        FrameError: 法标架退化
        SolverError: lsqr 达到迭代上限
    """
    check_compatible(mesh, embedding)
    f = np.asarray(f, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    if f.shape != (mesh.n_vertices,) or alpha.shape != (mesh.count(1),):
        raise ParameterError("(f, α) 长度与网格不符", f=int(f.size), alpha=int(alpha.size))
    if frames is None:
        frames = normal_frames(mesh, embedding)
    matrix = identification_matrix(mesh, embedding, structure, frames, order)
    pts = embedding.points[mesh.edges]
    lengths = np.linalg.norm(pts[:, 1, :] - pts[:, 0, :], axis=1)
    row_scale = sp.diags(np.concatenate([np.ones(mesh.n_vertices), 1.0 / lengths]))
    rhs = np.concatenate([f, alpha / lengths])
    limit = 20 * matrix.shape[1]
    result = lsqr(row_scale @ matrix, rhs, atol=LSQR_TOL, btol=LSQR_TOL, iter_lim=limit)
    coeff, istop, iterations = result[0], result[1], result[2]
    if istop == 7:
        raise SolverError(
            "法向识别的最小二乘未收敛", iterations=int(iterations), residual=float(result[3])
        )
    width = frames.shape[1]
    values = np.einsum("vj,vjm->vm", coeff.reshape(-1, width), frames)
    return NormalField(values)


def reeb_field(embedding: Embedding, structure: AmbientStructure) -> NormalField:
    return NormalField(structure.eval_xi(embedding.points))


def random_normal_field(
    mesh: SimplicialComplex,
    embedding: Embedding,
    seed: int,
    amplitude: float = 1.0,
    transverse: bool = False,
    frames: Optional[np.ndarray] = None,
) -> NormalField:
    """
    光滑的随机法向量场：随机仿射场 W(x) = Ax + b 在法空间上的投影，最大模长为 amplitude

    切空间估计的特征向量符号逐顶点任意，投影只依赖法空间本身，结果在顶点间光滑。
    transverse=True 时去掉第一个（ξ 方向）标架分量。
    """
    if frames is None:
        frames = normal_frames(mesh, embedding)
    rng = np.random.default_rng(seed)
    pts = embedding.points
    size = pts.shape[1]
    linear = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    offset = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    ambient = pts @ linear.T + offset[None, :]
    coeff = real_inner(frames, ambient[:, None, :])
    if transverse:
        coeff[:, 0] = 0.0
    values = np.einsum("vj,vjm->vm", coeff, frames)
    field = NormalField(values)
    return field.scaled(amplitude / max(field.max_norm, np.finfo(float).tiny))


# ========== 指数映射 ==========

def exp_deform(
    mesh: SimplicialComplex, embedding: Embedding, field: NormalField, t: float
) -> Embedding:
    """
    x ↦ cos(t‖v‖)x + sin(t‖v‖)v/‖v‖

    Raises:
        StepSizeError: max ‖tv‖ 超过 NORMAL_RADIUS
    """
    check_compatible(mesh, embedding)
    pts = embedding.points
    v = field.values
    if v.shape != pts.shape:
        raise ParameterError("法向量场形状与嵌入不符", shape=list(v.shape))
    radial = real_inner(pts, v)
    if np.max(np.abs(radial)) > TANGENCY_WARN * max(1.0, field.max_norm):
        logger.warning(
            "normal field not tangent to the sphere (max radial %.3e); projecting",
            float(np.max(np.abs(radial))),
        )
        v = v - radial[:, None] * pts
    step = np.abs(t) * np.linalg.norm(v, axis=1)
    if step.size and step.max() > settings.NORMAL_RADIUS:
        worst = int(np.argmax(step))
        raise StepSizeError(
            f"顶点 {worst} 的位移 {step[worst]:.3f} 超过法向半径 {settings.NORMAL_RADIUS}",
            vertex=worst,
            step=float(step[worst]),
        )
    norms = np.linalg.norm(v, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    angle = t * norms
    moved = np.cos(angle)[:, None] * pts + (np.sin(angle) / safe)[:, None] * v
    moved /= np.linalg.norm(moved, axis=1, keepdims=True)
    return embedding.moved(moved)
