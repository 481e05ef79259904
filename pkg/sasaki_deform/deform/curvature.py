"""
离散平均曲率与相位-曲率关系

<rationale>
H_v = −∇_{x_v} Vol / m_v，m_v 为集中质量 Σ_T vol_T/(n+1)，再投影到球面切空间。
- 曲线: ∂L/∂b = (b−a)/|b−a|
- 三角形: u = b−a, w = c−a, ∂A/∂u = (|w|²u − ⟨u,w⟩w)/(4A)
相位-曲率关系以 θ̂ 的约定（*ι*ψ = e^{iθ̂}）写为 ι*(i_H ω^T) = −dθ̂，
在边上比较两侧的积分密度。
</rationale>
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from sasaki_deform.ambient.structure import AmbientStructure
from sasaki_deform.core.errors import SingularMetricError
from sasaki_deform.deform.classify import phase_extract, wrap_angle
from sasaki_deform.deform.pullback import interval_rule
from sasaki_deform.mesh.complex import Embedding, SimplicialComplex, check_compatible
from sasaki_deform.mesh.metric import MetricData, induced_metric, real_inner, simplex_volumes

logger = logging.getLogger(__name__)

AREA_FLOOR = 1e-14


def _volume_gradient(mesh: SimplicialComplex, points: np.ndarray) -> np.ndarray:
    grad = np.zeros_like(points)
    if mesh.dim == 1:
        a, b = points[mesh.edges[:, 0]], points[mesh.edges[:, 1]]
        delta = b - a
        length = np.linalg.norm(delta, axis=1)
        if np.any(length < AREA_FLOOR):
            bad = int(np.argmin(length))
            raise SingularMetricError(f"边 {bad} 退化", simplex=bad)
        unit = delta / length[:, None]
        np.add.at(grad, mesh.edges[:, 1], unit)
        np.add.at(grad, mesh.edges[:, 0], -unit)
        return grad

    tri = mesh.top
    a, b, c = points[tri[:, 0]], points[tri[:, 1]], points[tri[:, 2]]
    u, w = b - a, c - a
    uu = real_inner(u, u)
    ww = real_inner(w, w)
    uw = real_inner(u, w)
    area = 0.5 * np.sqrt(np.clip(uu * ww - uw**2, 0.0, None))
    if np.any(area < AREA_FLOOR):
        bad = int(np.argmin(area))
        raise SingularMetricError(f"三角形 {bad} 退化", simplex=bad)
    du = (ww[:, None] * u - uw[:, None] * w) / (4.0 * area[:, None])
    dw = (uu[:, None] * w - uw[:, None] * u) / (4.0 * area[:, None])
    np.add.at(grad, tri[:, 1], du)
    np.add.at(grad, tri[:, 2], dw)
    np.add.at(grad, tri[:, 0], -(du + dw))
    return grad


def lumped_mass(mesh: SimplicialComplex, metric: MetricData) -> np.ndarray:
    mass = np.zeros(mesh.n_vertices)
    np.add.at(mass, mesh.top.ravel(), np.repeat(metric.volumes / (mesh.dim + 1), mesh.dim + 1))
    return mass


def project_to_sphere(points: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """去掉沿 x 的分量"""
    return vectors - real_inner(points, vectors)[:, None] * points


def mean_curvature(
    mesh: SimplicialComplex, embedding: Embedding, metric: Optional[MetricData] = None
) -> np.ndarray:
    """
    每个顶点的平均曲率向量 (V, n+1)，切于球面

    Raises:
        SingularMetricError: 退化单形
    """
    check_compatible(mesh, embedding)
    if metric is None:
        metric = induced_metric(mesh, embedding)
    points = embedding.points
    curvature = -_volume_gradient(mesh, points) / lumped_mass(mesh, metric)[:, None]
    return project_to_sphere(points, curvature)


@dataclass
class PhaseCurvatureCheck:
    """
    Attributes:
        residual: max_e |(dθ̂)_e + ∫_e i_Hω^T| / |e|
        lhs_norm: max_e |(dθ̂)_e| / |e|
        rhs_norm: max_e |∫_e i_Hω^T| / |e|
    """

    residual: float
    lhs_norm: float
    rhs_norm: float


def vertex_phase(mesh: SimplicialComplex, theta: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """相邻顶单形相位的体积加权圆周平均"""
    acc = np.zeros(mesh.n_vertices, dtype=np.complex128)
    contrib = np.repeat(weights * np.exp(1j * theta), mesh.dim + 1)
    np.add.at(acc, mesh.top.ravel(), contrib)
    return np.angle(acc)


def check_phase_curvature_relation(
    mesh: SimplicialComplex, embedding: Embedding, structure: AmbientStructure
) -> PhaseCurvatureCheck:
    phase = phase_extract(mesh, embedding, structure)
    metric = induced_metric(mesh, embedding)
    theta_v = vertex_phase(mesh, phase.theta, metric.volumes)
    edges = mesh.edges
    d_theta = wrap_angle(theta_v[edges[:, 1]] - theta_v[edges[:, 0]])

    h_vec = mean_curvature(mesh, embedding, metric)
    pts = embedding.points
    x0, x1 = pts[edges[:, 0]], pts[edges[:, 1]]
    delta = x1 - x0
    s, w = interval_rule(2)
    contraction = np.zeros(len(edges))
    for sq, wq in zip(s, w):
        p = (1.0 - sq) * x0 + sq * x1
        hv = (1.0 - sq) * h_vec[edges[:, 0]] + sq * h_vec[edges[:, 1]]
        contraction += wq * structure.eval_omega_T(p, hv, delta)

    lengths = simplex_volumes(mesh, embedding, 1)
    check = PhaseCurvatureCheck(
        residual=float(np.max(np.abs(d_theta + contraction) / lengths)),
        lhs_norm=float(np.max(np.abs(d_theta) / lengths)),
        rhs_norm=float(np.max(np.abs(contraction) / lengths)),
    )
    logger.debug(
        "phase-curvature: residual %.3e (|dθ| %.3e, |i_Hω| %.3e)",
        check.residual,
        check.lhs_norm,
        check.rhs_norm,
    )
    return check
