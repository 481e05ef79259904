"""
相位提取与子流形分类

<rationale>
相位约定：*ι*ψ = e^{iθ̂}。每个顶单形在质心处取弦边标架，去掉径向分量并除以 |p|，
再除以 sqrt(det G) 得到单位复数的近似；模长偏离 1 的程度度量 Legendre 缺陷。
把结构相位旋转 −θ̂ 后 ι*ψ 为正实数（ι*ψ^Re = vol）。
</rationale>

<design-decision>
判定带：h = 最大边长
- 残差 < 10·h²: pass
- 残差 > 100·h²: fail
- 其间: indeterminate，记录警告而不是抛异常
组合判定（如 special = legendrian 且 ψ^Im 小）取较差的一个。
</design-decision>
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from sasaki_deform.ambient.structure import AmbientStructure
from sasaki_deform.core.errors import NotNearLegendrianError
from sasaki_deform.dec.operators import assemble_operators
from sasaki_deform.deform.pullback import galerkin_psi_im, integrate_eta
from sasaki_deform.mesh.complex import Embedding, SimplicialComplex, check_compatible
from sasaki_deform.mesh.metric import induced_metric, real_inner, simplex_volumes
from sasaki_deform.schemas.reports import ClassificationRecord, PhaseSummary, Status, Verdict

logger = logging.getLogger(__name__)

MIN_MODULUS = 0.5
PASS_FACTOR = 10.0
FAIL_FACTOR = 100.0

_RANK = {"pass": 0, "indeterminate": 1, "fail": 2}


@dataclass
class PhaseEstimate:
    """
    Attributes:
        values: 每个顶单形上 *ι*ψ 的复数近似
        theta: arg(values)
        mean: 按体积加权的圆周平均
        max_deviation: max |θ_T − mean|（折回 (−π, π]）
        modulus_defect: max |‖values‖ − 1|
    """

    values: np.ndarray
    theta: np.ndarray
    mean: float
    max_deviation: float
    modulus_defect: float

    def summary(self) -> PhaseSummary:
        return PhaseSummary(
            mean_theta=self.mean,
            max_deviation=self.max_deviation,
            modulus_defect=self.modulus_defect,
        )


def wrap_angle(angle: np.ndarray) -> np.ndarray:
    return np.angle(np.exp(1j * np.asarray(angle)))


def phase_extract(
    mesh: SimplicialComplex, embedding: Embedding, structure: AmbientStructure
) -> PhaseEstimate:
    """
    Raises:
        NotNearLegendrianError: 某单形上 |*ι*ψ| < 0.5
    """
    check_compatible(mesh, embedding)
    pts = embedding.points[mesh.top]
    centroid = pts.mean(axis=1)
    radius = np.linalg.norm(centroid, axis=1)
    unit = centroid / radius[:, None]
    edges = pts[:, 1:, :] - pts[:, :1, :]
    radial = real_inner(unit[:, None, :], edges)
    frame = (edges - radial[..., None] * unit[:, None, :]) / radius[:, None, None]
    gram = real_inner(frame[:, :, None, :], frame[:, None, :, :])
    det = np.linalg.det(gram)
    values = structure.eval_psi_normalized(unit, frame) / np.sqrt(np.clip(det, 1e-300, None))

    modulus = np.abs(values)
    if modulus.min() < MIN_MODULUS:
        worst = int(np.argmin(modulus))
        raise NotNearLegendrianError(
            f"单形 {worst} 上 |*ι*ψ| = {modulus[worst]:.3f} < {MIN_MODULUS}",
            simplex=worst,
            modulus=float(modulus[worst]),
        )
    theta = np.angle(values)
    weights = simplex_volumes(mesh, embedding, mesh.dim)
    mean = float(np.angle(np.sum(weights * np.exp(1j * theta))))
    estimate = PhaseEstimate(
        values=values,
        theta=theta,
        mean=mean,
        max_deviation=float(np.max(np.abs(wrap_angle(theta - mean)))),
        modulus_defect=float(np.max(np.abs(modulus - 1.0))),
    )
    logger.debug(
        "phase: mean=%.6f deviation=%.3e modulus defect=%.3e",
        estimate.mean,
        estimate.max_deviation,
        estimate.modulus_defect,
    )
    return estimate


def calibrated(
    mesh: SimplicialComplex, embedding: Embedding, structure: AmbientStructure
) -> AmbientStructure:
    """旋转结构相位使 ι*ψ 为正实数"""
    return structure.rotated(-phase_extract(mesh, embedding, structure).mean)


def max_edge_length(mesh: SimplicialComplex, embedding: Embedding) -> float:
    pts = embedding.points[mesh.edges]
    return float(np.max(np.linalg.norm(pts[:, 1, :] - pts[:, 0, :], axis=1)))


def verdict(residual: float, h: float, pass_factor: float, fail_factor: float) -> Verdict:
    pass_below = pass_factor * h * h
    fail_above = fail_factor * h * h
    status: Status
    if residual < pass_below:
        status = "pass"
    elif residual > fail_above:
        status = "fail"
    else:
        status = "indeterminate"
    return Verdict(
        status=status, residual=float(residual), pass_below=pass_below, fail_above=fail_above
    )


def _worst(*verdicts: Verdict) -> Verdict:
    chosen = max(verdicts, key=lambda v: (_RANK[v.status], v.residual / v.pass_below))
    residual = max(v.residual for v in verdicts)
    return chosen.model_copy(update={"residual": residual})


def _failed(h: float, pass_factor: float, fail_factor: float) -> Verdict:
    return verdict(np.inf, h, pass_factor, fail_factor)


def classify(
    mesh: SimplicialComplex,
    embedding: Embedding,
    structure: AmbientStructure,
    pass_factor: float = PASS_FACTOR,
    fail_factor: float = FAIL_FACTOR,
    theta: Optional[float] = None,
    rotate_special: bool = False,
) -> ClassificationRecord:
    """
    legendrian / special_legendrian / theta_special / minimal_legendrian 四项判定

    theta 给定时覆盖自动估计的 θ̂（结构旋转 −θ）。
    rotate_special 为真时 special_legendrian 也在旋转 −θ̂ 后的结构上判定。
    """
    check_compatible(mesh, embedding)
    h = max_edge_length(mesh, embedding)
    ops = assemble_operators(mesh, induced_metric(mesh, embedding))
    lengths = simplex_volumes(mesh, embedding, 1)
    notes: List[str] = []

    eta = integrate_eta(embedding, mesh.edges, structure, 4)
    legendrian = verdict(float(np.max(np.abs(eta) / lengths)), h, pass_factor, fail_factor)

    psi_im = galerkin_psi_im(mesh, embedding, structure, ops)
    special = _worst(
        legendrian, verdict(float(np.max(np.abs(psi_im))), h, pass_factor, fail_factor)
    )

    phase = None
    theta_hat: Optional[float] = None
    try:
        phase = phase_extract(mesh, embedding, structure)
        theta_hat = phase.mean if theta is None else float(theta)
    except NotNearLegendrianError as exc:
        notes.append(f"phase_extract: {exc.message}")
        if theta is not None:
            theta_hat = float(theta)

    if theta_hat is None:
        theta_special = _failed(h, pass_factor, fail_factor)
        minimal = _failed(h, pass_factor, fail_factor)
    else:
        rotated = structure.rotated(-theta_hat)
        rotated_im = galerkin_psi_im(mesh, embedding, rotated, ops)
        theta_special = _worst(
            legendrian, verdict(float(np.max(np.abs(rotated_im))), h, pass_factor, fail_factor)
        )
        gradient = np.abs(ops.d[0] @ rotated_im) / lengths
        minimal = _worst(
            legendrian, verdict(float(np.max(gradient)), h, pass_factor, fail_factor)
        )
        if rotate_special:
            special = theta_special

    for name, item in (
        ("legendrian", legendrian),
        ("special_legendrian", special),
        ("theta_special", theta_special),
        ("minimal_legendrian", minimal),
    ):
        if item.status == "indeterminate":
            logger.warning("%s is indeterminate: residual %.3e", name, item.residual)
            notes.append(f"{name}: indeterminate")

    return ClassificationRecord(
        dim=mesh.dim,
        mesh_size=h,
        structure_theta=structure.theta,
        phase=phase.summary() if phase is not None else None,
        legendrian=legendrian,
        special_legendrian=special,
        theta_special=theta_special,
        theta_hat=theta_hat,
        minimal_legendrian=minimal,
        notes=notes,
    )
