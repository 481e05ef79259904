"""
沿模空间方向的延拓：预测步 exp_deform + 修正步 Newton–Green

<rationale>
- harmonic 方向: 横截算子 D₁(α) = (d*α, dα) 的核（调和 1-形式），
  每步在新嵌入上重算核并与上一步方向对齐（M₁ 内积投影），
  f = 0 的识别逆映射给出法向量场，最大模长归一为 1
- reeb 方向: v = ξ，即 x ↦ e^{it}x；ψ 的相位随之旋转 κt，每步重新提取相位
修正在 nx_complex 系统上做；路径在 N_X 中，η 残差单独记录（漂移）。
</rationale>
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Literal, Optional, Union

import numpy as np

from sasaki_deform.ambient.structure import AmbientStructure
from sasaki_deform.core.config import settings
from sasaki_deform.core.errors import ParameterError, SasakiDeformError
from sasaki_deform.dec.kernel import kernel_dim
from sasaki_deform.dec.operators import FormOperators, assemble_operators
from sasaki_deform.deform.classify import calibrated
from sasaki_deform.deform.newton import newton_green_correct
from sasaki_deform.deform.normal import exp_deform, identification_inverse, reeb_field
from sasaki_deform.deform.operators import assemble_operator
from sasaki_deform.deform.pullback import residual_components
from sasaki_deform.mesh.complex import Embedding, SimplicialComplex, check_compatible
from sasaki_deform.mesh.io import save_mesh
from sasaki_deform.mesh.metric import induced_metric, simplex_volumes
from sasaki_deform.schemas.run import CSV_COLUMNS, DeformationPathLog, PathStep

logger = logging.getLogger(__name__)

Direction = Literal["harmonic", "reeb"]


@dataclass
class DeformationPath:
    mesh: SimplicialComplex
    log: DeformationPathLog
    embeddings: List[Embedding] = field(default_factory=list)

    def save(self, directory: Union[str, Path]) -> Path:
        """编号的网格 JSON 加 residuals.csv"""
        target = Path(directory)
        target.mkdir(parents=True, exist_ok=True)
        for index, embedding in enumerate(self.embeddings):
            save_mesh(self.mesh, embedding, target / f"step_{index:04d}.json")
        with open(target / "residuals.csv", "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(CSV_COLUMNS)
            for step in self.log.steps:
                writer.writerow(step.row())
        (target / "path.json").write_text(self.log.model_dump_json(indent=2), encoding="utf-8")
        return target


def transverse_kernel(ops: FormOperators) -> np.ndarray:
    """横截算子核的 M₁-正交归一基 (E, b₁)"""
    operator = assemble_operator("transverse", ops, 0.0)
    expected = ops.mesh.betti_numbers()[1]
    result = kernel_dim(
        operator.weak1(), operator.mass_in, operator.mass_out, weak=True, expected=expected
    )
    return result.basis


def aligned_direction(basis: np.ndarray, mass: object, previous: np.ndarray) -> np.ndarray:
    """previous 在新核上的 M-正交投影，归一化"""
    coeff = basis.T @ (mass @ previous)  # type: ignore[operator]
    if not np.any(coeff):
        raise ParameterError("上一步方向与当前核正交，无法对齐")
    return basis @ (coeff / np.linalg.norm(coeff))


def step_residuals(
    mesh: SimplicialComplex, embedding: Embedding, structure: AmbientStructure
) -> Dict[str, float]:
    parts = residual_components(mesh, embedding, structure)
    lengths = simplex_volumes(mesh, embedding, 1)
    out = {
        "res_psi_im": float(np.max(np.abs(parts["P"]))),
        "res_eta": float(np.max(np.abs(parts["E"]) / lengths)),
        "res_omega_T": 0.0,
    }
    if "W" in parts:
        areas = simplex_volumes(mesh, embedding, 2)
        out["res_omega_T"] = float(np.max(np.abs(parts["W"]) / areas))
    return out


def _record(
    log: DeformationPathLog,
    mesh: SimplicialComplex,
    embedding: Embedding,
    structure: AmbientStructure,
    iterations: int,
) -> None:
    values = step_residuals(mesh, embedding, structure)
    log.steps.append(
        PathStep(step=len(log.steps), newton_iters=iterations, theta=structure.theta, **values)
    )
    log.eta_drift = max(log.eta_drift, values["res_eta"])
    logger.info(
        "path step %d: ψ^Im %.3e ω^T %.3e η %.3e (%d newton iterations)",
        len(log.steps) - 1,
        values["res_psi_im"],
        values["res_omega_T"],
        values["res_eta"],
        iterations,
    )


def continuation(
    mesh: SimplicialComplex,
    embedding: Embedding,
    structure: AmbientStructure,
    direction: Direction = "harmonic",
    index: int = 0,
    step: float = 0.01,
    steps: int = 10,
    tol: Optional[float] = None,
) -> DeformationPath:
    """
    从修正后的起点出发走 steps 步；中途失败时返回截断路径并记录 error

    Raises:
        ParameterError: 方向或核编号无效、步长超出法向半径
    """
    check_compatible(mesh, embedding)
    if direction not in ("harmonic", "reeb"):
        raise ParameterError(f"未知延拓方向: {direction}", direction=direction)
    if steps < 0:
        raise ParameterError(f"步数必须非负: {steps}", steps=steps)
    if abs(step) > settings.NORMAL_RADIUS:
        raise ParameterError(f"步长 {step} 超出法向半径 {settings.NORMAL_RADIUS}", step=step)

    label = f"harmonic:{index}" if direction == "harmonic" else "reeb"
    log = DeformationPathLog(direction=label, step_size=step, requested_steps=steps)
    path = DeformationPath(mesh=mesh, log=log)

    structure = calibrated(mesh, embedding, structure)
    current, newton_log = newton_green_correct(
        mesh, embedding, structure, tol=tol, calibrate=False
    )
    path.embeddings.append(current)
    _record(log, mesh, current, structure, newton_log.iterations)

    previous = np.zeros(0)
    if direction == "harmonic":
        ops = assemble_operators(mesh, induced_metric(mesh, current))
        basis = transverse_kernel(ops)
        if not 0 <= index < basis.shape[1]:
            raise ParameterError(
                f"核编号 {index} 越界（核维数 {basis.shape[1]}）", index=index, dim=basis.shape[1]
            )
        previous = basis[:, index]

    for _ in range(steps):
        try:
            if direction == "harmonic":
                ops = assemble_operators(mesh, induced_metric(mesh, current))
                alpha = aligned_direction(transverse_kernel(ops), ops.star[1], previous)
                previous = alpha
                field_ = identification_inverse(
                    mesh, current, structure, np.zeros(mesh.n_vertices), alpha
                )
                field_ = field_.scaled(1.0 / max(field_.max_norm, np.finfo(float).tiny))
            else:
                field_ = reeb_field(current, structure)
            moved = exp_deform(mesh, current, field_, step)
            if direction == "reeb":
                structure = calibrated(mesh, moved, structure)
            current, newton_log = newton_green_correct(
                mesh, moved, structure, tol=tol, calibrate=False
            )
        except SasakiDeformError as exc:
            log.error = exc.to_dict()
            logger.warning(
                "continuation stopped after %d of %d steps: %s", len(log.steps) - 1, steps, exc
            )
            break
        path.embeddings.append(current)
        _record(log, mesh, current, structure, newton_log.iterations)
    return path

