"""
运行配置与形变路径日志 Schema

<rationale>
- RunConfig 由命令行选项叠加在 Settings 默认值之上构造，校验集中在这里
- DeformationPathLog 与路径目录中的 CSV 一一对应（列顺序固定）
</rationale>
"""

import math
from typing import Any, Dict, List, Literal, Optional, Tuple, Union, get_args

from pydantic import BaseModel, Field, field_validator, model_validator

Builtin = Literal["clifford-circle", "clifford-torus"]

Kind = Literal[
    "special_legendrian",
    "nx_complex",
    "legendrian_complex",
    "transverse",
    "contact_cy",
    "minimal_legendrian",
]
KINDS: Tuple[str, ...] = get_args(Kind)

CSV_COLUMNS = ("step", "res_psi_im", "res_omega_T", "res_eta", "newton_iters")


def parse_resolution(text: str) -> Tuple[int, ...]:
    """"256" → (256,)，"64x64" → (64, 64)"""
    try:
        parts = tuple(int(p) for p in str(text).lower().split("x"))
    except ValueError as exc:
        raise ValueError(f"无法解析分辨率: {text!r}") from exc
    if not 1 <= len(parts) <= 2 or min(parts) < 3:
        raise ValueError(f"分辨率必须是 ≥ 3 的整数或 AxB: {text!r}")
    return parts


class RunConfig(BaseModel):
    """一次命令运行的完整配置（固定种子 ⇒ 输出逐字节一致）"""

    command: str
    builtin: Optional[Builtin] = None
    resolution: Optional[str] = Field(None, description="'256' 或 '64x64'")
    mesh_path: Optional[str] = None
    n: Optional[int] = Field(None, ge=1, le=2)
    kappa: Optional[float] = None
    theta: Union[float, Literal["auto"], None] = None
    kind: Optional[Kind] = None
    tolerances: Dict[str, float] = Field(default_factory=dict)
    output: Optional[str] = None
    seed: int = 0

    @field_validator("resolution")
    @classmethod
    def _check_resolution(cls, value: Optional[str]) -> Optional[str]:
        if value is not None:
            parse_resolution(value)
        return value

    @field_validator("kappa")
    @classmethod
    def _check_kappa(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not math.isfinite(value):
            raise ValueError("κ 必须有限")
        return value

    @model_validator(mode="after")
    def _check_source(self) -> "RunConfig":
        if self.builtin is not None and self.mesh_path is not None:
            raise ValueError("--builtin 与 --mesh 只能给一个")
        return self

    @property
    def resolution_tuple(self) -> Tuple[int, ...]:
        return parse_resolution(self.resolution) if self.resolution else ()


# ============================================================================
# Newton–Green 与形变路径
# ============================================================================

class NewtonLog(BaseModel):
    kind: Kind
    theta: float = Field(..., description="校准后的结构相位")
    residuals: List[float] = Field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        """实际执行的修正步数"""
        return max(len(self.residuals) - 1, 0)

    @property
    def final_residual(self) -> float:
        return self.residuals[-1] if self.residuals else math.inf


class PathStep(BaseModel):
    step: int = Field(..., ge=0)
    res_psi_im: float
    res_omega_T: float
    res_eta: float
    newton_iters: int = Field(..., ge=0)
    theta: float

    def row(self) -> List[Any]:
        return [getattr(self, name) for name in CSV_COLUMNS]


class DeformationPathLog(BaseModel):
    direction: str = Field(..., description="harmonic:<index> 或 reeb")
    step_size: float
    requested_steps: int = Field(..., ge=0)
    steps: List[PathStep] = Field(default_factory=list)
    eta_drift: float = 0.0
    error: Optional[Dict[str, Any]] = None

    @property
    def truncated(self) -> bool:
        return self.error is not None
