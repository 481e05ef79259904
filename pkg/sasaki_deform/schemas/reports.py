"""
实验报告 Schema

<rationale>
- 所有报告以 model_dump_json(indent=2) 写出，字段顺序固定，同一种子逐字节一致
- 残差、阈值一并记录，报告本身即可判定 pass/fail
</rationale>
"""

from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, computed_field

Status = Literal["pass", "fail", "indeterminate"]


# ============================================================================
# 环境恒等式 (Ambient identities)
# ============================================================================

class IdentityResidual(BaseModel):
    """单个恒等式在全部样本上的最大残差"""

    identity: str
    max_residual: float = Field(..., ge=0.0)
    samples: int = Field(..., gt=0)
    fd_step: Optional[float] = Field(None, gt=0.0, description="有限差分步长，代数恒等式为空")
    expected_order: Optional[int] = Field(None, description="有限差分误差阶")
    threshold: float = Field(..., gt=0.0)

    @computed_field  # type: ignore[misc]
    @property
    def passed(self) -> bool:
        return self.max_residual < self.threshold


class IdentityReport(BaseModel):
    n: int
    kappa: float
    theta: float
    scale: float
    seed: int
    residuals: List[IdentityResidual]

    @computed_field  # type: ignore[misc]
    @property
    def passed(self) -> bool:
        return all(entry.passed for entry in self.residuals)

    def residual(self, identity: str) -> float:
        for entry in self.residuals:
            if entry.identity == identity:
                return entry.max_residual
        raise KeyError(identity)


# ============================================================================
# 分类 (Classification)
# ============================================================================

class Verdict(BaseModel):
    """残差落在 pass (< 10h²) / fail (> 100h²) / 中间 三个带中的哪一个"""

    status: Status
    residual: float
    pass_below: float
    fail_above: float

    @computed_field  # type: ignore[misc]
    @property
    def value(self) -> bool:
        return self.status == "pass"


class PhaseSummary(BaseModel):
    mean_theta: float = Field(..., description="圆周平均 θ̂，*ι*ψ = e^{iθ̂}")
    max_deviation: float = Field(..., ge=0.0)
    modulus_defect: float = Field(..., ge=0.0, description="max |‖*ι*ψ‖ − 1|")


class ClassificationRecord(BaseModel):
    dim: int
    mesh_size: float = Field(..., description="最大边长 h")
    structure_theta: float
    phase: Optional[PhaseSummary] = None
    legendrian: Verdict
    special_legendrian: Verdict
    theta_special: Verdict
    theta_hat: Optional[float] = None
    minimal_legendrian: Verdict
    notes: List[str] = Field(default_factory=list)


# ============================================================================
# 模空间切空间 (Moduli tangent)
# ============================================================================

class ClusterSummary(BaseModel):
    degree: int
    target: float
    window: float
    values: List[float]
    ambiguous: bool


class ModuliReport(BaseModel):
    kind: str
    kappa: float
    kernel_dim: int
    predicted_dim: int
    match: bool
    cokernel_dim: int
    clusters: List[ClusterSummary] = Field(default_factory=list)
    tolerances: Dict[str, float] = Field(default_factory=dict)
    reeb_in_kernel: bool
    p2_kernel_dim: Optional[int] = None
    trivial_extra_dim: Optional[int] = None
    smallest_singular_values: List[float] = Field(default_factory=list)
    ambiguous: bool = False


# ============================================================================
# 收敛表 (Convergence)
# ============================================================================

class ConvergenceRow(BaseModel):
    level: int
    size: float
    value: float
    ratio: Optional[float] = None
    order: Optional[float] = None


class ConvergenceTable(BaseModel):
    quantity: str
    rows: List[ConvergenceRow]

    @property
    def orders(self) -> List[float]:
        return [row.order for row in self.rows if row.order is not None]


class CheckReport(BaseModel):
    """check 命令的输出：最细网格上的分类，以及加密序列上的收敛表"""

    classification: ClassificationRecord
    refinements: List[ClassificationRecord] = Field(default_factory=list)
    convergence: List[ConvergenceTable] = Field(default_factory=list)
