"""
领域异常层次

<rationale>
异常设计：
- 单一根类 SasakiDeformError，调用方可统一捕获
- 每个异常携带 detail 字典（单形/顶点编号、残差、迭代次数），
  CLI 将其序列化为报告中的 "error" 字段
- exit_code 类属性：1 = 数值/不变量失败，2 = 用法/解析错误
- 库代码从不调用 sys.exit，只有 CLI 层把异常映射为退出码
</rationale>

Related:
    - sasaki_deform/commands/common.py: 异常到退出码与错误报告的映射
"""

from typing import Any, Dict, List, Optional


class SasakiDeformError(Exception):
    """所有领域异常的基类"""

    exit_code: int = 1

    def __init__(self, message: str, **detail: Any) -> None:
        super().__init__(message)
        self.message = message
        self.detail: Dict[str, Any] = detail

    def to_dict(self) -> Dict[str, Any]:
        return {"type": type(self).__name__, "message": self.message, "detail": self.detail}


# ============================================================================
# 网格与度量 (Mesh / Metric)
# ============================================================================

class InvalidMeshError(SasakiDeformError):
    """单纯复形或嵌入不满足不变量"""


class SingularMetricError(SasakiDeformError):
    """弦单形退化（Gram矩阵非正定）"""

    def __init__(self, message: str, simplex: int, **detail: Any) -> None:
        super().__init__(message, simplex=simplex, **detail)
        self.simplex = simplex


class MeshParseError(SasakiDeformError):
    """网格JSON文件格式错误，detail 中带 field/line"""

    exit_code = 2


# ============================================================================
# 参数与定义域 (Parameters / Domain)
# ============================================================================

class ParameterError(SasakiDeformError, ValueError):
    """参数越界：a ≤ 0、tol ≤ 0、未知算子种类等"""

    exit_code = 2


class DimensionError(ParameterError):
    """形式次数超过流形维数"""


class DomainError(SasakiDeformError):
    """在 x ≈ 0 或偏离单位球面处求值"""


# ============================================================================
# 组装与求解 (Assembly / Solvers)
# ============================================================================

class AssemblyError(SasakiDeformError):
    """质量矩阵奇异，detail 中带退化单形编号"""


class SolverError(SasakiDeformError):
    """迭代求解器不收敛"""

    def __init__(
        self,
        message: str,
        iterations: Optional[int] = None,
        residual: Optional[float] = None,
        **detail: Any,
    ) -> None:
        super().__init__(message, iterations=iterations, residual=residual, **detail)
        self.iterations = iterations
        self.residual = residual


# ============================================================================
# 形变 (Deformation)
# ============================================================================

class NotNearLegendrianError(SasakiDeformError):
    """某单形上 |*ι*ψ| < 0.5"""


class FrameError(SasakiDeformError):
    """法标架退化"""

    def __init__(self, message: str, vertex: int, **detail: Any) -> None:
        super().__init__(message, vertex=vertex, **detail)
        self.vertex = vertex


class StepSizeError(SasakiDeformError):
    """法向位移超出管状邻域半径"""


class DivergenceError(SasakiDeformError):
    """Newton–Green 残差连续两次增大"""

    def __init__(self, message: str, log: List[float], **detail: Any) -> None:
        super().__init__(message, log=list(log), **detail)
        self.log = list(log)
