"""
运行配置管理

<rationale>
配置管理设计：
- Pydantic Settings: 类型安全的配置验证和环境变量读取
- 环境变量前缀 SASAKI_DEFORM_: 例如 SASAKI_DEFORM_THREADS 限制内部线程数
- .env文件支持: 本地实验参数，无需改代码
- 默认值: 桌面规模实验（256边圆、64×64环面）开箱即用
</rationale>

Dependencies:
    - pydantic-settings 2.0+: 配置管理和验证

Related:
    - sasaki_deform/main.py: CLI启动时应用THREADS并配置日志
    - sasaki_deform/schemas/run.py: RunConfig在这些默认值之上叠加命令行参数
"""

import os

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    全局数值配置 - 集中管理所有容差和求解器参数

    <rationale>
    配置分组：
    - 运行环境: 线程数、日志
    - 网格: 球面容差
    - 谱求解: 稠密/迭代切换阈值、特征值窗口、核容差
    - 环境结构: 有限差分步长、求积阶数、随机种子
    - 形变: Newton–Green 迭代参数、法向半径
    </rationale>

    Example:
        >>> from sasaki_deform.core.config import settings
        >>> settings.CLUSTER_WINDOW
        0.05
    """

    # ========== 运行环境 ==========
    THREADS: int = Field(default=0, ge=0)  # 0 = BLAS默认
    LOG_LEVEL: str = "WARNING"
    LOG_FORMAT: str = "text"

    # ========== 网格 ==========
    SPHERE_TOL: float = Field(default=1e-9, ge=0.0)

    # ========== 谱求解 ==========
    DENSE_LIMIT: int = Field(default=3000, gt=0)
    CLUSTER_WINDOW: float = Field(default=0.05, gt=0.0, lt=1.0)
    KERNEL_TOL: float = Field(default=1e-8, gt=0.0)
    HARMONIC_TOL: float = Field(default=1e-8, gt=0.0)
    EIGSH_MAXITER: int = Field(default=5000, gt=0)

    # ========== 环境结构 ==========
    FD_STEP: float = Field(default=1e-4, gt=0.0)
    QUADRATURE_ORDER: int = Field(default=3, ge=1, le=8)
    SEED: int = 0

    # ========== 形变 ==========
    NEWTON_MAX_ITER: int = Field(default=12, ge=0)
    NEWTON_TOL: float = Field(default=1e-8, gt=0.0)
    NEWTON_START_BOUND: float = Field(default=0.1, gt=0.0)
    NORMAL_RADIUS: float = Field(default=0.5, gt=0.0)

    model_config = SettingsConfigDict(
        env_prefix="SASAKI_DEFORM_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )


def apply_thread_cap(threads: int) -> None:
    """
    限制BLAS/OpenMP线程数

    <warning type="initialization">
    ⚠️ BLAS 在 numpy/scipy 首次导入时读取这些变量，之后调用不再生效；
    CLI入口在解析 --threads 时调用，子命令模块此时尚未导入。
    </warning>
    """
    if threads <= 0:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(threads)


settings = Settings()
