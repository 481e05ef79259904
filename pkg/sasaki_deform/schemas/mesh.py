"""
网格文件 JSON Schema

<rationale>
格式：{ "dim": n, "ambient_dim": 2n+2, "vertices": [[...]], "simplices": {"1": [...], "2": [...]} }
- 顶点为交错实坐标 (Re z1, Im z1, ..., Re z_{n+1}, Im z_{n+1})
- 索引从0开始；单形方向即元组顺序
- 字段级校验，错误位置通过 ValidationError.loc 报告
</rationale>
"""

from typing import Dict, List

from pydantic import BaseModel, Field, model_validator


class MeshFile(BaseModel):
    """网格JSON文件"""

    dim: int = Field(..., ge=1, le=2, description="流形维数 n")
    ambient_dim: int = Field(..., description="环境实维数 2n+2")
    vertices: List[List[float]] = Field(..., min_length=1, description="交错实坐标")
    simplices: Dict[str, List[List[int]]] = Field(..., description="按次数分组的有向单形")

    @model_validator(mode="after")
    def check_shapes(self) -> "MeshFile":
        if self.ambient_dim != 2 * self.dim + 2:
            raise ValueError(f"ambient_dim 必须为 {2 * self.dim + 2}")
        for idx, row in enumerate(self.vertices):
            if len(row) != self.ambient_dim:
                raise ValueError(f"vertices[{idx}] 长度应为 {self.ambient_dim}")
        for k in range(1, self.dim + 1):
            key = str(k)
            if key not in self.simplices:
                raise ValueError(f'simplices 缺少键 "{key}"')
            for idx, row in enumerate(self.simplices[key]):
                if len(row) != k + 1:
                    raise ValueError(f'simplices["{key}"][{idx}] 应含 {k + 1} 个顶点')
        extra = set(self.simplices) - {str(k) for k in range(1, self.dim + 1)}
        if extra:
            raise ValueError(f"simplices 含未知次数 {sorted(extra)}")
        return self
