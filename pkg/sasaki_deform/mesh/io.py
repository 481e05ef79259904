"""
网格JSON序列化

<rationale>
- 通过 MeshFile 校验结构，ValidationError/JSONDecodeError 统一转换为 MeshParseError
- 浮点数按最短可往返表示写出，保存后再读取逐位一致
- 球面容差在构造 Embedding 时检查（InvalidMeshError）
</rationale>
"""

import json
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from pydantic import ValidationError

from sasaki_deform.core.config import settings
from sasaki_deform.core.errors import MeshParseError
from sasaki_deform.mesh.complex import (
    Embedding,
    SimplicialComplex,
    check_compatible,
    to_complex,
    to_real,
)
from sasaki_deform.schemas.mesh import MeshFile


def to_mesh_file(mesh: SimplicialComplex, embedding: Embedding) -> MeshFile:
    check_compatible(mesh, embedding)
    # + 0.0 把 −0.0 写成 0.0，复数重建时虚部的符号零不保留
    vertices = to_real(embedding.points) + 0.0
    return MeshFile(
        dim=mesh.dim,
        ambient_dim=embedding.ambient_dim,
        vertices=vertices.tolist(),
        simplices={str(k): mesh.simplices[k].tolist() for k in range(1, mesh.dim + 1)},
    )


def dumps(mesh: SimplicialComplex, embedding: Embedding) -> str:
    return to_mesh_file(mesh, embedding).model_dump_json(indent=2)


def loads(
    text: str, sphere_tol: float = settings.SPHERE_TOL
) -> Tuple[SimplicialComplex, Embedding]:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MeshParseError(
            f"网格文件不是合法JSON: {exc.msg}", line=exc.lineno, column=exc.colno
        ) from exc
    try:
        parsed = MeshFile.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or "<root>"
        raise MeshParseError(f"网格文件字段错误 {field}: {first['msg']}", field=field) from exc

    coords = np.array(parsed.vertices, dtype=np.float64)
    tables = {k: np.array(parsed.simplices[str(k)], dtype=np.int64) for k in range(1, parsed.dim + 1)}
    mesh = SimplicialComplex.from_tables(parsed.dim, len(coords), tables)
    return mesh, Embedding(points=to_complex(coords), sphere_tol=sphere_tol)


def save_mesh(mesh: SimplicialComplex, embedding: Embedding, path: Union[str, Path]) -> Path:
    target = Path(path)
    target.write_text(dumps(mesh, embedding), encoding="utf-8")
    return target


def load_mesh(
    path: Union[str, Path], sphere_tol: float = settings.SPHERE_TOL
) -> Tuple[SimplicialComplex, Embedding]:
    return loads(Path(path).read_text(encoding="utf-8"), sphere_tol=sphere_tol)
