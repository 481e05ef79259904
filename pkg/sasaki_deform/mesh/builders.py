"""
内置网格构造器

<rationale>
- Clifford圆 t ↦ (e^{it}, e^{−it})/√2 ⊂ S³：大圆，弦精确Legendre
- Clifford环面 (θ₁,θ₂) ↦ (e^{iθ₁}, e^{iθ₂}, e^{−i(θ₁+θ₂)})/√3 ⊂ S⁵：
  每个网格方块沿反对角线切分，所有弦边精确Legendre
- 对照网格：大2-球面内的小圆（非极小）、随机光滑闭曲线（非Legendre）
</rationale>
"""

from typing import Tuple

import numpy as np

from sasaki_deform.core.errors import InvalidMeshError
from sasaki_deform.mesh.complex import Embedding, SimplicialComplex


def _loop_edges(segments: int) -> np.ndarray:
    idx = np.arange(segments)
    return np.stack([idx, (idx + 1) % segments], axis=1)


def build_clifford_circle(segments: int) -> Tuple[SimplicialComplex, Embedding]:
    """Clifford圆的等参数多边形（segments ≥ 3）"""
    if segments < 3:
        raise InvalidMeshError(f"圆至少需要3段，收到 {segments}", segments=segments)
    t = 2.0 * np.pi * np.arange(segments) / segments
    points = np.stack([np.exp(1j * t), np.exp(-1j * t)], axis=1) / np.sqrt(2.0)
    mesh = SimplicialComplex.from_tables(1, segments, {1: _loop_edges(segments)})
    return mesh, Embedding(points=points)


def build_clifford_torus(n1: int, n2: int) -> Tuple[SimplicialComplex, Embedding]:
    """
    Clifford环面的 n1×n2 三角剖分

    顶点 (i,j) ↦ 编号 i·n2 + j；三角形 [(i,j),(i+1,j),(i,j+1)] 与
    [(i+1,j),(i+1,j+1),(i,j+1)]，两类在网格坐标下都是正定向。
    """
    if n1 < 3 or n2 < 3:
        raise InvalidMeshError(f"环面网格至少 3×3，收到 {n1}×{n2}", n1=n1, n2=n2)
    ii, jj = np.meshgrid(np.arange(n1), np.arange(n2), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    t1 = 2.0 * np.pi * ii / n1
    t2 = 2.0 * np.pi * jj / n2
    points = np.stack([np.exp(1j * t1), np.exp(1j * t2), np.exp(-1j * (t1 + t2))], axis=1)
    points /= np.sqrt(3.0)

    ip = (ii + 1) % n1
    jp = (jj + 1) % n2
    v00 = ii * n2 + jj
    v10 = ip * n2 + jj
    v01 = ii * n2 + jp
    v11 = ip * n2 + jp
    edges = np.concatenate(
        [np.stack([v00, v10], 1), np.stack([v00, v01], 1), np.stack([v10, v01], 1)]
    )
    triangles = np.concatenate([np.stack([v00, v10, v01], 1), np.stack([v10, v11, v01], 1)])
    mesh = SimplicialComplex.from_tables(2, n1 * n2, {1: edges, 2: triangles})
    return mesh, Embedding(points=points)


def build_round_circle(segments: int, polar_angle: float) -> Tuple[SimplicialComplex, Embedding]:
    """纬圆 (cos φ, sin φ·e^{it})：φ ≠ π/2 时不是测地线"""
    if segments < 3:
        raise InvalidMeshError(f"圆至少需要3段，收到 {segments}", segments=segments)
    t = 2.0 * np.pi * np.arange(segments) / segments
    points = np.stack(
        [np.full(segments, np.cos(polar_angle), dtype=np.complex128),
         np.sin(polar_angle) * np.exp(1j * t)],
        axis=1,
    )
    mesh = SimplicialComplex.from_tables(1, segments, {1: _loop_edges(segments)})
    return mesh, Embedding(points=points)


def build_random_loop(
    segments: int, seed: int, modes: int = 3
) -> Tuple[SimplicialComplex, Embedding]:
    """低频随机Fourier闭曲线，投影到 S³"""
    if segments < 3:
        raise InvalidMeshError(f"圆至少需要3段，收到 {segments}", segments=segments)
    rng = np.random.default_rng(seed)
    t = 2.0 * np.pi * np.arange(segments) / segments
    curve = np.zeros((segments, 2), dtype=np.complex128)
    curve += rng.standard_normal(2) + 1j * rng.standard_normal(2)
    for m in range(1, modes + 1):
        a = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        curve += (np.outer(np.cos(m * t), a) + np.outer(np.sin(m * t), b)) / m
    curve /= np.linalg.norm(curve, axis=1, keepdims=True)
    mesh = SimplicialComplex.from_tables(1, segments, {1: _loop_edges(segments)})
    return mesh, Embedding(points=curve)
