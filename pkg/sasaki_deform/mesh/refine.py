"""中点细分：新顶点为弦中点再投影回单位球面"""

from typing import Tuple

import numpy as np

from sasaki_deform.mesh.complex import Embedding, SimplicialComplex, check_compatible


def refine(mesh: SimplicialComplex, embedding: Embedding) -> Tuple[SimplicialComplex, Embedding]:
    """
    一次中点细分

    曲线每条边一分为二；曲面每个三角形一分为四，(V,E,F) → (V+E, 2E+3F, 4F)。
    旧边 e 的中点编号为 V + e，子单形继承父单形方向。
    """
    check_compatible(mesh, embedding)
    n_vertices = mesh.n_vertices
    edges = mesh.edges
    mid = n_vertices + np.arange(len(edges))

    points = embedding.points
    midpoints = points[edges[:, 0]] + points[edges[:, 1]]
    midpoints /= np.linalg.norm(midpoints, axis=1, keepdims=True)
    new_points = np.concatenate([points, midpoints])

    split = np.concatenate(
        [np.stack([edges[:, 0], mid], 1), np.stack([mid, edges[:, 1]], 1)]
    )
    if mesh.dim == 1:
        child = SimplicialComplex.from_tables(1, len(new_points), {1: split})
        return child, embedding.moved(new_points)

    tri = mesh.top
    m_ab = np.array([n_vertices + mesh.index_of(1, (a, b)) for a, b, _ in tri])
    m_bc = np.array([n_vertices + mesh.index_of(1, (b, c)) for _, b, c in tri])
    m_ca = np.array([n_vertices + mesh.index_of(1, (c, a)) for a, _, c in tri])
    interior = np.concatenate(
        [np.stack([m_ab, m_bc], 1), np.stack([m_bc, m_ca], 1), np.stack([m_ca, m_ab], 1)]
    )
    triangles = np.concatenate(
        [
            np.stack([tri[:, 0], m_ab, m_ca], 1),
            np.stack([m_ab, tri[:, 1], m_bc], 1),
            np.stack([m_ca, m_bc, tri[:, 2]], 1),
            np.stack([m_ab, m_bc, m_ca], 1),
        ]
    )
    child = SimplicialComplex.from_tables(
        2, len(new_points), {1: np.concatenate([split, interior]), 2: triangles}
    )
    return child, embedding.moved(new_points)


def refine_times(
    mesh: SimplicialComplex, embedding: Embedding, times: int
) -> Tuple[SimplicialComplex, Embedding]:
    for _ in range(times):
        mesh, embedding = refine(mesh, embedding)
    return mesh, embedding
