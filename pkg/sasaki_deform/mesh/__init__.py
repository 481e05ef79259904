"""单纯复形、球面嵌入、细分、诱导度量与网格文件"""

from sasaki_deform.mesh.builders import (
    build_clifford_circle,
    build_clifford_torus,
    build_random_loop,
    build_round_circle,
)
from sasaki_deform.mesh.complex import Embedding, SimplicialComplex
from sasaki_deform.mesh.io import load_mesh, save_mesh
from sasaki_deform.mesh.metric import MetricData, flat_torus_metric, induced_metric
from sasaki_deform.mesh.refine import refine, refine_times

__all__ = [
    "Embedding",
    "MetricData",
    "SimplicialComplex",
    "build_clifford_circle",
    "build_clifford_torus",
    "build_random_loop",
    "build_round_circle",
    "flat_torus_metric",
    "induced_metric",
    "load_mesh",
    "refine",
    "refine_times",
    "save_mesh",
]
