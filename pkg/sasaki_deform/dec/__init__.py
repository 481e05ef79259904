"""离散外微分：余链、Whitney质量矩阵、Hodge分解与谱求解"""

from sasaki_deform.dec.hodge import HodgeParts, hodge_decompose
from sasaki_deform.dec.kernel import KernelResult, kernel_dim
from sasaki_deform.dec.operators import Cochain, FormOperators, assemble_operators
from sasaki_deform.dec.spectra import EigenCluster, eigen_cluster, harmonic_basis

__all__ = [
    "Cochain",
    "EigenCluster",
    "FormOperators",
    "HodgeParts",
    "KernelResult",
    "assemble_operators",
    "eigen_cluster",
    "harmonic_basis",
    "hodge_decompose",
    "kernel_dim",
]
