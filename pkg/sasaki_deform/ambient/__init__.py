"""球面 S^{2n+1} 及其锥上的 Sasaki / 加权Calabi–Yau 结构"""

from sasaki_deform.ambient.identities import fd_order_study, identity_check
from sasaki_deform.ambient.structure import (
    AmbientStructure,
    ConeForm,
    c_const,
    cone_lift,
    d_homothety,
    reeb_flow,
)

__all__ = [
    "AmbientStructure",
    "ConeForm",
    "c_const",
    "cone_lift",
    "d_homothety",
    "fd_order_study",
    "identity_check",
    "reeb_flow",
]
