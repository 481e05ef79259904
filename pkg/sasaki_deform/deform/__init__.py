"""子流形分类、法丛识别、线性化算子、模空间与 Newton–Green 延拓"""

from sasaki_deform.deform.classify import calibrated, classify, phase_extract
from sasaki_deform.deform.continuation import DeformationPath, continuation
from sasaki_deform.deform.curvature import check_phase_curvature_relation, mean_curvature
from sasaki_deform.deform.linearization import convergence_table, linearization_ratios
from sasaki_deform.deform.moduli import ModuliTangent, image_defect, moduli_tangent
from sasaki_deform.deform.newton import newton_green_correct
from sasaki_deform.deform.normal import (
    NormalField,
    exp_deform,
    identification_inverse,
    normal_frames,
    normal_identification,
    random_normal_field,
)
from sasaki_deform.deform.operators import BlockOperator, assemble_operator
from sasaki_deform.deform.pullback import KINDS, PullbackResidual, pullback, residual_map

__all__ = [
    "KINDS",
    "BlockOperator",
    "DeformationPath",
    "ModuliTangent",
    "NormalField",
    "PullbackResidual",
    "assemble_operator",
    "calibrated",
    "check_phase_curvature_relation",
    "classify",
    "continuation",
    "convergence_table",
    "exp_deform",
    "identification_inverse",
    "image_defect",
    "linearization_ratios",
    "mean_curvature",
    "moduli_tangent",
    "newton_green_correct",
    "normal_frames",
    "normal_identification",
    "phase_extract",
    "pullback",
    "random_normal_field",
    "residual_map",
]
