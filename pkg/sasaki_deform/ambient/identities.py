"""
结构恒等式的逐点残差

<rationale>
在均匀采样的球面点与随机标架上比较形式分量：
- 代数恒等式（η(ξ)=1、i_ξdη=0、ψ∧ω^T=0、ψ∧ψ̄=c_n(ω^T)ⁿ、锥体积恒等式、Euler缩并）
  残差应在机器精度量级
- 微分恒等式（dψ=κiη∧ψ、½dη=ω^T、L_{r∂r}Ω=κΩ）用中心差分，误差 O(h²)
外微分按常向量场公式 dφ(v_0..v_p) = Σ(−1)^j ∂_{v_j} φ(..v̂_j..) 计算。
</rationale>

<design-decision>
锥体积恒等式的残差除以 max(1, |右端|)：r ≠ 1 且 κ ≠ n+1 时右端含 r^{2(κ−n−1)}，
绝对残差会随之缩放。
</design-decision>
"""

import logging
from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from sasaki_deform.ambient import forms
from sasaki_deform.ambient.structure import (
    AmbientStructure,
    c_const,
    cone_lift,
    sample_sphere,
    tangent_frame,
)
from sasaki_deform.core.config import settings
from sasaki_deform.core.errors import ParameterError
from sasaki_deform.schemas.reports import IdentityReport, IdentityResidual

logger = logging.getLogger(__name__)

ALGEBRAIC_THRESHOLD = 1e-10
FD_THRESHOLD_FACTOR = 1e4
CONE_RADII = (0.5, 1.0, 2.0)
ORDER_STEPS = (1e-3, 5e-4, 2.5e-4)

ALGEBRAIC = (
    "eta_of_xi",
    "xi_contraction_domega",
    "psi_wedge_omega_T",
    "psi_wedge_psibar",
    "cone_volume",
    "cone_euler_contraction",
)
DIFFERENTIAL = ("d_psi", "d_eta", "cone_scaling")


def _directional(
    func: Callable[[np.ndarray], np.ndarray], x: np.ndarray, v: np.ndarray, h: float
) -> np.ndarray:
    return (func(x + h * v) - func(x - h * v)) / (2.0 * h)


def _psi_components(s: AmbientStructure, x: np.ndarray, frame: np.ndarray) -> forms.Components:
    return forms.components(lambda vs: s.eval_psi(x, vs), frame, s.n)


def _eta_components(s: AmbientStructure, x: np.ndarray, frame: np.ndarray) -> forms.Components:
    return {(i,): complex(s.eval_eta(x, frame[i])) for i in range(len(frame))}


def _omega_components(s: AmbientStructure, x: np.ndarray, frame: np.ndarray) -> forms.Components:
    return forms.components(lambda vs: s.eval_omega_T(x, vs[0], vs[1]), frame, 2)


def _fd_exterior(
    value: Callable[[np.ndarray, np.ndarray], complex],
    x: np.ndarray,
    frame: np.ndarray,
    degree: int,
    h: float,
) -> forms.Components:
    """由 p-形式 value(x, vectors) 的中心差分得到 (p+1)-形式分量"""
    out: forms.Components = {}
    for idx in combinations(range(len(frame)), degree + 1):
        total = 0j
        for j, pick in enumerate(idx):
            rest = frame[[i for i in idx if i != pick]]
            total += (-1) ** j * complex(
                _directional(lambda y: np.asarray(value(y, rest)), x, frame[pick], h)
            )
        out[idx] = total
    return out


def _sample_residuals(
    s: AmbientStructure,
    x: np.ndarray,
    rng: np.random.Generator,
    h: float,
    radii: Sequence[float],
) -> Dict[str, float]:
    n = s.n
    size = 2 * n + 1
    frame = tangent_frame(x, size, rng)
    psi = _psi_components(s, x, frame)
    eta = _eta_components(s, x, frame)
    omega = _omega_components(s, x, frame)
    xi = s.eval_xi(x)
    out: Dict[str, float] = {}

    out["eta_of_xi"] = abs(float(s.eval_eta(x, xi)) - 1.0)
    out["xi_contraction_domega"] = max(abs(float(s.eval_omega_T(x, xi, v))) for v in frame)

    psi_omega = forms.wedge(psi, n, omega, 2, size)
    out["psi_wedge_omega_T"] = forms.max_abs(psi_omega)

    lhs = forms.wedge(psi, n, forms.conjugate(psi), n, size)
    rhs = forms.scale(forms.power(omega, 2, n, size), c_const(n))
    out["psi_wedge_psibar"] = forms.max_difference(lhs, rhs)

    cone = cone_lift(s)
    full = 2 * n + 2
    omega_cone_n = n + 1
    worst_volume = 0.0
    worst_euler = 0.0
    for radius in radii:
        z = radius * x
        ambient = rng.standard_normal((full, n + 1)) + 1j * rng.standard_normal((full, n + 1))
        big = forms.components(lambda vs: cone(z, vs), ambient, omega_cone_n)
        wedge_big = forms.wedge(big, omega_cone_n, forms.conjugate(big), omega_cone_n, full)
        kahler = forms.components(lambda vs: s.eval_omega_cone(z, vs[0], vs[1]), ambient, 2)
        factor = radius ** (2.0 * (s.kappa - n - 1)) * c_const(n + 1)
        rhs_cone = forms.scale(forms.power(kahler, 2, n + 1, full), factor)
        scale_ref = max(1.0, forms.max_abs(rhs_cone))
        worst_volume = max(worst_volume, forms.max_difference(wedge_big, rhs_cone) / scale_ref)

        rest = ambient[:n]
        contracted = complex(cone(z, np.concatenate([z[None, :], rest], axis=0)))
        expected = radius**s.kappa * complex(s.eval_psi(z, rest))
        worst_euler = max(worst_euler, abs(contracted - expected) / max(1.0, abs(expected)))
    out["cone_volume"] = worst_volume
    out["cone_euler_contraction"] = worst_euler

    d_psi = _fd_exterior(lambda y, vs: s.eval_psi(y, vs), x, frame, n, h)
    target = forms.scale(forms.wedge(eta, 1, psi, n, size), 1j * s.kappa)
    out["d_psi"] = forms.max_difference(d_psi, target)

    d_eta = _fd_exterior(lambda y, vs: s.eval_eta(y, vs[0]), x, frame, 1, h)
    out["d_eta"] = forms.max_difference(forms.scale(d_eta, 0.5), omega)

    vectors = rng.standard_normal((n + 1, n + 1)) + 1j * rng.standard_normal((n + 1, n + 1))
    grow = np.exp(h)
    forward = complex(cone(grow * x, grow * vectors))
    backward = complex(cone(x / grow, vectors / grow))
    derivative = (forward - backward) / (2.0 * h)
    out["cone_scaling"] = abs(derivative - s.kappa * complex(cone(x, vectors)))
    return out


def identity_check(
    structure: AmbientStructure,
    samples: int = 100,
    seed: Optional[int] = None,
    fd_step: Optional[float] = None,
    radii: Sequence[float] = CONE_RADII,
) -> IdentityReport:
    """
    在 samples 个球面点上的最大残差

    Raises:
        ParameterError: samples ≤ 0 或 h ≤ 0
    """
    h = settings.FD_STEP if fd_step is None else fd_step
    seed = settings.SEED if seed is None else seed
    if samples <= 0:
        raise ParameterError(f"样本数必须为正: {samples}", samples=samples)
    if h <= 0:
        raise ParameterError(f"有限差分步长必须为正: {h}", fd_step=h)

    rng = np.random.default_rng(seed)
    points = sample_sphere(structure.n, samples, rng)
    worst: Dict[str, float] = {name: 0.0 for name in ALGEBRAIC + DIFFERENTIAL}
    for x in points:
        for name, value in _sample_residuals(structure, x, rng, h, radii).items():
            worst[name] = max(worst[name], value)

    residuals: List[IdentityResidual] = []
    for name in ALGEBRAIC:
        residuals.append(
            IdentityResidual(
                identity=name,
                max_residual=worst[name],
                samples=samples,
                threshold=ALGEBRAIC_THRESHOLD,
            )
        )
    for name in DIFFERENTIAL:
        residuals.append(
            IdentityResidual(
                identity=name,
                max_residual=worst[name],
                samples=samples,
                fd_step=h,
                expected_order=2,
                threshold=FD_THRESHOLD_FACTOR * h * h,
            )
        )
    report = IdentityReport(
        n=structure.n,
        kappa=structure.kappa,
        theta=structure.theta,
        scale=structure.scale,
        seed=seed,
        residuals=residuals,
    )
    logger.info(
        "identity_check n=%d kappa=%g: %s",
        structure.n,
        structure.kappa,
        "pass" if report.passed else "fail",
    )
    return report


def fd_order_study(
    structure: AmbientStructure,
    steps: Sequence[float] = ORDER_STEPS,
    samples: int = 20,
    seed: Optional[int] = None,
) -> Dict[str, List[float]]:
    """每个微分恒等式在逐次减半的 h 下的残差；相同种子保证样本一致"""
    table: Dict[str, List[float]] = {name: [] for name in DIFFERENTIAL}
    for h in steps:
        report = identity_check(structure, samples=samples, seed=seed, fd_step=h)
        for entry in report.residuals:
            if entry.identity in table:
                table[entry.identity].append(entry.max_residual)
    return table
