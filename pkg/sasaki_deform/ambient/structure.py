"""
球面 S^{2n+1} ⊂ ℂ^{n+1} 上的 Sasaki / 加权Calabi–Yau 结构

<rationale>
所有求值器使用沿 r∂/∂r 不变的环境延拓（L_{r∂r} = 0），因此可在球面外做有限差分：
- η̃_z(v) = a·Im(z̄·v)/r²            （r = 1 时即 ⟨Jx, v⟩ 乘以 a）
- ξ(z) = i z / a
- ½dη̃(u,v) = a[Im(ū·v)/r² − (Re(z̄u)Im(z̄v) − Re(z̄v)Im(z̄u))/r⁴]
- ψ̃_z(v₁..v_n) = e^{iθ} a^{n/2} det[z, v₁, …, v_n] / r^{n+1}
锥形式 Ω = (dr/r + iη)∧r^κψ，其中 (dr/r)(v) = Re(z̄v)/r²。
</rationale>

<design-decision>
为什么用尺度 a 而不是直接存 κ？
- 标准结构 (a = 1) 满足 dψ = (n+1)iη∧ψ
- D-同伦 η_a = aη, ψ_a = a^{n/2}ψ 给出 κ_a = κ/a
- 因此任意 κ > 0 的加权结构都是标准结构的 D-同伦，a₀ = (n+1)/κ，
  所有恒等式对每个正 κ 都可以逐点检验
- κ ≤ 0 只作为 X 上算子的参数出现，不在 M 上构造
</design-decision>

Related:
    - sasaki_deform/ambient/identities.py: 逐点恒等式残差
    - sasaki_deform/deform/pullback.py: 弦单形上的拉回求积
"""

import logging
from dataclasses import dataclass, replace
from math import factorial

import numpy as np

from sasaki_deform.core.errors import DomainError, ParameterError
from sasaki_deform.mesh.complex import Embedding

logger = logging.getLogger(__name__)

ORIGIN_TOL = 1e-12


def c_const(n: int) -> complex:
    """c_n = (1/n!)(−1)^{n(n−1)/2}(2/i)^n"""
    return complex((-1) ** (n * (n - 1) // 2) * (2.0 / 1j) ** n / factorial(n))


def _hermitian(z: np.ndarray, v: np.ndarray) -> np.ndarray:
    """z̄·v（末轴求和）"""
    return np.sum(np.conj(z) * v, axis=-1)


def _radius_sq(z: np.ndarray) -> np.ndarray:
    r2 = np.sum(np.abs(z) ** 2, axis=-1)
    if np.any(r2 < ORIGIN_TOL**2):
        raise DomainError("在原点附近求值", radius=float(np.sqrt(np.min(r2))))
    return r2


@dataclass(frozen=True)
class AmbientStructure:
    """
    S^{2n+1} 上的结构 (η, ξ, ω^T, ψ)，参数 (n, θ, a)

    Attributes:
        n: X 的维数（M 的维数为 2n+1）
        theta: 相位，ψ → e^{iθ}ψ
        scale: D-同伦参数 a（标准结构 a = 1）
    """

    n: int
    theta: float = 0.0
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ParameterError(f"n 必须 ≥ 1: {self.n}", n=self.n)
        if not np.isfinite(self.theta):
            raise ParameterError("θ 必须有限", theta=self.theta)
        if not self.scale > 0:
            raise ParameterError(f"尺度 a 必须为正: {self.scale}", scale=self.scale)

    # ========== 构造 ==========

    @classmethod
    def standard(cls, n: int, theta: float = 0.0) -> "AmbientStructure":
        """Sasaki–Einstein 结构，κ = n+1"""
        return cls(n=n, theta=theta)

    @classmethod
    def weighted(cls, n: int, kappa: float, theta: float = 0.0) -> "AmbientStructure":
        """权 κ > 0 的结构：标准结构的 D-同伦，a₀ = (n+1)/κ"""
        if not np.isfinite(kappa) or kappa <= 0:
            raise ParameterError(f"球面上只能构造 κ > 0 的结构: {kappa}", kappa=kappa)
        return cls(n=n, theta=theta, scale=(n + 1) / kappa)

    @property
    def kappa(self) -> float:
        return (self.n + 1) / self.scale

    def with_phase(self, theta: float) -> "AmbientStructure":
        return replace(self, theta=float(theta))

    def rotated(self, delta: float) -> "AmbientStructure":
        return replace(self, theta=float(self.theta + delta))

    # ========== 接触结构 ==========

    def eval_eta(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        return self.scale * np.imag(_hermitian(x, v)) / _radius_sq(x)

    def eval_eta_variation(self, x: np.ndarray, w: np.ndarray, v: np.ndarray) -> np.ndarray:
        """基点沿 w 移动时 η̃_x(v) 的方向导数（v 固定）"""
        x = np.asarray(x, dtype=np.complex128)
        r2 = _radius_sq(x)
        moved = np.imag(_hermitian(w, v)) / r2
        radial = np.imag(_hermitian(x, v)) * 2.0 * np.real(_hermitian(x, w)) / r2**2
        return self.scale * (moved - radial)

    def eval_xi(self, x: np.ndarray) -> np.ndarray:
        return 1j * np.asarray(x, dtype=np.complex128) / self.scale

    def eval_dr(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        """dr/r"""
        x = np.asarray(x, dtype=np.complex128)
        return np.real(_hermitian(x, v)) / _radius_sq(x)

    def eval_omega_T(self, x: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """ω^T = ½dη̃"""
        x = np.asarray(x, dtype=np.complex128)
        r2 = _radius_sq(x)
        xu = _hermitian(x, u)
        xv = _hermitian(x, v)
        flat = np.imag(_hermitian(u, v))
        radial = np.real(xu) * np.imag(xv) - np.real(xv) * np.imag(xu)
        return self.scale * (flat / r2 - radial / r2**2)

    # ========== 横截 (n,0)-形式 ==========

    def eval_psi(self, x: np.ndarray, vectors: np.ndarray) -> np.ndarray:
        """
        ψ̃_x(v₁..v_n)

        Args:
            x: (..., n+1) 复坐标
            vectors: (..., n, n+1)
        """
        x = np.asarray(x, dtype=np.complex128)
        vectors = np.asarray(vectors, dtype=np.complex128)
        if vectors.shape[-2:] != (self.n, self.n + 1):
            raise ParameterError(
                f"ψ 需要 {self.n} 个 ℂ^{self.n + 1} 向量", shape=list(vectors.shape)
            )
        r2 = _radius_sq(x)
        lead = np.broadcast_shapes(x.shape[:-1], vectors.shape[:-2])
        base = np.broadcast_to(x[..., None, :], lead + (1, self.n + 1))
        columns = np.concatenate([base, np.broadcast_to(vectors, lead + vectors.shape[-2:])], axis=-2)
        det = np.linalg.det(columns)
        factor = np.exp(1j * self.theta) * self.scale ** (self.n / 2.0)
        return factor * det / r2 ** ((self.n + 1) / 2.0)

    def eval_psi_normalized(self, x: np.ndarray, vectors: np.ndarray) -> np.ndarray:
        """去掉 a^{n/2} 因子的 ψ，用于相位提取"""
        return self.eval_psi(x, vectors) / self.scale ** (self.n / 2.0)

    # ========== 锥 ==========

    def eval_omega_cone(self, z: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """锥Kähler形式 ω = ½d(r²η) = a·Im(ū·v)"""
        _radius_sq(np.asarray(z, dtype=np.complex128))
        return self.scale * np.imag(_hermitian(u, v))

    def reeb_flow(self, embedding: Embedding, t: float) -> Embedding:
        return reeb_flow(embedding, t, scale=self.scale)


class ConeForm:
    """锥上的全纯体积形式 Ω = (dr/r + iη)∧r^κψ"""

    def __init__(self, structure: AmbientStructure) -> None:
        self.structure = structure
        self.kappa = structure.kappa
        self.degree = structure.n + 1

    def __call__(self, z: np.ndarray, vectors: np.ndarray) -> np.ndarray:
        """
        Args:
            z: (..., n+1)
            vectors: (..., n+1, n+1)，n+1 个切向量
        """
        s = self.structure
        z = np.asarray(z, dtype=np.complex128)
        vectors = np.asarray(vectors, dtype=np.complex128)
        r2 = _radius_sq(z)
        weight = r2 ** (self.kappa / 2.0)
        lead = np.broadcast_shapes(z.shape[:-1], vectors.shape[:-2])
        total = np.zeros(lead, dtype=np.complex128)
        for i in range(self.degree):
            vi = vectors[..., i, :]
            rest = np.delete(vectors, i, axis=-2)
            radial = s.eval_dr(z, vi) + 1j * s.eval_eta(z, vi)
            total = total + (-1) ** i * radial * weight * s.eval_psi(z, rest)
        return total


def cone_lift(structure: AmbientStructure) -> ConeForm:
    return ConeForm(structure)


def d_homothety(structure: AmbientStructure, a: float) -> AmbientStructure:
    """η_a = aη, ξ_a = ξ/a, ψ_a = a^{n/2}ψ，κ_a = κ/a"""
    if not np.isfinite(a) or a <= 0:
        raise ParameterError(f"D-同伦参数必须为正: {a}", a=a)
    transformed = replace(structure, scale=structure.scale * a)
    logger.debug("D-homothety a=%g: kappa %g -> %g", a, structure.kappa, transformed.kappa)
    return transformed


def reeb_flow(embedding: Embedding, t: float, scale: float = 1.0) -> Embedding:
    """沿 ξ = ix/a 的流：x ↦ e^{it/a}x"""
    return embedding.moved(np.exp(1j * t / scale) * embedding.points)


def sample_sphere(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """S^{2n+1} 上的均匀样本 (count, n+1)"""
    raw = rng.standard_normal((count, n + 1)) + 1j * rng.standard_normal((count, n + 1))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def tangent_frame(x: np.ndarray, size: int, rng: np.random.Generator) -> np.ndarray:
    """x ∈ S^{2n+1} 处 size 个随机切向量，(size, n+1)"""
    raw = rng.standard_normal((size, x.shape[-1])) + 1j * rng.standard_normal((size, x.shape[-1]))
    return raw - np.real(raw @ np.conj(x))[:, None] * x[None, :]
