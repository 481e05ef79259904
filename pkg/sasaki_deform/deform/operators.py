"""
线性化形变算子的分块组装

<rationale>
每个块存两种形式：
- weak: M_out·A（对称性、核、Newton 都在弱形式上做）
- strong: A 本身；含 M⁻¹ 的块（d*）没有稀疏强形式，记为 None
伴随按星内积取：D* = M_in⁻¹ Wᵀ，
P₁ 的弱形式 W₁ᵀ M_out⁻¹ W₁，P₂ 的弱形式 W₁ M_in⁻¹ W₁ᵀ + W₂ᵀ M⁻¹ W₂。
</rationale>

<design-decision>
为什么 minimal_legendrian 用 Sandwich 块？
- d(d*α) = d₀ M₀⁻¹ d₀ᵀ M₁ α，M₀⁻¹ 是稠密的
- 只在需要时（稠密核计算）物化；迭代路径按矩阵向量积作用
</design-decision>

<warning>
次数 > n 的块直接丢弃：n = 1 时没有 Λ² 行，nx_complex 退化为 d*α + κf。
</warning>

Related:
    - deform/moduli.py: 核维数与预测比较
    - deform/newton.py: Green 算子（P₂ 的伪逆）
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from sasaki_deform.core.errors import ParameterError
from sasaki_deform.dec.operators import FormOperators
from sasaki_deform.deform.pullback import KINDS

logger = logging.getLogger(__name__)

Key = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class Sandwich:
    """left · M_k⁻¹ · right"""

    left: sp.csr_matrix
    degree: int
    right: sp.csr_matrix
    ops: FormOperators

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.left.shape[0], self.right.shape[1])

    def dot(self, x: np.ndarray) -> np.ndarray:
        return self.left @ self.ops.mass_solve(self.degree, self.right @ x)

    def rdot(self, y: np.ndarray) -> np.ndarray:
        """Sandwichᵀ y（质量矩阵对称）"""
        return self.right.T @ self.ops.mass_solve(self.degree, self.left.T @ y)

    def toarray(self) -> np.ndarray:
        return np.asarray(self.left @ self.ops.mass_solve(self.degree, self.right.toarray()))


Matrix = Union[sp.csr_matrix, Sandwich]


@dataclass(frozen=True, eq=False)
class Block:
    weak: Matrix
    strong: Optional[sp.csr_matrix] = None

    def dot(self, x: np.ndarray) -> np.ndarray:
        if isinstance(self.weak, Sandwich):
            return self.weak.dot(x)
        return self.weak @ x

    def rdot(self, y: np.ndarray) -> np.ndarray:
        if isinstance(self.weak, Sandwich):
            return self.weak.rdot(y)
        return self.weak.T @ y

    def dense(self) -> np.ndarray:
        return self.weak.toarray()


def _offsets(sizes: Sequence[int]) -> np.ndarray:
    return np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)


@dataclass(eq=False)
class BlockOperator:
    """
    D₁: ⊕ Λ^domain → ⊕ Λ^codomain，D₂: ⊕ Λ^codomain → ⊕ Λ^d2_codomain

    Attributes:
        d1 / d2: 以 (行位置, 列位置) 为键的块，缺失即为零块
    """

    kind: str
    kappa: float
    ops: FormOperators
    domain: Tuple[int, ...]
    codomain: Tuple[int, ...]
    d1: Dict[Key, Block]
    d2_codomain: Tuple[int, ...] = ()
    d2: Dict[Key, Block] = field(default_factory=dict)

    # ========== 空间 ==========

    def sizes(self, degrees: Sequence[int]) -> List[int]:
        return [self.ops.size(k) for k in degrees]

    @property
    def n_in(self) -> int:
        return sum(self.sizes(self.domain))

    @property
    def n_out(self) -> int:
        return sum(self.sizes(self.codomain))

    def mass(self, degrees: Sequence[int]) -> sp.csr_matrix:
        if not degrees:
            return sp.csr_matrix((0, 0))
        return sp.block_diag([self.ops.star[k] for k in degrees], format="csr")

    @property
    def mass_in(self) -> sp.csr_matrix:
        return self.mass(self.domain)

    @property
    def mass_out(self) -> sp.csr_matrix:
        return self.mass(self.codomain)

    def split(self, x: np.ndarray, degrees: Sequence[int]) -> List[np.ndarray]:
        cuts = _offsets(self.sizes(degrees))
        return [x[cuts[i] : cuts[i + 1]] for i in range(len(degrees))]

    def solve_mass(self, degrees: Sequence[int], w: np.ndarray) -> np.ndarray:
        """blockdiag(M)⁻¹ w，w 可以是向量或矩阵"""
        parts = [self.ops.mass_solve(k, part) for k, part in zip(degrees, self.split(w, degrees))]
        return np.concatenate(parts, axis=0) if parts else np.zeros_like(w)

    @property
    def has_sandwich(self) -> bool:
        return any(isinstance(b.weak, Sandwich) for b in self.d1.values())

    # ========== 矩阵 ==========

    def _stack(
        self,
        blocks: Dict[Key, Block],
        rows: Sequence[int],
        cols: Sequence[int],
        dense: bool,
    ) -> Union[sp.csr_matrix, np.ndarray]:
        row_sizes, col_sizes = self.sizes(rows), self.sizes(cols)
        if dense or any(isinstance(b.weak, Sandwich) for b in blocks.values()):
            r_off, c_off = _offsets(row_sizes), _offsets(col_sizes)
            out = np.zeros((r_off[-1], c_off[-1]))
            for (i, j), block in blocks.items():
                out[r_off[i] : r_off[i + 1], c_off[j] : c_off[j + 1]] = block.dense()
            return out
        grid = [
            [
                blocks[i, j].weak if (i, j) in blocks else sp.csr_matrix((r_size, c_size))
                for j, c_size in enumerate(col_sizes)
            ]
            for i, r_size in enumerate(row_sizes)
        ]
        return sp.bmat(grid, format="csr")

    def weak1(self, dense: bool = False) -> Union[sp.csr_matrix, np.ndarray]:
        """W₁ = M_out·D₁"""
        return self._stack(self.d1, self.codomain, self.domain, dense)

    def weak2(self, dense: bool = False) -> Union[sp.csr_matrix, np.ndarray]:
        return self._stack(self.d2, self.d2_codomain, self.codomain, dense)

    def strong1(self) -> np.ndarray:
        """D₁ 的稠密强形式"""
        return self.solve_mass(self.codomain, np.asarray(self.weak1(dense=True)))

    def p1(self) -> np.ndarray:
        """P₁ = D₁*D₁ 的弱形式（稠密）"""
        w1 = np.asarray(self.weak1(dense=True))
        return w1.T @ self.solve_mass(self.codomain, w1)

    def p2(self) -> np.ndarray:
        """P₂ = D₁D₁* + D₂*D₂ 的弱形式（稠密）"""
        w1 = np.asarray(self.weak1(dense=True))
        out = w1 @ self.solve_mass(self.domain, w1.T)
        if self.d2:
            w2 = np.asarray(self.weak2(dense=True))
            out = out + w2.T @ self.solve_mass(self.d2_codomain, w2)
        return out

    # ========== 作用 ==========

    def _apply(
        self, blocks: Dict[Key, Block], rows: Sequence[int], cols: Sequence[int], x: np.ndarray
    ) -> np.ndarray:
        parts = self.split(x, cols)
        out = [np.zeros(s) for s in self.sizes(rows)]
        for (i, j), block in blocks.items():
            out[i] = out[i] + block.dot(parts[j])
        return np.concatenate(out) if out else np.zeros(0)

    def _apply_t(
        self, blocks: Dict[Key, Block], rows: Sequence[int], cols: Sequence[int], y: np.ndarray
    ) -> np.ndarray:
        parts = self.split(y, rows)
        out = [np.zeros(s) for s in self.sizes(cols)]
        for (i, j), block in blocks.items():
            out[j] = out[j] + block.rdot(parts[i])
        return np.concatenate(out) if out else np.zeros(0)

    def weak_apply1(self, x: np.ndarray) -> np.ndarray:
        return self._apply(self.d1, self.codomain, self.domain, x)

    def weak_apply1_t(self, y: np.ndarray) -> np.ndarray:
        return self._apply_t(self.d1, self.codomain, self.domain, y)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """D₁x"""
        return self.solve_mass(self.codomain, self.weak_apply1(np.asarray(x, dtype=np.float64)))

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        """D₁*y = M_in⁻¹ W₁ᵀ y（W₁ = M_out·D₁ 已含输出质量）"""
        y = np.asarray(y, dtype=np.float64)
        return self.solve_mass(self.domain, self.weak_apply1_t(y))

    def apply_p2_weak(self, y: np.ndarray) -> np.ndarray:
        out = self.weak_apply1(self.solve_mass(self.domain, self.weak_apply1_t(y)))
        if self.d2:
            w2y = self._apply(self.d2, self.d2_codomain, self.codomain, y)
            out = out + self._apply_t(
                self.d2, self.d2_codomain, self.codomain, self.solve_mass(self.d2_codomain, w2y)
            )
        return out

    # ========== 检查 ==========

    def _strong(self, block: Block, out_degree: int) -> Union[np.ndarray, sp.spmatrix]:
        if block.strong is not None:
            return block.strong
        return self.ops.mass_solve(out_degree, block.dense())

    def complex_defect(self) -> float:
        """max |D₂D₁|（强形式逐块相乘）；没有 D₂ 时为 0"""
        if not self.d2:
            return 0.0
        totals: Dict[Key, Union[np.ndarray, sp.spmatrix]] = {}
        for (r, m), second in self.d2.items():
            for (m1, c), first in self.d1.items():
                if m1 != m:
                    continue
                left = self._strong(second, self.d2_codomain[r])
                term = left @ self._strong(first, self.codomain[m])
                totals[r, c] = term if (r, c) not in totals else totals[r, c] + term
        return max((_max_abs(t) for t in totals.values()), default=0.0)

    def symmetry_defect(self) -> float:
        """max |W₁ − W₁ᵀ| / max |W₁|（仅当定义域与值域相同）"""
        if self.domain != self.codomain:
            raise ParameterError(f"{self.kind} 的定义域与值域不同", kind=self.kind)
        w1 = np.asarray(self.weak1(dense=True))
        return float(np.max(np.abs(w1 - w1.T)) / max(np.max(np.abs(w1)), np.finfo(float).tiny))


def _max_abs(matrix: Union[np.ndarray, sp.spmatrix]) -> float:
    if sp.issparse(matrix):
        data = matrix.tocsr().data
        return float(np.max(np.abs(data))) if data.size else 0.0
    return float(np.max(np.abs(matrix))) if np.size(matrix) else 0.0


# ========== 组装 ==========

def assemble_operator(kind: str, ops: FormOperators, kappa: float) -> BlockOperator:
    """
    组装 kind 对应的 D₁（以及有复形结构时的 D₂）

    Raises:
        ParameterError: 未知 kind 或 κ 非有限
    """
    if kind not in KINDS:
        raise ParameterError(f"未知算子种类: {kind}", kind=kind, known=list(KINDS))
    if not np.isfinite(kappa):
        raise ParameterError(f"κ 必须有限: {kappa}", kappa=kappa)
    kappa = float(kappa)
    surface = ops.dim >= 2
    m, d = ops.star, ops.d

    def eye(k: int) -> sp.csr_matrix:
        return sp.identity(ops.size(k), format="csr")

    def codiff_weak() -> Block:
        return Block((d[0].T @ m[1]).tocsr())

    def grad() -> Block:
        return Block((m[1] @ d[0]).tocsr(), d[0])

    def double(k: int) -> Block:
        return Block((2.0 * m[k]).tocsr(), 2.0 * eye(k))

    def curl() -> Block:
        return Block((m[2] @ d[1]).tocsr(), d[1])

    def shift(k: int) -> Block:
        return Block((kappa * m[k]).tocsr(), kappa * eye(k))

    d1: Dict[Key, Block] = {}
    d2: Dict[Key, Block] = {}
    d2_codomain: Tuple[int, ...] = ()

    if kind == "special_legendrian":
        domain, codomain = (0, 1), (0, 1)
        d1[0, 0], d1[0, 1], d1[1, 0], d1[1, 1] = shift(0), codiff_weak(), grad(), double(1)
    elif kind == "nx_complex":
        domain, codomain = (0, 1), ((0, 2) if surface else (0,))
        d1[0, 0], d1[0, 1] = shift(0), codiff_weak()
        if surface:
            d1[1, 1] = curl()
    elif kind == "legendrian_complex":
        domain, codomain = (0, 1), ((1, 2) if surface else (1,))
        d1[0, 0], d1[0, 1] = grad(), double(1)
        if surface:
            d1[1, 1] = curl()
            d2_codomain = (2,)
            d2[0, 0] = curl()
            d2[0, 1] = Block((-2.0 * m[2]).tocsr(), -2.0 * eye(2))
    elif kind == "transverse":
        domain, codomain = (1,), ((0, 2) if surface else (0,))
        d1[0, 0] = codiff_weak()
        if surface:
            d1[1, 0] = curl()
    elif kind == "contact_cy":
        domain, codomain = (0, 1), ((0, 1, 2) if surface else (0, 1))
        # κ = 0 情形：没有 κf 平移块
        d1[0, 1], d1[1, 0], d1[1, 1] = codiff_weak(), grad(), double(1)
        if surface:
            d1[2, 1] = curl()
            d2_codomain = (2,)
            d2[0, 1] = curl()
            d2[0, 2] = Block((-2.0 * m[2]).tocsr(), -2.0 * eye(2))
    else:
        domain, codomain = (0, 1), (1, 1)
        gradient = (m[1] @ d[0]).tocsr()
        d1[0, 0] = Block((kappa * gradient).tocsr(), kappa * d[0])
        d1[0, 1] = Block(Sandwich(gradient, 0, (d[0].T @ m[1]).tocsr(), ops))
        d1[1, 0], d1[1, 1] = grad(), double(1)

    operator = BlockOperator(
        kind=kind,
        kappa=kappa,
        ops=ops,
        domain=domain,
        codomain=codomain,
        d1=d1,
        d2_codomain=d2_codomain,
        d2=d2,
    )
    logger.debug(
        "assembled %s: Λ%s → Λ%s (%d×%d), D₂ %s",
        kind,
        domain,
        codomain,
        operator.n_out,
        operator.n_in,
        "present" if d2 else "empty",
    )
    return operator
