"""
固定标架上的外代数

p-形式用它在标架 v_1..v_m 的递增指标组上的取值表示：{(i_1<…<i_p): 值}。
楔积按洗牌公式 (α∧β)_I = Σ_J sign(J, I∖J) α_J β_{I∖J}。
"""

from itertools import combinations
from typing import Callable, Dict, Sequence, Tuple

import numpy as np

from sasaki_deform.mesh.complex import permutation_sign

Components = Dict[Tuple[int, ...], complex]


def components(form: Callable[[np.ndarray], complex], frame: np.ndarray, degree: int) -> Components:
    """form 接收 (degree, N) 的向量组"""
    return {idx: complex(form(frame[list(idx)])) for idx in combinations(range(len(frame)), degree)}


def wedge(alpha: Components, p: int, beta: Components, q: int, size: int) -> Components:
    out: Components = {}
    for idx in combinations(range(size), p + q):
        total = 0j
        for left in combinations(idx, p):
            right = tuple(i for i in idx if i not in left)
            total += permutation_sign(left + right) * alpha[left] * beta[right]
        out[idx] = total
    return out


def scale(alpha: Components, factor: complex) -> Components:
    return {idx: factor * value for idx, value in alpha.items()}


def conjugate(alpha: Components) -> Components:
    return {idx: value.conjugate() for idx, value in alpha.items()}


def power(alpha: Components, p: int, times: int, size: int) -> Components:
    """α^{∧times}"""
    result: Components = {(): 1.0 + 0j}
    degree = 0
    for _ in range(times):
        result = wedge(result, degree, alpha, p, size)
        degree += p
    return result


def max_difference(alpha: Components, beta: Components) -> float:
    keys: Sequence[Tuple[int, ...]] = list(alpha)
    if not keys:
        return 0.0
    return float(max(abs(alpha[k] - beta[k]) for k in keys))


def max_abs(alpha: Components) -> float:
    return float(max((abs(v) for v in alpha.values()), default=0.0))
