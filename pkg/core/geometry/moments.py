"""
矩域上的 Lebesgue 矩（闭式公式）
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from ..algebra.polynomial import Exponent, basis_index, monomial_basis
from .domain import AnnulusDomain, BallDomain, BoxDomain, MomentDomain


@dataclass(frozen=True, eq=False)
class MomentVector:
    """按 monomial_basis(dim, max_degree) 索引的矩向量"""

    dim: int
    max_degree: int
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        expected = math.comb(self.dim + self.max_degree, self.dim)
        if values.shape != (expected,):
            raise ValueError(f"矩向量长度 {values.shape} 与期望 {expected} 不一致")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def basis(self) -> tuple[Exponent, ...]:
        return monomial_basis(self.dim, self.max_degree)

    @property
    def volume(self) -> float:
        return float(self.values[0])

    def value(self, exponent: Exponent) -> float:
        return float(self.values[basis_index(self.dim, self.max_degree)[tuple(exponent)]])

    def truncate(self, max_degree: int) -> MomentVector:
        """前缀截断：低次基底是高次基底的前缀"""
        if max_degree > self.max_degree:
            raise ValueError(f"无法把 {self.max_degree} 阶矩扩展到 {max_degree} 阶")
        length = math.comb(self.dim + max_degree, self.dim)
        return MomentVector(self.dim, max_degree, self.values[:length].copy())


def _box_moment(lower: Sequence[float], upper: Sequence[float], exponent: Exponent) -> float:
    return math.prod(
        (hi ** (a + 1) - lo ** (a + 1)) / (a + 1)
        for lo, hi, a in zip(lower, upper, exponent)
    )


@lru_cache(maxsize=4096)
def _unit_ball_moment(exponent: Exponent) -> float:
    """中心在原点的单位球矩；任一分量为奇数时恰为 0"""
    if any(a % 2 for a in exponent):
        return 0.0
    n = len(exponent)
    total = sum(exponent)
    log_value = sum(math.lgamma((a + 1) / 2) for a in exponent) - math.lgamma(
        (total + n) / 2 + 1
    )
    return math.exp(log_value)


def _centered_ball_moment(radius: float, exponent: Exponent) -> float:
    base = _unit_ball_moment(exponent)
    if base == 0.0:
        return 0.0
    return radius ** (sum(exponent) + len(exponent)) * base


def _ball_moment(center: Sequence[float], radius: float, exponent: Exponent) -> float:
    """偏心球：x = c + y，对 (c_i + y_i)^{a_i} 做二项展开"""
    if not any(center):
        return _centered_ball_moment(radius, exponent)
    total = 0.0
    for shifted in product(*(range(a + 1) for a in exponent)):
        if any(b % 2 for b in shifted):
            continue
        weight = math.prod(
            math.comb(a, b) * c ** (a - b) for a, b, c in zip(exponent, shifted, center)
        )
        if weight:
            total += weight * _centered_ball_moment(radius, shifted)
    return total


def moment(domain: MomentDomain, exponent: Exponent) -> float:
    """单个单项式 x^a 在矩域上的积分"""
    exponent = tuple(exponent)
    if isinstance(domain, BoxDomain):
        return _box_moment(domain.lower, domain.upper, exponent)
    if isinstance(domain, BallDomain):
        return _ball_moment(domain.center, domain.radius, exponent)
    if isinstance(domain, AnnulusDomain):
        return _ball_moment(domain.center, domain.outer_radius, exponent) - _ball_moment(
            domain.center, domain.inner_radius, exponent
        )
    raise TypeError(f"不支持的矩域类型: {type(domain).__name__}")


def lebesgue_moments(domain: MomentDomain, max_degree: int) -> MomentVector:
    """次数不超过 max_degree 的全部 Lebesgue 矩，按分次字典序排列"""
    if max_degree < 0:
        raise ValueError(f"次数必须 ≥ 0，当前为 {max_degree}")
    basis = monomial_basis(domain.dim, max_degree)
    values = np.array([moment(domain, exponent) for exponent in basis])
    return MomentVector(domain.dim, max_degree, values)
