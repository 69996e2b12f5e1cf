"""
稀疏多元多项式
系数统一使用 64 位浮点，项按分次字典序（先总次数，再按字典序，x1 优先）排列。
规范形式只丢弃恰好为 0 的系数，不做任何阈值裁剪。
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Mapping, Sequence
from functools import lru_cache
from itertools import combinations_with_replacement
from types import MappingProxyType
from typing import Literal

import numpy as np

from ...models.errors import DimensionMismatchError

Exponent = tuple[int, ...]

# 向量化求值时的分块大小，避免 N×T 单项式矩阵过大
_EVAL_CHUNK = 8192


def _power(value: float, power: int) -> float:
    """value**power；溢出时返回带符号的 inf，与 numpy 的浮点语义一致"""
    try:
        return value**power
    except OverflowError:
        return math.copysign(math.inf, value) if power % 2 else math.inf


def graded_lex_key(exponent: Exponent) -> tuple[int, tuple[int, ...]]:
    """分次字典序排序键：总次数升序，同次数内 x1 次数高者在前"""
    return sum(exponent), tuple(-a for a in exponent)


@lru_cache(maxsize=256)
def monomial_basis(dim: int, max_degree: int) -> tuple[Exponent, ...]:
    """
    生成总次数不超过 max_degree 的全部指数，按分次字典序排列
    长度为 C(dim + max_degree, dim)
    """
    if dim < 1:
        raise ValueError(f"维数必须 ≥ 1，当前为 {dim}")
    if max_degree < 0:
        raise ValueError(f"次数必须 ≥ 0，当前为 {max_degree}")

    basis: list[Exponent] = []
    for degree in range(max_degree + 1):
        block = []
        for combo in combinations_with_replacement(range(dim), degree):
            powers = [0] * dim
            for index in combo:
                powers[index] += 1
            block.append(tuple(powers))
        block.sort(key=graded_lex_key)
        basis.extend(block)
    return tuple(basis)


@lru_cache(maxsize=256)
def basis_index(dim: int, max_degree: int) -> Mapping[Exponent, int]:
    """指数 -> 在 monomial_basis(dim, max_degree) 中的位置"""
    return MappingProxyType(
        {exp: i for i, exp in enumerate(monomial_basis(dim, max_degree))}
    )


def _add_exponents(a: Exponent, b: Exponent) -> Exponent:
    return tuple(x + y for x, y in zip(a, b))


class Polynomial:
    """不可变的稀疏多元多项式"""

    __slots__ = ("_dim", "_terms", "_hash", "_compiled")

    def __init__(self, dim: int, terms: Mapping[Exponent, float] | None = None):
        if dim < 1:
            raise ValueError(f"多项式维数必须 ≥ 1，当前为 {dim}")
        cleaned: dict[Exponent, float] = {}
        for exponent, coefficient in (terms or {}).items():
            exponent = tuple(int(a) for a in exponent)
            if len(exponent) != dim:
                raise DimensionMismatchError(
                    f"指数 {exponent} 的长度与维数 {dim} 不一致"
                )
            if any(a < 0 for a in exponent):
                raise ValueError(f"指数 {exponent} 含负数")
            value = float(coefficient)
            if value != 0.0:
                cleaned[exponent] = value
        ordered = sorted(cleaned.items(), key=lambda item: graded_lex_key(item[0]))
        self._dim = dim
        self._terms = MappingProxyType(dict(ordered))
        self._hash: int | None = None
        self._compiled: tuple[np.ndarray, np.ndarray] | None = None

    # ------------------------------------------------------------------ 构造

    @classmethod
    def zero(cls, dim: int) -> Polynomial:
        return cls(dim)

    @classmethod
    def constant(cls, dim: int, value: float) -> Polynomial:
        return cls(dim, {(0,) * dim: value})

    @classmethod
    def variable(cls, dim: int, index: int) -> Polynomial:
        if not 0 <= index < dim:
            raise DimensionMismatchError(f"变量下标 {index} 超出维数 {dim}")
        exponent = [0] * dim
        exponent[index] = 1
        return cls(dim, {tuple(exponent): 1.0})

    @classmethod
    def from_coefficients(
        cls, dim: int, basis: Sequence[Exponent], coefficients: Iterable[float]
    ) -> Polynomial:
        """由基底上的系数向量构造多项式"""
        coefficients = list(coefficients)
        if len(coefficients) != len(basis):
            raise DimensionMismatchError(
                f"系数个数 {len(coefficients)} 与基底长度 {len(basis)} 不一致"
            )
        terms: dict[Exponent, float] = {}
        for exponent, value in zip(basis, coefficients):
            terms[exponent] = terms.get(exponent, 0.0) + float(value)
        return cls(dim, terms)

    # ------------------------------------------------------------------ 属性

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def terms(self) -> Mapping[Exponent, float]:
        return self._terms

    @property
    def degree(self) -> int:
        """总次数；零多项式约定为 0"""
        return max((sum(exp) for exp in self._terms), default=0)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, exponent: Exponent) -> float:
        return self._terms.get(tuple(exponent), 0.0)

    def coefficient_vector(self, basis: Sequence[Exponent]) -> np.ndarray:
        """按给定基底取系数；不在基底中的项会触发 ValueError"""
        index = {exp: i for i, exp in enumerate(basis)}
        vector = np.zeros(len(basis))
        for exponent, value in self._terms.items():
            if exponent not in index:
                raise ValueError(f"单项式 {exponent} 不在给定基底中")
            vector[index[exponent]] = value
        return vector

    def __iter__(self) -> Iterator[tuple[Exponent, float]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    # ------------------------------------------------------------------ 运算

    def _check_dim(self, other: Polynomial) -> None:
        if other.dim != self._dim:
            raise DimensionMismatchError(
                f"多项式维数不一致: {self._dim} 与 {other.dim}"
            )

    def _coerce(self, other) -> Polynomial | None:
        if isinstance(other, Polynomial):
            self._check_dim(other)
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Polynomial.constant(self._dim, float(other))
        return None

    def __add__(self, other) -> Polynomial:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = dict(self._terms)
        for exponent, value in other._terms.items():
            terms[exponent] = terms.get(exponent, 0.0) + value
        return Polynomial(self._dim, terms)

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial(self._dim, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> Polynomial:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> Polynomial:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> Polynomial:
        if isinstance(other, (int, float, np.floating, np.integer)):
            factor = float(other)
            return Polynomial(self._dim, {e: c * factor for e, c in self._terms.items()})
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms: dict[Exponent, float] = {}
        for ea, ca in self._terms.items():
            for eb, cb in other._terms.items():
                exponent = _add_exponents(ea, eb)
                terms[exponent] = terms.get(exponent, 0.0) + ca * cb
        return Polynomial(self._dim, terms)

    __rmul__ = __mul__

    def __pow__(self, power: int) -> Polynomial:
        if not isinstance(power, (int, np.integer)) or power < 0:
            raise ValueError(f"多项式幂次必须是非负整数，当前为 {power}")
        result = Polynomial.constant(self._dim, 1.0)
        base = self
        power = int(power)
        while power:
            if power & 1:
                result = result * base
            power >>= 1
            if power:
                base = base * base
        return result

    def derivative(self, index: int) -> Polynomial:
        """对第 index 个变量求偏导"""
        if not 0 <= index < self._dim:
            raise DimensionMismatchError(f"变量下标 {index} 超出维数 {self._dim}")
        terms: dict[Exponent, float] = {}
        for exponent, value in self._terms.items():
            power = exponent[index]
            if power == 0:
                continue
            lowered = list(exponent)
            lowered[index] -= 1
            terms[tuple(lowered)] = value * power
        return Polynomial(self._dim, terms)

    def gradient(self) -> list[Polynomial]:
        return [self.derivative(i) for i in range(self._dim)]

    # ------------------------------------------------------------------ 求值

    def evaluate(self, point: Sequence[float]) -> float:
        """逐项求和求值"""
        if len(point) != self._dim:
            raise DimensionMismatchError(
                f"点的维数 {len(point)} 与多项式维数 {self._dim} 不一致"
            )
        values = [float(v) for v in point]
        total = 0.0
        for exponent, coefficient in self._terms.items():
            term = coefficient
            for value, power in zip(values, exponent):
                if power:
                    term *= _power(value, power)
            total += term
        return total

    __call__ = evaluate

    def _compile(self) -> tuple[np.ndarray, np.ndarray]:
        if self._compiled is None:
            if self._terms:
                exponents = np.array(list(self._terms.keys()), dtype=np.int64)
            else:
                exponents = np.zeros((0, self._dim), dtype=np.int64)
            coefficients = np.fromiter(self._terms.values(), dtype=float)
            self._compiled = (exponents, coefficients)
        return self._compiled

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """对 (N, dim) 点集批量求值"""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self._dim:
            raise DimensionMismatchError(
                f"点集维数 {points.shape[1]} 与多项式维数 {self._dim} 不一致"
            )
        exponents, coefficients = self._compile()
        result = np.zeros(points.shape[0])
        if coefficients.size == 0:
            return result
        max_power = int(exponents.max())
        powers = np.arange(max_power + 1)
        for start in range(0, points.shape[0], _EVAL_CHUNK):
            chunk = points[start : start + _EVAL_CHUNK]
            monomials = np.ones((chunk.shape[0], exponents.shape[0]))
            for i in range(self._dim):
                if not exponents[:, i].any():
                    continue
                table = chunk[:, i : i + 1] ** powers
                monomials *= table[:, exponents[:, i]]
            result[start : start + chunk.shape[0]] = monomials @ coefficients
        return result

    # ------------------------------------------------------------------ 比较与打印

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._dim == other._dim and dict(self._terms) == dict(other._terms)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._dim, tuple(self._terms.items())))
        return self._hash

    def max_abs_difference(self, other: Polynomial) -> float:
        """逐系数差的无穷范数"""
        self._check_dim(other)
        keys = set(self._terms) | set(other._terms)
        return max(
            (abs(self.coefficient(k) - other.coefficient(k)) for k in keys),
            default=0.0,
        )

    def to_text(self, variables: Sequence[str] | None = None) -> str:
        """规范打印：按分次字典序输出，显式 * 与 ^"""
        from .parser import format_polynomial

        return format_polynomial(self, variables)

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"Polynomial(dim={self._dim}, '{self.to_text()}')"


def poly_arith(
    a: Polynomial, b: Polynomial, op: Literal["add", "sub", "mul"]
) -> Polynomial:
    """按名称执行多项式二元运算"""
    if a.dim != b.dim:
        raise DimensionMismatchError(f"多项式维数不一致: {a.dim} 与 {b.dim}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"未知运算: {op}")


def evaluate(p: Polynomial, point: Sequence[float]) -> float:
    return p.evaluate(point)


class PolynomialMap:
    """多项式映射 f: R^n -> R^n（向量场或离散映射）"""

    __slots__ = ("_components", "_fast_terms")

    def __init__(self, components: Sequence[Polynomial]):
        components = tuple(components)
        if not components:
            raise ValueError("多项式映射至少需要一个分量")
        dim = components[0].dim
        if any(c.dim != dim for c in components):
            raise DimensionMismatchError("多项式映射各分量的维数不一致")
        if len(components) != dim:
            raise DimensionMismatchError(
                f"分量个数 {len(components)} 与维数 {dim} 不一致"
            )
        self._components = components
        # 单点求值的预编译项表：(系数, ((变量下标, 幂次), ...))
        self._fast_terms = tuple(
            tuple(
                (coef, tuple((i, p) for i, p in enumerate(exp) if p))
                for exp, coef in comp.terms.items()
            )
            for comp in components
        )

    @classmethod
    def identity(cls, dim: int) -> PolynomialMap:
        return cls([Polynomial.variable(dim, i) for i in range(dim)])

    @property
    def components(self) -> tuple[Polynomial, ...]:
        return self._components

    @property
    def dim(self) -> int:
        return len(self._components)

    @property
    def degree(self) -> int:
        return max(c.degree for c in self._components)

    def __len__(self) -> int:
        return len(self._components)

    def __getitem__(self, index: int) -> Polynomial:
        return self._components[index]

    def __iter__(self) -> Iterator[Polynomial]:
        return iter(self._components)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolynomialMap):
            return NotImplemented
        return self._components == other._components

    def __hash__(self) -> int:
        return hash(self._components)

    def evaluate(self, point: Sequence[float]) -> np.ndarray:
        """单点求值（积分器热路径，纯 Python 循环）"""
        if len(point) != self.dim:
            raise DimensionMismatchError(
                f"点的维数 {len(point)} 与映射维数 {self.dim} 不一致"
            )
        values = [float(v) for v in point]
        out = []
        for terms in self._fast_terms:
            total = 0.0
            for coefficient, factors in terms:
                term = coefficient
                for index, power in factors:
                    term *= values[index] if power == 1 else _power(values[index], power)
                total += term
            out.append(total)
        return np.array(out)

    __call__ = evaluate

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.column_stack([c.evaluate_many(points) for c in self._components])

    def to_text(self, variables: Sequence[str] | None = None) -> list[str]:
        return [c.to_text(variables) for c in self._components]


def _check_map(v: Polynomial, f: PolynomialMap) -> None:
    if v.dim != f.dim:
        raise DimensionMismatchError(
            f"多项式维数 {v.dim} 与映射维数 {f.dim} 不一致"
        )


class MonomialComposer:
    """
    缓存单项式与映射的复合 x^a ∘ f
    每个新单项式只需在已缓存的低次单项式上再乘一个分量
    """

    def __init__(self, f: PolynomialMap):
        self.f = f
        dim = f.dim
        self._cache: dict[Exponent, Polynomial] = {
            (0,) * dim: Polynomial.constant(dim, 1.0)
        }

    def __call__(self, exponent: Exponent) -> Polynomial:
        exponent = tuple(exponent)
        cached = self._cache.get(exponent)
        if cached is not None:
            return cached
        index = next(i for i, a in enumerate(exponent) if a > 0)
        lowered = list(exponent)
        lowered[index] -= 1
        result = self(tuple(lowered)) * self.f[index]
        self._cache[exponent] = result
        return result


def compose(v: Polynomial, f: PolynomialMap, composer: MonomialComposer | None = None) -> Polynomial:
    """返回完全展开的 v(f(x))"""
    _check_map(v, f)
    composer = composer or MonomialComposer(f)
    terms: dict[Exponent, float] = {}
    for exponent, coefficient in v.terms.items():
        for e, c in composer(exponent).terms.items():
            terms[e] = terms.get(e, 0.0) + coefficient * c
    return Polynomial(v.dim, terms)


def compose_map(f: PolynomialMap, g: PolynomialMap) -> PolynomialMap:
    """映射复合 f ∘ g"""
    composer = MonomialComposer(g)
    return PolynomialMap([compose(c, g, composer) for c in f])


def lie_derivative(v: Polynomial, f: PolynomialMap) -> Polynomial:
    """∇v · f = Σ_i (∂v/∂x_i) f_i"""
    _check_map(v, f)
    result = Polynomial.zero(v.dim)
    for i, component in enumerate(f):
        partial = v.derivative(i)
        if not partial.is_zero:
            result = result + partial * component
    return result


def binomial_count(dim: int, degree: int) -> int:
    """monomial_basis(dim, degree) 的长度"""
    return math.comb(dim + degree, dim)
