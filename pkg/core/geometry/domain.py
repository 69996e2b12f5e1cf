"""
状态集 X 的描述
X 由不等式组 {p_i ≥ 0} 给出，同时附带一个闭式的矩域描述（盒/球/环），
Lebesgue 矩与均匀采样都以矩域为准。
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, ClassVar

import numpy as np

from ...models.errors import ConfigError, DimensionMismatchError
from ...utils.logger import LOG_TAG, logger
from ..algebra.polynomial import Polynomial, PolynomialMap, compose


def _as_vector(values: Sequence[float], name: str) -> tuple[float, ...]:
    vector = tuple(float(v) for v in values)
    if not vector:
        raise ConfigError(f"{name} 不能为空")
    if not all(math.isfinite(v) for v in vector):
        raise ConfigError(f"{name} 含非有限值: {vector}")
    return vector


def _ball_polynomial(center: Sequence[float], radius_sq: float) -> Polynomial:
    """radius_sq − ‖x − c‖²"""
    dim = len(center)
    result = Polynomial.constant(dim, radius_sq)
    for i, c in enumerate(center):
        shifted = Polynomial.variable(dim, i) - c
        result = result - shifted * shifted
    return result


@dataclass(frozen=True, slots=True)
class BoxDomain:
    """轴对齐盒 [lower, upper]"""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    kind: ClassVar[str] = "box"

    def __post_init__(self):
        object.__setattr__(self, "lower", _as_vector(self.lower, "lower"))
        object.__setattr__(self, "upper", _as_vector(self.upper, "upper"))
        if len(self.lower) != len(self.upper):
            raise ConfigError("盒域 lower 与 upper 长度不一致")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise ConfigError(f"盒域要求 lower < upper 逐分量成立: {self.lower} / {self.upper}")

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def center(self) -> tuple[float, ...]:
        return tuple((lo + hi) / 2 for lo, hi in zip(self.lower, self.upper))

    @property
    def enclosing_radius(self) -> float:
        """半对角线长度"""
        return math.sqrt(sum(((hi - lo) / 2) ** 2 for lo, hi in zip(self.lower, self.upper)))

    @property
    def volume(self) -> float:
        return math.prod(hi - lo for lo, hi in zip(self.lower, self.upper))

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.lower), np.array(self.upper)

    def farthest_distance(self, point: Sequence[float]) -> float:
        """域内离 point 最远的距离"""
        return math.sqrt(
            sum(max(abs(p - lo), abs(p - hi)) ** 2 for p, lo, hi in zip(point, self.lower, self.upper))
        )

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.all((points >= np.array(self.lower)) & (points <= np.array(self.upper)), axis=1)

    def defining_inequalities(self) -> list[Polynomial]:
        """每个坐标一个 (x_i − l_i)(u_i − x_i) ≥ 0"""
        result = []
        for i, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            x = Polynomial.variable(self.dim, i)
            result.append((x - lo) * (hi - x))
        return result

    def transformed(self, shift: Sequence[float], scale: float) -> BoxDomain:
        """像集 {(x − shift)/scale}"""
        return BoxDomain(
            tuple((lo - c) / scale for lo, c in zip(self.lower, shift)),
            tuple((hi - c) / scale for hi, c in zip(self.upper, shift)),
        )

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "lower": list(self.lower), "upper": list(self.upper)}


@dataclass(frozen=True, slots=True)
class BallDomain:
    """闭球 ‖x − center‖ ≤ radius"""

    center: tuple[float, ...]
    radius: float
    kind: ClassVar[str] = "ball"

    def __post_init__(self):
        object.__setattr__(self, "center", _as_vector(self.center, "center"))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise ConfigError(f"球域半径必须 > 0，当前为 {self.radius}")

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def enclosing_radius(self) -> float:
        return self.radius

    @property
    def volume(self) -> float:
        n = self.dim
        return math.pi ** (n / 2) / math.gamma(n / 2 + 1) * self.radius**n

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        c = np.array(self.center)
        return c - self.radius, c + self.radius

    def farthest_distance(self, point: Sequence[float]) -> float:
        return math.dist(point, self.center) + self.radius

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        sq = np.sum((points - np.array(self.center)) ** 2, axis=1)
        return sq <= self.radius**2

    def defining_inequalities(self) -> list[Polynomial]:
        return [_ball_polynomial(self.center, self.radius**2)]

    def transformed(self, shift: Sequence[float], scale: float) -> BallDomain:
        return BallDomain(
            tuple((c0 - c) / scale for c0, c in zip(self.center, shift)),
            self.radius / scale,
        )

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True, slots=True)
class AnnulusDomain:
    """闭环域 inner_radius ≤ ‖x − center‖ ≤ outer_radius"""

    center: tuple[float, ...]
    inner_radius: float
    outer_radius: float
    kind: ClassVar[str] = "annulus"

    def __post_init__(self):
        object.__setattr__(self, "center", _as_vector(self.center, "center"))
        object.__setattr__(self, "inner_radius", float(self.inner_radius))
        object.__setattr__(self, "outer_radius", float(self.outer_radius))
        if not 0 < self.inner_radius < self.outer_radius:
            raise ConfigError(
                f"环域要求 0 < inner_radius < outer_radius，当前为 "
                f"{self.inner_radius} / {self.outer_radius}"
            )

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def outer_ball(self) -> BallDomain:
        return BallDomain(self.center, self.outer_radius)

    @property
    def inner_ball(self) -> BallDomain:
        return BallDomain(self.center, self.inner_radius)

    @property
    def enclosing_radius(self) -> float:
        return self.outer_radius

    @property
    def volume(self) -> float:
        return self.outer_ball.volume - self.inner_ball.volume

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.outer_ball.bounding_box()

    def farthest_distance(self, point: Sequence[float]) -> float:
        return math.dist(point, self.center) + self.outer_radius

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        sq = np.sum((points - np.array(self.center)) ** 2, axis=1)
        return (sq >= self.inner_radius**2) & (sq <= self.outer_radius**2)

    def defining_inequalities(self) -> list[Polynomial]:
        """‖x − c‖² − r² ≥ 0 与 R² − ‖x − c‖² ≥ 0"""
        outer = _ball_polynomial(self.center, self.outer_radius**2)
        inner = -_ball_polynomial(self.center, self.inner_radius**2)
        return [inner, outer]

    def transformed(self, shift: Sequence[float], scale: float) -> AnnulusDomain:
        return AnnulusDomain(
            tuple((c0 - c) / scale for c0, c in zip(self.center, shift)),
            self.inner_radius / scale,
            self.outer_radius / scale,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "center": list(self.center),
            "inner_radius": self.inner_radius,
            "outer_radius": self.outer_radius,
        }


MomentDomain = BoxDomain | BallDomain | AnnulusDomain

DOMAIN_KINDS: dict[str, type] = {
    BoxDomain.kind: BoxDomain,
    BallDomain.kind: BallDomain,
    AnnulusDomain.kind: AnnulusDomain,
}


def domain_from_dict(data: dict[str, Any]) -> MomentDomain:
    """由配置/结果文档中的字典重建矩域"""
    kind = data.get("kind")
    if kind == "box":
        return BoxDomain(tuple(data["lower"]), tuple(data["upper"]))
    if kind == "ball":
        return BallDomain(tuple(data["center"]), data["radius"])
    if kind == "annulus":
        return AnnulusDomain(tuple(data["center"]), data["inner_radius"], data["outer_radius"])
    raise ConfigError(f"未知的矩域类型 {kind!r}，可选: {', '.join(DOMAIN_KINDS)}")


@dataclass(frozen=True)
class SemialgebraicSet:
    """紧基本半代数集 X = {x : p_i(x) ≥ 0}"""

    dim: int
    inequalities: tuple[Polynomial, ...]
    moment_domain: MomentDomain

    def __post_init__(self):
        object.__setattr__(self, "inequalities", tuple(self.inequalities))
        if self.moment_domain.dim != self.dim:
            raise DimensionMismatchError(
                f"矩域维数 {self.moment_domain.dim} 与状态维数 {self.dim} 不一致"
            )
        for p in self.inequalities:
            if p.dim != self.dim:
                raise DimensionMismatchError(
                    f"不等式维数 {p.dim} 与状态维数 {self.dim} 不一致"
                )

    @classmethod
    def from_domain(
        cls, domain: MomentDomain, extra: Sequence[Polynomial] = ()
    ) -> SemialgebraicSet:
        """矩域自身的定义不等式加上额外约束"""
        return cls(domain.dim, tuple(domain.defining_inequalities()) + tuple(extra), domain)

    def contains(self, point: Sequence[float]) -> bool:
        if len(point) != self.dim:
            raise DimensionMismatchError(
                f"点的维数 {len(point)} 与状态维数 {self.dim} 不一致"
            )
        return all(p.evaluate(point) >= 0 for p in self.inequalities)

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.dim:
            raise DimensionMismatchError(
                f"点集维数 {points.shape[1]} 与状态维数 {self.dim} 不一致"
            )
        mask = np.ones(points.shape[0], dtype=bool)
        for p in self.inequalities:
            mask &= p.evaluate_many(points) >= 0
        return mask

    def transformed(self, shift: Sequence[float], scale: float) -> SemialgebraicSet:
        """在坐标 y = (x − shift)/scale 下重写 X"""
        substitution = PolynomialMap(
            [Polynomial.variable(self.dim, i) * scale + c for i, c in enumerate(shift)]
        )
        return SemialgebraicSet(
            self.dim,
            tuple(compose(p, substitution) for p in self.inequalities),
            self.moment_domain.transformed(shift, scale),
        )

    def descriptor_mismatch(self, samples: int = 2000, seed: int = 0) -> float:
        """
        抽查不等式组与矩域是否描述同一点集
        在矩域包围盒内均匀取点，返回两种判定不一致的点所占比例
        """
        lower, upper = self.moment_domain.bounding_box()
        rng = np.random.default_rng(seed)
        points = lower + (upper - lower) * rng.random((samples, self.dim))
        by_inequalities = self.contains_many(points)
        by_domain = self.moment_domain.contains_many(points)
        return float(np.mean(by_inequalities != by_domain))

    def to_dict(self, variables: Sequence[str] | None = None) -> dict[str, Any]:
        return {
            "domain": self.moment_domain.to_dict(),
            "inequalities": [p.to_text(variables) for p in self.inequalities],
        }


def _match_ball(p: Polynomial) -> tuple[tuple[float, ...], float] | None:
    """
    识别 s·(R² − ‖x − c‖²) 形式的不等式（s > 0）
    返回 (c, R²)，不匹配时返回 None
    """
    if p.degree != 2:
        return None
    dim = p.dim
    squares = []
    for i in range(dim):
        exponent = [0] * dim
        exponent[i] = 2
        squares.append(p.coefficient(tuple(exponent)))
    scale = -squares[0]
    if scale <= 0 or any(s != squares[0] for s in squares):
        return None
    for exponent in p.terms:
        if sum(exponent) == 2 and max(exponent) == 1:
            return None
    center = []
    for i in range(dim):
        exponent = [0] * dim
        exponent[i] = 1
        center.append(p.coefficient(tuple(exponent)) / (2 * scale))
    radius_sq = p.coefficient((0,) * dim) / scale + sum(c * c for c in center)
    if radius_sq <= 0:
        return None
    return tuple(center), radius_sq


def find_ball_constraint(X: SemialgebraicSet) -> int | None:
    """返回包含整个矩域的球约束在不等式列表中的下标"""
    for index, p in enumerate(X.inequalities):
        matched = _match_ball(p)
        if matched is None:
            continue
        center, radius_sq = matched
        reach = X.moment_domain.farthest_distance(center)
        if reach * reach <= radius_sq * (1 + 1e-12):
            return index
    return None


def ensure_ball_constraint(X: SemialgebraicSet) -> SemialgebraicSet:
    """必要时追加冗余球约束 R² − ‖x − c‖² ≥ 0（以矩域中心和最小包围半径为准）"""
    if find_ball_constraint(X) is not None:
        return X
    domain = X.moment_domain
    center = domain.center
    radius = domain.enclosing_radius
    ball = _ball_polynomial(center, radius * radius)
    logger.debug(f"{LOG_TAG} 追加冗余球约束: 中心 {center}，半径 {radius:.6g}")
    return SemialgebraicSet(X.dim, X.inequalities + (ball,), domain)
