"""
动力系统与轨迹数据模型
"""

from __future__ import annotations

import hashlib
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any

import numpy as np

from ..core.algebra.parser import parse_polynomial
from ..core.algebra.polynomial import PolynomialMap
from .errors import ConfigError, DimensionMismatchError


class TimeKind(Enum):
    """时间类型"""

    CONTINUOUS = "continuous"  # ẋ = f(x)，折扣 β > 0
    DISCRETE = "discrete"  # x⁺ = f(x)，折扣 α ∈ (0, 1)


class CertificationVerdict(Enum):
    """后验认证结论"""

    CERTIFIED = "certified"
    CERTIFIED_WITH_MARGIN = "certified_with_margin"
    REJECTED = "rejected"


class ApproximationSet(Enum):
    """体积/网格查询使用的外逼近集合"""

    YK = "yk"  # {w ≥ 1}
    XK = "xk"  # {min(v1, v2) ≥ 0}
    INTERSECTION = "intersection"  # 所有记录 X_k 的交


def validate_discount(time_kind: TimeKind, discount: float) -> float:
    """检查折扣因子范围，返回浮点值"""
    value = float(discount)
    if not math.isfinite(value):
        raise ConfigError(f"折扣因子必须是有限数，当前为 {discount}")
    if time_kind is TimeKind.CONTINUOUS and not value > 0:
        raise ConfigError(f"连续时间系统要求 β > 0，当前 β = {value}")
    if time_kind is TimeKind.DISCRETE and not 0 < value < 1:
        raise ConfigError(f"离散时间系统要求 α ∈ (0, 1)，当前 α = {value}")
    return value


@dataclass(frozen=True)
class DynamicalSystem:
    """多项式动力系统及其折扣因子"""

    time_kind: TimeKind
    discount: float
    field: PolynomialMap
    variables: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(
            self, "discount", validate_discount(self.time_kind, self.discount)
        )
        if len(self.variables) != self.field.dim:
            raise DimensionMismatchError(
                f"变量个数 {len(self.variables)} 与向量场维数 {self.field.dim} 不一致"
            )

    @classmethod
    def from_expressions(
        cls,
        variables: Sequence[str],
        expressions: Sequence[str],
        time_kind: TimeKind | str,
        discount: float,
    ) -> DynamicalSystem:
        time_kind = TimeKind(time_kind)
        if len(expressions) != len(variables):
            raise DimensionMismatchError(
                f"表达式个数 {len(expressions)} 与变量个数 {len(variables)} 不一致"
            )
        field_map = PolynomialMap([parse_polynomial(e, variables) for e in expressions])
        return cls(time_kind, discount, field_map, tuple(variables))

    @property
    def dim(self) -> int:
        return self.field.dim

    @property
    def is_continuous(self) -> bool:
        return self.time_kind is TimeKind.CONTINUOUS

    def with_discount(self, discount: float) -> DynamicalSystem:
        return replace(self, discount=discount)

    def field_text(self) -> list[str]:
        return self.field.to_text(self.variables)

    def fingerprint(self) -> str:
        """系统指纹：时间类型 + 规范向量场文本，不含折扣"""
        canonical = "\n".join([self.time_kind.value, *self.field.to_text()])
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def to_dict(self) -> dict[str, Any]:
        return {
            "variables": list(self.variables),
            "time": self.time_kind.value,
            "discount": self.discount,
            "field": self.field_text(),
        }


@dataclass
class TrajectorySample:
    """去掉预热段后的轨迹样本"""

    points: np.ndarray  # (count, dim)
    burn_in_dropped: int
    step: float  # 连续系统为 dt，离散系统为 1
    times: np.ndarray | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def count(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])
