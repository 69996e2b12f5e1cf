"""
仿射预缩放 y = (x − shift) / scale
把矩域映到单位盒附近，改善 Gram 矩阵与矩向量的条件数。
多项式始终保存在工作坐标 y 下，求值时先把点变换过去。
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np

from ...models.models import DynamicalSystem, TimeKind
from ..algebra.polynomial import Polynomial, PolynomialMap, compose
from ..geometry.domain import MomentDomain, SemialgebraicSet

ScalingMode = Literal["auto", "on", "off"]


@dataclass(frozen=True)
class AffineScaling:
    shift: tuple[float, ...]
    scale: float

    @classmethod
    def identity(cls, dim: int) -> AffineScaling:
        return cls((0.0,) * dim, 1.0)

    @classmethod
    def for_domain(cls, domain: MomentDomain, mode: ScalingMode = "auto") -> AffineScaling:
        """auto：矩域不在 [−1, 1]^n 内时启用；on：总是启用；off：恒等"""
        if mode == "off":
            return cls.identity(domain.dim)
        lower, upper = domain.bounding_box()
        if mode == "auto" and np.all(lower >= -1.0) and np.all(upper <= 1.0):
            return cls.identity(domain.dim)
        center = (lower + upper) / 2
        half_width = float(np.max((upper - lower) / 2))
        return cls(tuple(float(c) for c in center), half_width)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> AffineScaling:
        return cls(tuple(float(v) for v in data["shift"]), float(data["scale"]))

    @property
    def dim(self) -> int:
        return len(self.shift)

    @property
    def is_identity(self) -> bool:
        return self.scale == 1.0 and not any(self.shift)

    @property
    def volume_factor(self) -> float:
        """原坐标体积 = 工作坐标体积 × scale^n"""
        return self.scale**self.dim

    def to_working(self, points: np.ndarray | Sequence[float]) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if self.is_identity:
            return points
        return (points - np.array(self.shift)) / self.scale

    def from_working(self, points: np.ndarray | Sequence[float]) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if self.is_identity:
            return points
        return points * self.scale + np.array(self.shift)

    def substitution(self) -> PolynomialMap:
        """x = shift + scale·y"""
        return PolynomialMap(
            [Polynomial.variable(self.dim, i) * self.scale + c for i, c in enumerate(self.shift)]
        )

    def set_to_working(self, X: SemialgebraicSet) -> SemialgebraicSet:
        if self.is_identity:
            return X
        return X.transformed(self.shift, self.scale)

    def system_to_working(self, system: DynamicalSystem) -> DynamicalSystem:
        """
        连续：g(y) = f(c + s·y) / s
        离散：g(y) = (f(c + s·y) − c) / s
        """
        if self.is_identity:
            return system
        substitution = self.substitution()
        components = []
        for c, component in zip(self.shift, system.field):
            composed = compose(component, substitution)
            if system.time_kind is TimeKind.DISCRETE:
                composed = composed - c
            components.append(composed * (1.0 / self.scale))
        return DynamicalSystem(
            system.time_kind, system.discount, PolynomialMap(components), system.variables
        )

    def polynomial_to_original(self, p: Polynomial) -> Polynomial:
        """工作坐标多项式在原坐标下的展开（仅用于展示，求值请走 to_working）"""
        if self.is_identity:
            return p
        inverse = PolynomialMap(
            [
                (Polynomial.variable(self.dim, i) - c) * (1.0 / self.scale)
                for i, c in enumerate(self.shift)
            ]
        )
        return compose(p, inverse)

    def to_dict(self) -> dict[str, Any]:
        return {"shift": list(self.shift), "scale": self.scale}
