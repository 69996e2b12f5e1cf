"""
全局吸引子的外逼近对象
Y_k = {x ∈ X : w(x) ≥ 1}，X_k = {x ∈ X : min(v1(x), v2(x)) ≥ 0}
v1、v2、w 保存在工作坐标下，求值前先经过仿射缩放。
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from ...models.errors import DimensionMismatchError
from ...models.models import ApproximationSet, DynamicalSystem
from ..algebra.polynomial import Polynomial, monomial_basis
from ..geometry.domain import SemialgebraicSet
from ..sos.compiler import RecoveredSolution
from ..sos.scaling import AffineScaling
from .certification import CertificationRecord


def coefficient_records(p: Polynomial, degree: int) -> list[dict[str, Any]]:
    """分次字典序的系数列表，每项旁附单项式指数"""
    return [
        {"exponent": list(e), "coefficient": float(p.coefficient(e))}
        for e in monomial_basis(p.dim, degree)
    ]


def polynomial_from_records(dim: int, records: Sequence[dict[str, Any]]) -> Polynomial:
    return Polynomial(dim, {tuple(r["exponent"]): float(r["coefficient"]) for r in records})


@dataclass(frozen=True, eq=False)
class AttractorApproximation:
    system: DynamicalSystem
    X: SemialgebraicSet  # 原坐标
    k: int
    v1: Polynomial  # 工作坐标
    v2: Polynomial
    w: Polynomial
    scaling: AffineScaling
    d_k: float
    certification: CertificationRecord | None = None

    @classmethod
    def from_recovered(
        cls,
        system: DynamicalSystem,
        X: SemialgebraicSet,
        k: int,
        recovered: RecoveredSolution,
        scaling: AffineScaling,
        certification: CertificationRecord | None = None,
    ) -> AttractorApproximation:
        """d_k = scale^n × 工作坐标下的 l′w，即原坐标下的 ∫_X w dλ"""
        return cls(
            system=system,
            X=X,
            k=k,
            v1=recovered.v1,
            v2=recovered.v2,
            w=recovered.w,
            scaling=scaling,
            d_k=scaling.volume_factor * recovered.objective_value,
            certification=certification,
        )

    @property
    def dim(self) -> int:
        return self.system.dim

    @property
    def discount(self) -> float:
        return self.system.discount

    @property
    def fingerprint(self) -> str:
        return self.system.fingerprint()

    def with_certification(self, record: CertificationRecord) -> AttractorApproximation:
        return replace(self, certification=record)

    def _points(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.dim:
            raise DimensionMismatchError(
                f"点集维数 {points.shape[1]} 与系统维数 {self.dim} 不一致"
            )
        return points

    def _point(self, x: Sequence[float]) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionMismatchError(f"点的维数 {x.shape} 与系统维数 {self.dim} 不一致")
        return x

    # ------------------------------------------------------------------ 批量求值

    def w_values(self, points) -> np.ndarray:
        return self.w.evaluate_many(self.scaling.to_working(self._points(points)))

    def v_min_values(self, points) -> np.ndarray:
        working = self.scaling.to_working(self._points(points))
        return np.minimum(self.v1.evaluate_many(working), self.v2.evaluate_many(working))

    def members_Yk(self, points) -> np.ndarray:
        points = self._points(points)
        return self.X.contains_many(points) & (self.w_values(points) >= 1.0)

    def members_Xk(self, points) -> np.ndarray:
        points = self._points(points)
        return self.X.contains_many(points) & (self.v_min_values(points) >= 0.0)

    def membership(self, which: ApproximationSet):
        """返回作用于 (N, n) 点集的成员判定函数"""
        if which is ApproximationSet.YK:
            return self.members_Yk
        return self.members_Xk

    # ------------------------------------------------------------------ 单点判定

    def member_Yk(self, x: Sequence[float]) -> bool:
        x = self._point(x)
        if not self.X.contains(x):
            return False
        return self.w.evaluate(self.scaling.to_working(x)) >= 1.0

    def member_Xk(self, x: Sequence[float]) -> bool:
        x = self._point(x)
        if not self.X.contains(x):
            return False
        y = self.scaling.to_working(x)
        return min(self.v1.evaluate(y), self.v2.evaluate(y)) >= 0.0

    # ------------------------------------------------------------------ 序列化

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "discount": self.discount,
            "d_k": self.d_k,
            "scaling": self.scaling.to_dict(),
            "v1": coefficient_records(self.v1, self.k),
            "v2": coefficient_records(self.v2, self.k),
            "w": coefficient_records(self.w, self.k),
            "certification": None if self.certification is None else self.certification.to_dict(),
        }

    @classmethod
    def from_dict(
        cls, data: dict[str, Any], system: DynamicalSystem, X: SemialgebraicSet
    ) -> AttractorApproximation:
        dim = system.dim
        certification = data.get("certification")
        return cls(
            system=system.with_discount(float(data["discount"])),
            X=X,
            k=int(data["k"]),
            v1=polynomial_from_records(dim, data["v1"]),
            v2=polynomial_from_records(dim, data["v2"]),
            w=polynomial_from_records(dim, data["w"]),
            scaling=AffineScaling.from_dict(data["scaling"]),
            d_k=float(data["d_k"]),
            certification=None if certification is None else CertificationRecord.from_dict(certification),
        )
