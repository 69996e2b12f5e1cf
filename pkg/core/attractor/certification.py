"""
后验认证

对恢复出的解做三项轻量检查，给出结论枚举：
1. 逐系数重展开四条约束恒等式 lhs = Σ σ_j·p_j，取系数差的无穷范数；
2. 每个 Gram 块的最小特征值；
3. 在 X 中均匀采样，求四条约束左端多项式的最小值。
这是基于残差与采样的检查，并非区间算术意义下的严格验证。
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from ...models.errors import DimensionMismatchError
from ...models.models import CertificationVerdict
from ...utils.logger import LOG_TAG, logger
from ..algebra.polynomial import Polynomial
from ..geometry.sampling import sample_uniform
from ..sos.compiler import RecoveredSolution
from ..sos.tightening import SosProgram

EQUALITY_TOLERANCE = 1e-6
GRAM_TOLERANCE = -1e-7
SAMPLE_TOLERANCE = -1e-6
# 严格阈值不满足时，采样最小值不低于 −MARGIN_LIMIT 仍给出带裕量的认证
MARGIN_LIMIT = 1e-3

DEFAULT_SAMPLE_COUNT = 10000


@dataclass(frozen=True)
class CertificationRecord:
    equality_residual: float
    min_gram_eigenvalue: float
    sampled_constraint_min: float
    verdict: CertificationVerdict
    margin: float | None = None  # 仅 CERTIFIED_WITH_MARGIN 时给出 ε
    sample_count: int = 0
    seed: int | None = None

    @property
    def accepted(self) -> bool:
        return self.verdict is not CertificationVerdict.REJECTED

    def to_dict(self) -> dict[str, Any]:
        return {
            "equality_residual": self.equality_residual,
            "min_gram_eigenvalue": self.min_gram_eigenvalue,
            "sampled_constraint_min": self.sampled_constraint_min,
            "verdict": self.verdict.value,
            "margin": self.margin,
            "sample_count": self.sample_count,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> CertificationRecord:
        return cls(
            equality_residual=float(data["equality_residual"]),
            min_gram_eigenvalue=float(data["min_gram_eigenvalue"]),
            sampled_constraint_min=float(data["sampled_constraint_min"]),
            verdict=CertificationVerdict(data["verdict"]),
            margin=None if data.get("margin") is None else float(data["margin"]),
            sample_count=int(data.get("sample_count", 0)),
            seed=data.get("seed"),
        )


def classify(
    equality_residual: float, min_gram_eigenvalue: float, sampled_min: float
) -> tuple[CertificationVerdict, float | None]:
    """按阈值给出结论与裕量 ε"""
    strict = (
        equality_residual <= EQUALITY_TOLERANCE
        and min_gram_eigenvalue >= GRAM_TOLERANCE
        and sampled_min >= SAMPLE_TOLERANCE
    )
    if strict:
        return CertificationVerdict.CERTIFIED, None
    if np.isfinite(sampled_min) and sampled_min >= -MARGIN_LIMIT:
        return CertificationVerdict.CERTIFIED_WITH_MARGIN, max(-sampled_min, -SAMPLE_TOLERANCE)
    return CertificationVerdict.REJECTED, None


def _check_matches(program: SosProgram, solution: RecoveredSolution) -> None:
    if solution.decision_values.shape != (program.decision_count,):
        raise DimensionMismatchError(
            f"解的决策变量个数 {solution.decision_values.shape} 与程序 {program.decision_count} 不一致"
        )
    for slot in program.slots:
        gram = solution.grams.get(slot.slot)
        if gram is None:
            raise DimensionMismatchError(f"解中缺少槽位 {slot.slot} 的 Gram 矩阵")
        order = slot.matrix_order
        if np.shape(gram) != (order, order):
            raise DimensionMismatchError(
                f"槽位 {slot.slot} 的 Gram 形状 {np.shape(gram)} 与阶数 {order} 不一致"
            )


def equality_residual(program: SosProgram, solution: RecoveredSolution) -> float:
    """max over 约束 ‖lhs − Σ σ_j·p_j‖∞（按系数）"""
    worst = 0.0
    for constraint in program.constraints:
        lhs = constraint.lhs_polynomial(solution.decision_values)
        certificate = sum(
            (slot.polynomial(np.asarray(solution.grams[slot.slot])) for slot in constraint.slots),
            start=Polynomial.zero(program.dim),
        )
        worst = max(worst, lhs.max_abs_difference(certificate))
    return worst


def min_gram_eigenvalue(program: SosProgram, solution: RecoveredSolution) -> float:
    values = []
    for slot in program.slots:
        gram = np.asarray(solution.grams[slot.slot], dtype=float)
        values.append(float(np.linalg.eigvalsh(0.5 * (gram + gram.T))[0]))
    return min(values, default=0.0)


def sampled_constraint_min(
    program: SosProgram, solution: RecoveredSolution, sample_count: int, seed: int
) -> float:
    """在工作坐标下的 X 内均匀取点，求所有约束左端多项式的最小值"""
    X = program.X
    if X is None or sample_count <= 0:
        return float("inf")
    points = sample_uniform(X.moment_domain, sample_count, seed)
    points = points[X.contains_many(points)]
    if points.shape[0] == 0:
        logger.warning(f"{LOG_TAG} 认证采样在 X 内没有得到任何点，跳过采样检查")
        return float("inf")
    return min(
        float(np.min(constraint.lhs_polynomial(solution.decision_values).evaluate_many(points)))
        for constraint in program.constraints
    )


def certify(
    program: SosProgram,
    solution: RecoveredSolution,
    sample_count: int = DEFAULT_SAMPLE_COUNT,
    seed: int = 0,
) -> CertificationRecord:
    """对一个恢复出的解做后验认证"""
    _check_matches(program, solution)
    residual = equality_residual(program, solution)
    eigenvalue = min_gram_eigenvalue(program, solution)
    sampled = sampled_constraint_min(program, solution, sample_count, seed)
    verdict, margin = classify(residual, eigenvalue, sampled)

    record = CertificationRecord(
        equality_residual=residual,
        min_gram_eigenvalue=eigenvalue,
        sampled_constraint_min=sampled,
        verdict=verdict,
        margin=margin,
        sample_count=sample_count,
        seed=seed,
    )
    message = (
        f"{LOG_TAG} 认证 k={program.degree_bound}: {verdict.value}, 等式残差 {residual:.3e}, "
        f"最小 Gram 特征值 {eigenvalue:.3e}, 采样最小值 {sampled:.3e}"
    )
    if record.accepted:
        logger.info(message)
    else:
        logger.warning(message)
    return record
