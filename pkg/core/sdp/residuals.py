"""
独立于求解器内部的残差复算
直接遍历稀疏约束项，不复用求解器的稠密算子。
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ...models.errors import DimensionMismatchError
from .problem import SdpProblem, SdpSolution


class ResidualCheck(NamedTuple):
    equality_inf_norm: float
    min_block_eigenvalue: float


def constraint_values(problem: SdpProblem, blocks: list[np.ndarray], free_values: np.ndarray) -> np.ndarray:
    """逐条约束计算 Σ⟨A_r, X⟩ + F_r′x_f"""
    values = np.zeros(problem.constraint_count)
    for r, constraint in enumerate(problem.constraints):
        total = 0.0
        for block, i, j, value in constraint.block_entries:
            entry = blocks[block][i, j]
            total += value * entry if i == j else 2.0 * value * entry
        for index, value in constraint.free_entries:
            total += value * free_values[index]
        values[r] = total
    return values


def _check_shapes(problem: SdpProblem, blocks: list[np.ndarray], free_values: np.ndarray) -> None:
    if len(blocks) != len(problem.block_orders):
        raise DimensionMismatchError(
            f"块数 {len(blocks)} 与问题块数 {len(problem.block_orders)} 不一致"
        )
    for index, (X, order) in enumerate(zip(blocks, problem.block_orders)):
        if X.shape != (order, order):
            raise DimensionMismatchError(f"块 {index} 形状 {X.shape} 与阶数 {order} 不一致")
    if np.shape(free_values) != (problem.free_count,):
        raise DimensionMismatchError(
            f"自由变量个数 {np.shape(free_values)} 与问题 {problem.free_count} 不一致"
        )


def residuals(problem: SdpProblem, solution: SdpSolution) -> ResidualCheck:
    """max_r |A_r(X) − b_r| 与所有块的最小特征值"""
    blocks = [np.asarray(X, dtype=float) for X in solution.block_values]
    free_values = np.asarray(solution.free_values, dtype=float)
    _check_shapes(problem, blocks, free_values)

    if problem.constraint_count:
        gap = constraint_values(problem, blocks, free_values) - problem.rhs
        equality = float(np.max(np.abs(gap)))
    else:
        equality = 0.0
    min_eig = min(
        (float(np.linalg.eigvalsh(0.5 * (X + X.T))[0]) for X in blocks),
        default=0.0,
    )
    return ResidualCheck(equality, min_eig)
