"""
块对角 SDP 数据模型

原问题（最小化）:
    min  Σ_j ⟨C_j, X_j⟩ + c_f′x_f
    s.t. Σ_j ⟨A_rj, X_j⟩ + F_r′x_f = b_r,   X_j ⪰ 0,   x_f 自由

对称约定：矩阵只存上三角 (i ≤ j)。非对角元 (i < j, v) 表示 A_ij = A_ji = v，
因此对内积贡献 2·v·X_ij；对角元贡献 v·X_ii。
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from pydantic import BaseModel, Field

# (块号, 行, 列, 值)，块号与行列均从 0 开始，行 ≤ 列
BlockEntry = tuple[int, int, int, float]


class SdpStatus(Enum):
    """求解状态"""

    OPTIMAL = "optimal"
    PRIMAL_INFEASIBLE = "primal_infeasible"
    DUAL_INFEASIBLE = "dual_infeasible"
    MAX_ITERATIONS = "max_iterations"
    NUMERICAL_TROUBLE = "numerical_trouble"


class SolverSettings(BaseModel):
    """内点法参数"""

    tol_eq: float = Field(default=1e-8, gt=0)
    tol_psd: float = Field(default=1e-8, gt=0)
    tol_gap: float = Field(default=1e-8, gt=0)
    max_iterations: int = Field(default=200, ge=1)
    initial_point_scale: float = Field(default=1.0, gt=0)

    model_config = {"frozen": True, "extra": "forbid"}


@dataclass(frozen=True)
class SdpConstraint:
    """一条线性等式约束"""

    block_entries: tuple[BlockEntry, ...]
    free_entries: tuple[tuple[int, float], ...]
    rhs: float

    @property
    def is_empty(self) -> bool:
        return not self.block_entries and not self.free_entries


@dataclass(frozen=True)
class SdpProblem:
    block_orders: tuple[int, ...]
    free_count: int
    constraints: tuple[SdpConstraint, ...]
    objective_blocks: tuple[BlockEntry, ...] = ()
    objective_free: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        if any(order < 1 for order in self.block_orders):
            raise ValueError(f"块阶数必须 ≥ 1: {self.block_orders}")
        if self.free_count < 0:
            raise ValueError("自由变量个数不能为负")
        for r, constraint in enumerate(self.constraints):
            if constraint.is_empty:
                raise ValueError(f"第 {r} 条约束不含任何变量")
            self._check_entries(constraint.block_entries, constraint.free_entries, f"约束 {r}")
        self._check_entries(self.objective_blocks, self.objective_free, "目标函数")

    def _check_entries(self, blocks, frees, where: str) -> None:
        for block, i, j, _ in blocks:
            if not 0 <= block < len(self.block_orders):
                raise ValueError(f"{where} 引用了不存在的块 {block}")
            if not 0 <= i <= j < self.block_orders[block]:
                raise ValueError(f"{where} 的下标 ({i}, {j}) 超出块 {block} 或不在上三角")
        for index, _ in frees:
            if not 0 <= index < self.free_count:
                raise ValueError(f"{where} 引用了不存在的自由变量 {index}")

    @property
    def constraint_count(self) -> int:
        return len(self.constraints)

    @property
    def rhs(self) -> np.ndarray:
        return np.array([c.rhs for c in self.constraints], dtype=float)

    def objective_matrices(self) -> list[np.ndarray]:
        """稠密对称目标矩阵 C_j"""
        matrices = [np.zeros((n, n)) for n in self.block_orders]
        for block, i, j, value in self.objective_blocks:
            matrices[block][i, j] += value
            if i != j:
                matrices[block][j, i] += value
        return matrices

    def objective_free_vector(self) -> np.ndarray:
        vector = np.zeros(self.free_count)
        for index, value in self.objective_free:
            vector[index] += value
        return vector

    def objective_value(self, blocks: list[np.ndarray], free_values: np.ndarray) -> float:
        total = sum(
            float(np.sum(C * X)) for C, X in zip(self.objective_matrices(), blocks)
        )
        return total + float(self.objective_free_vector() @ np.asarray(free_values))

    def size_summary(self) -> dict[str, Any]:
        return {
            "blocks": len(self.block_orders),
            "max_block_order": max(self.block_orders, default=0),
            "free_variables": self.free_count,
            "constraints": self.constraint_count,
        }


def _merge_entries(entries: Iterable[BlockEntry]) -> tuple[BlockEntry, ...]:
    """归一到上三角、合并重复项、去掉恰为 0 的值，并按 (块, 行, 列) 排序"""
    merged: dict[tuple[int, int, int], float] = {}
    for block, i, j, value in entries:
        if i > j:
            i, j = j, i
        key = (int(block), int(i), int(j))
        merged[key] = merged.get(key, 0.0) + float(value)
    return tuple((*key, value) for key, value in sorted(merged.items()) if value != 0.0)


def _merge_free(entries: Mapping[int, float] | Iterable[tuple[int, float]]) -> tuple[tuple[int, float], ...]:
    items = entries.items() if isinstance(entries, Mapping) else entries
    merged: dict[int, float] = {}
    for index, value in items:
        merged[int(index)] = merged.get(int(index), 0.0) + float(value)
    return tuple((k, v) for k, v in sorted(merged.items()) if v != 0.0)


class SdpProblemBuilder:
    """按创建顺序累积块、自由变量和约束"""

    def __init__(self):
        self._block_orders: list[int] = []
        self._free_count = 0
        self._constraints: list[SdpConstraint] = []
        self._objective_blocks: list[BlockEntry] = []
        self._objective_free: dict[int, float] = {}

    def add_block(self, order: int) -> int:
        self._block_orders.append(int(order))
        return len(self._block_orders) - 1

    def add_free(self, count: int) -> int:
        """追加 count 个自由变量，返回起始下标"""
        start = self._free_count
        self._free_count += int(count)
        return start

    def add_constraint(
        self,
        block_entries: Iterable[BlockEntry],
        free_entries: Mapping[int, float] | Iterable[tuple[int, float]],
        rhs: float,
    ) -> int:
        constraint = SdpConstraint(_merge_entries(block_entries), _merge_free(free_entries), float(rhs))
        if constraint.is_empty:
            raise ValueError(f"约束（右端 {rhs}）不含任何变量")
        self._constraints.append(constraint)
        return len(self._constraints) - 1

    def add_objective(
        self,
        block_entries: Iterable[BlockEntry] = (),
        free_entries: Mapping[int, float] | Iterable[tuple[int, float]] = (),
    ) -> None:
        self._objective_blocks.extend(block_entries)
        for index, value in _merge_free(free_entries):
            self._objective_free[index] = self._objective_free.get(index, 0.0) + value

    def build(self) -> SdpProblem:
        return SdpProblem(
            block_orders=tuple(self._block_orders),
            free_count=self._free_count,
            constraints=tuple(self._constraints),
            objective_blocks=_merge_entries(self._objective_blocks),
            objective_free=_merge_free(self._objective_free),
        )


@dataclass(frozen=True)
class SdpResiduals:
    equality_inf_norm: float
    min_block_eigenvalue: float
    duality_gap: float

    def to_dict(self) -> dict[str, float]:
        return {
            "equality_inf_norm": self.equality_inf_norm,
            "min_block_eigenvalue": self.min_block_eigenvalue,
            "duality_gap": self.duality_gap,
        }


@dataclass(eq=False)
class SdpSolution:
    """数值解；block_values 为对称矩阵"""

    block_values: list[np.ndarray]
    free_values: np.ndarray
    objective_value: float
    status: SdpStatus
    residuals: SdpResiduals
    dual_values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    dual_objective: float = float("nan")
    iterations: int = 0
    near_optimal: bool = False
    history: list[dict[str, float]] = field(default_factory=list)

    @property
    def is_usable(self) -> bool:
        """可用于恢复多项式：最优或接近最优"""
        return self.status is SdpStatus.OPTIMAL or self.near_optimal
