"""
SOS 程序 -> 块对角 SDP

每个乘子槽位一个 PSD 块，每个决策系数一个自由变量；
每条约束在其目标次数基底的每个单项式 γ 上生成一行等式：
    Σ_slots ⟨A_γ, G⟩ − L_γ·x = constant_γ
其中 L_γ·x + constant_γ 是约束左端在 γ 上的系数。
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from ...models.errors import CompilationError, SolutionStatusError
from ...utils.logger import LOG_TAG, logger
from ..algebra.polynomial import Exponent, Polynomial, basis_index, monomial_basis
from ..sdp.problem import BlockEntry, SdpProblem, SdpProblemBuilder, SdpSolution
from .tightening import ConstraintId, GramStructure, SosProgram


@dataclass(frozen=True)
class SlotPlacement:
    slot: GramStructure
    block: int


@dataclass(frozen=True, eq=False)
class RecoveryMap:
    """SDP 变量与决策系数、Gram 矩阵之间的线性对应"""

    dim: int
    decision_names: tuple[str, ...]
    decision_basis: tuple[Exponent, ...]
    placements: tuple[SlotPlacement, ...]

    @property
    def decision_count(self) -> int:
        return len(self.decision_names) * len(self.decision_basis)

    def decision_values(self, free_values: np.ndarray) -> np.ndarray:
        return np.asarray(free_values, dtype=float)[: self.decision_count].copy()

    def decision_polynomials(self, decision: np.ndarray) -> dict[str, Polynomial]:
        size = len(self.decision_basis)
        return {
            name: Polynomial.from_coefficients(
                self.dim, self.decision_basis, decision[index * size : (index + 1) * size]
            )
            for index, name in enumerate(self.decision_names)
        }

    def grams(self, block_values: list[np.ndarray]) -> dict[str, np.ndarray]:
        return {p.slot.slot: np.array(block_values[p.block], dtype=float) for p in self.placements}

    def assemble(
        self, decision: np.ndarray, grams: Mapping[str, np.ndarray]
    ) -> tuple[list[np.ndarray], np.ndarray]:
        """recover 的逆映射：由决策系数和 Gram 矩阵拼出 SDP 变量（缺失槽位补零）"""
        decision = np.asarray(decision, dtype=float)
        if decision.shape != (self.decision_count,):
            raise CompilationError(
                f"决策变量长度 {decision.shape} 与期望 {self.decision_count} 不一致"
            )
        blocks = []
        for placement in self.placements:
            order = placement.slot.matrix_order
            gram = grams.get(placement.slot.slot)
            blocks.append(np.zeros((order, order)) if gram is None else np.array(gram, dtype=float))
        return blocks, decision.copy()


@dataclass(frozen=True, eq=False)
class CompiledSdp:
    problem: SdpProblem
    recovery: RecoveryMap
    program: SosProgram
    row_labels: tuple[tuple[ConstraintId, Exponent], ...]


@dataclass(eq=False)
class RecoveredSolution:
    decision: dict[str, Polynomial]
    grams: dict[str, np.ndarray]
    decision_values: np.ndarray
    objective_value: float

    @property
    def v1(self) -> Polynomial:
        return self.decision["v1"]

    @property
    def v2(self) -> Polynomial:
        return self.decision["v2"]

    @property
    def w(self) -> Polynomial:
        return self.decision["w"]


def _slot_entries(slot: GramStructure, block: int) -> dict[Exponent, list[BlockEntry]]:
    """G_ab 在 basis_a·basis_b·p 展开后各单项式上的系数（对称约定下取 p[δ]）"""
    entries: dict[Exponent, list[BlockEntry]] = {}
    basis = slot.basis
    multiplier_terms = list(slot.multiplier.terms.items())
    for a, ea in enumerate(basis):
        for b in range(a, len(basis)):
            pair = tuple(x + y for x, y in zip(ea, basis[b]))
            for delta, coefficient in multiplier_terms:
                gamma = tuple(x + y for x, y in zip(pair, delta))
                entries.setdefault(gamma, []).append((block, a, b, coefficient))
    return entries


def compile_to_sdp(program: SosProgram) -> CompiledSdp:
    builder = SdpProblemBuilder()
    builder.add_free(program.decision_count)

    placements: list[SlotPlacement] = []
    row_labels: list[tuple[ConstraintId, Exponent]] = []
    for constraint in program.constraints:
        degree = constraint.target_degree
        index = basis_index(program.dim, degree)

        stray = [e for e in constraint.monomials() if e not in index]
        if stray:
            raise CompilationError(
                f"约束 {constraint.id.label} 的单项式 {stray[0]} 超出目标次数 {degree}"
            )

        rows: dict[Exponent, list[BlockEntry]] = {}
        for slot in constraint.slots:
            block = builder.add_block(slot.matrix_order)
            placements.append(SlotPlacement(slot, block))
            for gamma, entries in _slot_entries(slot, block).items():
                if gamma not in index:
                    raise CompilationError(
                        f"槽位 {slot.slot} 的乘积单项式 {gamma} 超出目标次数 {degree}"
                    )
                rows.setdefault(gamma, []).extend(entries)

        for gamma in monomial_basis(program.dim, degree):
            free_entries = {
                var: -coef for var, coef in constraint.linear_terms.get(gamma, {}).items()
            }
            block_entries = rows.get(gamma, [])
            try:
                builder.add_constraint(
                    block_entries, free_entries, constraint.constant.coefficient(gamma)
                )
            except ValueError as e:
                raise CompilationError(
                    f"约束 {constraint.id.label} 的单项式 {gamma} 不出现在任何等式变量中"
                ) from e
            row_labels.append((constraint.id, gamma))

    builder.add_objective(
        free_entries={i: float(v) for i, v in enumerate(program.objective) if v != 0.0}
    )
    problem = builder.build()
    recovery = RecoveryMap(
        program.dim, program.decision_names, program.decision_basis, tuple(placements)
    )
    logger.debug(f"{LOG_TAG} 编译完成: {problem.size_summary()}")
    return CompiledSdp(problem, recovery, program, tuple(row_labels))


def recover_solution(compiled: CompiledSdp, solution: SdpSolution) -> RecoveredSolution:
    """由（接近）最优的 SDP 解拼回 v1、v2、w 与各乘子 Gram 矩阵"""
    if not solution.is_usable:
        raise SolutionStatusError(
            f"SDP 状态为 {solution.status.value}，且未达到接近最优，无法恢复多项式"
        )
    recovery = compiled.recovery
    decision = recovery.decision_values(solution.free_values)
    objective = float(compiled.program.objective @ decision) if decision.size else 0.0
    return RecoveredSolution(
        decision=recovery.decision_polynomials(decision),
        grams=recovery.grams(solution.block_values),
        decision_values=decision,
        objective_value=objective,
    )
