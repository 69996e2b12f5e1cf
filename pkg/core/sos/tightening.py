"""
k 阶 SOS 收紧问题的符号表示

决策多项式 v1、v2、w ∈ ℝ[x]_k，四条约束各自写成
    左端（决策系数的线性式 + 常数多项式） ∈ Σ + Σ_i Σ·p_i
    cover      w − v1 − v2 − 1
    w_nonneg   w
    v1_decay   连续: β·v1 − ∇v1·f        离散: v1 − α·v1∘f
    v2_growth  连续: β·v2 + ∇v2·f        离散: v2∘f − α·v2
目标为 min l′w（l 为工作坐标下矩域的 Lebesgue 矩）。
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType

import numpy as np

from ...models.errors import TighteningError
from ...models.models import DynamicalSystem, TimeKind
from ...utils.logger import LOG_TAG, logger
from ..algebra.polynomial import (
    Exponent,
    MonomialComposer,
    Polynomial,
    basis_index,
    monomial_basis,
)
from ..geometry.domain import SemialgebraicSet, ensure_ball_constraint
from ..geometry.moments import MomentVector, lebesgue_moments
from .scaling import AffineScaling, ScalingMode

# 决策多项式槽位顺序即自由变量布局 [v1 | v2 | w]
DECISION_NAMES = ("v1", "v2", "w")


class ConstraintId(Enum):
    """四条约束及其乘子槽位字母"""

    COVER = ("cover", "q")  # w − v1 − v2 − 1
    W_NONNEG = ("w_nonneg", "t")  # w
    V1_DECAY = ("v1_decay", "r")
    V2_GROWTH = ("v2_growth", "s")
    SOS_CHECK = ("sos", "g")  # 单独的 SOS 判定问题

    @property
    def label(self) -> str:
        return self.value[0]

    @property
    def slot_letter(self) -> str:
        return self.value[1]


@dataclass(frozen=True)
class GramStructure:
    """一个 SOS 乘子槽位：σ = basis′·G·basis，贡献 σ·multiplier"""

    constraint: ConstraintId
    slot: str  # q0 / q1 / ... / s3
    multiplier: Polynomial  # 1 或 p_i
    basis: tuple[Exponent, ...]

    @property
    def matrix_order(self) -> int:
        return len(self.basis)

    def polynomial(self, gram: np.ndarray) -> Polynomial:
        """basis′·G·basis·multiplier"""
        dim = self.multiplier.dim
        terms: dict[Exponent, float] = {}
        for a, ea in enumerate(self.basis):
            for b in range(a, len(self.basis)):
                value = gram[a, b] if a == b else 2.0 * gram[a, b]
                if value == 0.0:
                    continue
                exponent = tuple(x + y for x, y in zip(ea, self.basis[b]))
                terms[exponent] = terms.get(exponent, 0.0) + value
        return Polynomial(dim, terms) * self.multiplier


@dataclass(frozen=True)
class SosConstraint:
    """
    左端多项式 = Σ_var 系数·x_var + constant
    linear_terms: 单项式 -> {决策变量下标: 系数}
    """

    id: ConstraintId
    target_degree: int
    linear_terms: Mapping[Exponent, Mapping[int, float]]
    constant: Polynomial
    slots: tuple[GramStructure, ...]

    def lhs_polynomial(self, decision: np.ndarray) -> Polynomial:
        """给定决策变量取值时的左端多项式"""
        terms: dict[Exponent, float] = dict(self.constant.terms)
        for exponent, coefficients in self.linear_terms.items():
            value = sum(coef * decision[var] for var, coef in coefficients.items())
            terms[exponent] = terms.get(exponent, 0.0) + value
        return Polynomial(self.constant.dim, terms)

    def monomials(self) -> set[Exponent]:
        return set(self.linear_terms) | set(self.constant.terms)


@dataclass(frozen=True, eq=False)
class SosProgram:
    dim: int
    degree_bound: int
    decision_names: tuple[str, ...]
    decision_basis: tuple[Exponent, ...]
    constraints: tuple[SosConstraint, ...]
    objective: np.ndarray  # 长度 = 决策变量个数
    moments: MomentVector | None = None
    system: DynamicalSystem | None = None
    X: SemialgebraicSet | None = None  # 工作坐标下的状态集
    scaling: AffineScaling | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def decision_count(self) -> int:
        return len(self.decision_names) * len(self.decision_basis)

    def decision_slice(self, name: str) -> slice:
        index = self.decision_names.index(name)
        size = len(self.decision_basis)
        return slice(index * size, (index + 1) * size)

    def decision_polynomial(self, name: str, decision: np.ndarray) -> Polynomial:
        return Polynomial.from_coefficients(
            self.dim, self.decision_basis, decision[self.decision_slice(name)]
        )

    @property
    def slots(self) -> list[GramStructure]:
        return [slot for constraint in self.constraints for slot in constraint.slots]

    @property
    def equality_count(self) -> int:
        return sum(
            len(monomial_basis(self.dim, c.target_degree)) for c in self.constraints
        )


def round_up_even(degree: int) -> int:
    return degree + (degree % 2)


def target_degrees(time_kind: TimeKind, k: int, field_degree: int) -> tuple[int, int]:
    """(cover/w_nonneg 的目标次数, v1_decay/v2_growth 的目标次数)，均向上取偶"""
    if time_kind is TimeKind.CONTINUOUS:
        dynamic = k + field_degree - 1
    else:
        dynamic = k * field_degree
    return round_up_even(k), round_up_even(max(dynamic, k))


def multiplier_slots(
    constraint: ConstraintId,
    target_degree: int,
    dim: int,
    inequalities: Sequence[Polynomial],
) -> tuple[GramStructure, ...]:
    """σ0 的基底次数 D/2；σ_i 的基底次数 ⌊(D − deg p_i)/2⌋，为负则跳过"""
    letter = constraint.slot_letter
    slots = [
        GramStructure(
            constraint,
            f"{letter}0",
            Polynomial.constant(dim, 1.0),
            monomial_basis(dim, target_degree // 2),
        )
    ]
    for index, p in enumerate(inequalities, start=1):
        basis_degree = (target_degree - p.degree) // 2
        if basis_degree < 0:
            continue
        slots.append(
            GramStructure(constraint, f"{letter}{index}", p, monomial_basis(dim, basis_degree))
        )
    return tuple(slots)


def _linear_from_polynomials(
    per_variable: Mapping[int, Polynomial],
) -> dict[Exponent, dict[int, float]]:
    terms: dict[Exponent, dict[int, float]] = {}
    for var, poly in per_variable.items():
        for exponent, coefficient in poly.terms.items():
            terms.setdefault(exponent, {})
            terms[exponent][var] = terms[exponent].get(var, 0.0) + coefficient
    return terms


def _freeze(terms: dict[Exponent, dict[int, float]]) -> Mapping[Exponent, Mapping[int, float]]:
    return MappingProxyType({e: MappingProxyType(dict(v)) for e, v in terms.items()})


def _monomial_lie(exponent: Exponent, field: Sequence[Polynomial]) -> Polynomial:
    """∇(x^a)·f = Σ_i a_i x^{a−e_i} f_i"""
    dim = len(exponent)
    result = Polynomial.zero(dim)
    for i, power in enumerate(exponent):
        if power == 0:
            continue
        lowered = list(exponent)
        lowered[i] -= 1
        result = result + Polynomial(dim, {tuple(lowered): float(power)}) * field[i]
    return result


def build_tightening(
    system: DynamicalSystem,
    X: SemialgebraicSet,
    k: int,
    scaling: AffineScaling | ScalingMode | None = "off",
) -> SosProgram:
    """
    构造 k 阶收紧问题
    scaling 为 "auto"/"on"/"off" 或现成的 AffineScaling；程序本身建立在工作坐标下
    """
    if k % 2:
        raise TighteningError(f"次数 k 必须为偶数，当前为 {k}")
    field_degree = system.field.degree
    if k < max(2, field_degree):
        raise TighteningError(f"次数 k = {k} 低于 max(2, deg f) = {max(2, field_degree)}")
    if not X.inequalities:
        raise TighteningError("状态集 X 的不等式列表为空")
    if X.dim != system.dim:
        raise TighteningError(f"状态集维数 {X.dim} 与系统维数 {system.dim} 不一致")

    if not isinstance(scaling, AffineScaling):
        scaling = AffineScaling.for_domain(X.moment_domain, scaling or "off")
    X = ensure_ball_constraint(X)
    work_X = scaling.set_to_working(X)
    work_system = scaling.system_to_working(system)

    dim = system.dim
    basis = monomial_basis(dim, k)
    size = len(basis)
    v1_offset, v2_offset, w_offset = 0, size, 2 * size
    degree_static, degree_dynamic = target_degrees(system.time_kind, k, field_degree)
    discount = system.discount
    field = work_system.field
    inequalities = work_X.inequalities

    # w − v1 − v2 − 1
    cover = {}
    for a, exponent in enumerate(basis):
        cover[exponent] = {v1_offset + a: -1.0, v2_offset + a: -1.0, w_offset + a: 1.0}
    # w ≥ 0
    w_nonneg = {exponent: {w_offset + a: 1.0} for a, exponent in enumerate(basis)}

    # v1 衰减、v2 增长
    v1_polys: dict[int, Polynomial] = {}
    v2_polys: dict[int, Polynomial] = {}
    composer = MonomialComposer(field) if system.time_kind is TimeKind.DISCRETE else None
    for a, exponent in enumerate(basis):
        monomial = Polynomial(dim, {exponent: 1.0})
        if composer is None:
            lie = _monomial_lie(exponent, field.components)
            v1_polys[v1_offset + a] = monomial * discount - lie
            v2_polys[v2_offset + a] = monomial * discount + lie
        else:
            composed = composer(exponent)
            v1_polys[v1_offset + a] = monomial - composed * discount
            v2_polys[v2_offset + a] = composed - monomial * discount

    zero = Polynomial.zero(dim)
    specs = [
        (ConstraintId.COVER, degree_static, cover, Polynomial.constant(dim, -1.0)),
        (ConstraintId.W_NONNEG, degree_static, w_nonneg, zero),
        (ConstraintId.V1_DECAY, degree_dynamic, _linear_from_polynomials(v1_polys), zero),
        (ConstraintId.V2_GROWTH, degree_dynamic, _linear_from_polynomials(v2_polys), zero),
    ]
    constraints = tuple(
        SosConstraint(
            cid,
            degree,
            _freeze(linear),
            constant,
            multiplier_slots(cid, degree, dim, inequalities),
        )
        for cid, degree, linear, constant in specs
    )

    moments = lebesgue_moments(work_X.moment_domain, k)
    objective = np.zeros(3 * size)
    objective[w_offset : w_offset + size] = moments.values

    logger.debug(
        f"{LOG_TAG} 构造收紧问题: k={k}, 折扣={discount}, 目标次数 {degree_static}/{degree_dynamic}, "
        f"决策变量 {3 * size}, Gram 块 {sum(len(c.slots) for c in constraints)}"
    )
    return SosProgram(
        dim=dim,
        degree_bound=k,
        decision_names=DECISION_NAMES,
        decision_basis=basis,
        constraints=constraints,
        objective=objective,
        moments=moments,
        system=system,
        X=work_X,
        scaling=scaling,
        metadata={"original_X": X},
    )


def build_sos_check(p: Polynomial, inequalities: Sequence[Polynomial] = ()) -> SosProgram:
    """构造“p ∈ Σ + Σ_i Σ·p_i ?”的可行性问题（无决策多项式、零目标）"""
    degree = round_up_even(max(p.degree, 0))
    inequalities = list(inequalities)
    for q in inequalities:
        if q.dim != p.dim:
            raise TighteningError(f"不等式维数 {q.dim} 与多项式维数 {p.dim} 不一致")
    constraint = SosConstraint(
        ConstraintId.SOS_CHECK,
        degree,
        MappingProxyType({}),
        p,
        multiplier_slots(ConstraintId.SOS_CHECK, degree, p.dim, inequalities),
    )
    return SosProgram(
        dim=p.dim,
        degree_bound=degree,
        decision_names=(),
        decision_basis=(),
        constraints=(constraint,),
        objective=np.zeros(0),
    )


def decision_index(program: SosProgram, name: str, exponent: Exponent) -> int:
    """决策多项式 name 的单项式 exponent 对应的自由变量下标"""
    offset = program.decision_slice(name).start
    return offset + basis_index(program.dim, program.degree_bound)[tuple(exponent)]
