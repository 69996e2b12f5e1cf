"""
定步长数值积分与映射迭代
"""

from __future__ import annotations

from collections.abc import Callable, Sequence

import numpy as np

from ...models.errors import DivergenceError
from ..algebra.polynomial import PolynomialMap

BoundsPredicate = Callable[[np.ndarray], bool]


def _check_finite(x: np.ndarray, where: str) -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise DivergenceError(f"{where}出现非有限值: {x}")
    return x


def step_rk4(f: PolynomialMap, x: Sequence[float], dt: float) -> np.ndarray:
    """经典四阶 Runge-Kutta 单步"""
    if not dt > 0:
        raise ValueError(f"步长必须 > 0，当前为 {dt}")
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = f.evaluate(x)
        k2 = f.evaluate(x + 0.5 * dt * k1)
        k3 = f.evaluate(x + 0.5 * dt * k2)
        k4 = f.evaluate(x + dt * k3)
        result = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return _check_finite(result, "RK4 积分")


def integrate(f: PolynomialMap, x: Sequence[float], dt: float, steps: int) -> np.ndarray:
    """连续积分 steps 步，只返回终点"""
    state = np.asarray(x, dtype=float)
    for _ in range(steps):
        state = step_rk4(f, state, dt)
    return state


def iterate_map(
    f: PolynomialMap,
    x: Sequence[float],
    steps: int,
    bounds: BoundsPredicate | None = None,
) -> list[np.ndarray]:
    """
    返回 x, f(x), ..., f^steps(x)
    给定 bounds 时，第一个不满足 bounds 的迭代点之前截断（该点不计入）
    """
    if steps < 0:
        raise ValueError(f"迭代步数必须 ≥ 0，当前为 {steps}")
    state = np.asarray(x, dtype=float)
    sequence = [state]
    for _ in range(steps):
        with np.errstate(over="ignore", invalid="ignore"):
            state = f.evaluate(state)
        _check_finite(state, "映射迭代")
        if bounds is not None and not bounds(state):
            break
        sequence.append(state)
    return sequence


def reversed_field(f: PolynomialMap) -> PolynomialMap:
    """时间反向的向量场 −f"""
    return PolynomialMap([-component for component in f])


def step_map(f: PolynomialMap, x: Sequence[float]) -> np.ndarray:
    """离散映射单步"""
    with np.errstate(over="ignore", invalid="ignore"):
        result = f.evaluate(np.asarray(x, dtype=float))
    return _check_finite(result, "映射迭代")
