"""模拟服务：长轨迹仿真、丢弃预热段，产出吸引子附近的验证样本。"""

from __future__ import annotations

import os
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ...models.errors import TrajectoryExitError
from ...models.models import DynamicalSystem, TimeKind, TrajectorySample
from ...utils.csv_writer import write_csv
from ...utils.logger import LOG_TAG, logger
from ..geometry.domain import SemialgebraicSet
from .integrators import step_map, step_rk4


@dataclass(slots=True)
class SimulationDefaults:
    """连续系统与离散系统的默认仿真参数。"""

    dt: float = 1e-3
    burn_in_time: float = 50.0  # 连续系统预热时长
    burn_in_steps: int = 1000  # 离散系统预热步数
    count: int = 10_000
    stride: int = 1

    def burn_in_for(self, system: DynamicalSystem) -> int:
        """把预热设置换算为步数。"""
        if system.time_kind is TimeKind.CONTINUOUS:
            return max(1, round(self.burn_in_time / self.dt))
        return self.burn_in_steps


def _advance(system: DynamicalSystem, state: np.ndarray, dt: float) -> np.ndarray:
    if system.time_kind is TimeKind.CONTINUOUS:
        return step_rk4(system.field, state, dt)
    return step_map(system.field, state)


def sample_attractor(
    system: DynamicalSystem,
    X: SemialgebraicSet,
    x0: Sequence[float],
    burn_in: int,
    count: int,
    dt: float = 1e-3,
    stride: int = 1,
) -> TrajectorySample:
    """
    仿真 burn_in + count·stride 步，丢弃预热段后每 stride 步保留一个点。
    保留阶段离开 X 视为错误（初值或 X 选取不当）。
    """
    if burn_in < 1 or count < 1:
        raise ValueError(f"burn_in 与 count 必须 ≥ 1，当前为 {burn_in} / {count}")
    if stride < 1:
        raise ValueError(f"stride 必须 ≥ 1，当前为 {stride}")
    if system.time_kind is TimeKind.CONTINUOUS and not dt > 0:
        raise ValueError(f"连续系统要求 dt > 0，当前为 {dt}")
    step = dt if system.time_kind is TimeKind.CONTINUOUS else 1.0

    state = np.asarray(x0, dtype=float)
    if not X.contains(state):
        raise TrajectoryExitError(f"初值 {tuple(state)} 不在状态集 X 内")

    logger.debug(
        f"{LOG_TAG} 开始仿真: 预热 {burn_in} 步, 保留 {count} 点 (间隔 {stride} 步, 步长 {step})"
    )
    for _ in range(burn_in):
        state = _advance(system, state, dt)

    points = np.empty((count, system.dim))
    for index in range(count):
        for _ in range(stride):
            state = _advance(system, state, dt)
        points[index] = state

    inside = X.contains_many(points)
    if not inside.all():
        first = int(np.argmax(~inside))
        raise TrajectoryExitError(
            f"轨迹在保留阶段第 {first} 个点离开 X: {tuple(points[first])}"
        )

    times = None
    if system.time_kind is TimeKind.CONTINUOUS:
        times = (burn_in + stride * (np.arange(count) + 1)) * dt
    logger.info(f"{LOG_TAG} 仿真完成: {count} 个吸引子样本")
    return TrajectorySample(
        points=points,
        burn_in_dropped=burn_in,
        step=step,
        times=times,
        metadata={"x0": [float(v) for v in x0], "stride": stride},
    )


def write_trajectory_csv(
    sample: TrajectorySample,
    path: str | os.PathLike,
    variables: Sequence[str],
) -> Path:
    """每行一个点，列顺序与状态变量顺序一致。"""
    if len(variables) != sample.dim:
        raise ValueError(f"变量个数 {len(variables)} 与样本维数 {sample.dim} 不一致")
    header = list(variables)
    rows = sample.points.tolist()
    if sample.times is not None:
        header = ["t", *header]
        rows = [[t, *row] for t, row in zip(sample.times.tolist(), rows)]
    return write_csv(path, header, rows)
