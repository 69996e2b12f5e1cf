"""
外逼近集合上的查询：交集、Monte Carlo 体积估计、网格求值
采样按分片派生种子 [seed, 分片号]，结果与线程数无关。
"""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from ...models.errors import DimensionMismatchError, FingerprintMismatchError
from ...utils.csv_writer import write_csv
from ...utils.logger import LOG_TAG, logger
from ..geometry.domain import MomentDomain
from ..geometry.sampling import sample_uniform
from .approximation import AttractorApproximation

MembershipPredicate = Callable[[np.ndarray], np.ndarray]

MIN_VOLUME_SAMPLES = 100
VOLUME_CHUNK = 20000
MAX_GRID_AXES = 3


class IntersectionPredicate:
    """若干 X_k 的交；每个成员都包含吸引子，交集仍是外逼近"""

    def __init__(self, approximations: Sequence[AttractorApproximation]):
        if not approximations:
            raise ValueError("求交至少需要一个外逼近")
        first = approximations[0]
        reference_X = first.X.to_dict()
        for a in approximations[1:]:
            if a.fingerprint != first.fingerprint:
                raise FingerprintMismatchError(
                    f"系统指纹不一致: {a.fingerprint[:12]} ≠ {first.fingerprint[:12]}"
                )
            if a.X.to_dict() != reference_X:
                raise FingerprintMismatchError("外逼近的状态集 X 不一致")
        self.approximations = tuple(approximations)

    @property
    def dim(self) -> int:
        return self.approximations[0].dim

    def __call__(self, points: np.ndarray) -> np.ndarray:
        mask = self.approximations[0].members_Xk(points)
        for a in self.approximations[1:]:
            mask &= a.members_Xk(points)
        return mask

    def contains(self, x: Sequence[float]) -> bool:
        return all(a.member_Xk(x) for a in self.approximations)


def intersect(approximations: Sequence[AttractorApproximation]) -> IntersectionPredicate:
    return IntersectionPredicate(approximations)


@dataclass(frozen=True)
class RegionQueryResult:
    volume_estimate: float
    standard_error: float
    sample_count: int
    seed: int
    accepted: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "volume_estimate": self.volume_estimate,
            "standard_error": self.standard_error,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "accepted": self.accepted,
        }


def _count_chunk(
    predicate: MembershipPredicate, domain: MomentDomain, size: int, seed: int, index: int
) -> int:
    points = sample_uniform(domain, size, (seed, index))
    return int(np.count_nonzero(predicate(points)))


def estimate_volume(
    predicate: MembershipPredicate,
    domain: MomentDomain,
    sample_count: int,
    seed: int,
    workers: int = 1,
    chunk_size: int = VOLUME_CHUNK,
) -> RegionQueryResult:
    """体积 ≈ vol(domain) × 命中率，标准误差 vol × √(p(1−p)/N)"""
    if sample_count < MIN_VOLUME_SAMPLES:
        raise ValueError(f"体积估计至少需要 {MIN_VOLUME_SAMPLES} 个样本，当前为 {sample_count}")
    sizes = [min(chunk_size, sample_count - start) for start in range(0, sample_count, chunk_size)]

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(
                pool.map(
                    lambda item: _count_chunk(predicate, domain, item[1], seed, item[0]),
                    enumerate(sizes),
                )
            )
    else:
        counts = [_count_chunk(predicate, domain, size, seed, i) for i, size in enumerate(sizes)]

    accepted = sum(counts)
    fraction = accepted / sample_count
    volume = domain.volume
    result = RegionQueryResult(
        volume_estimate=volume * fraction,
        standard_error=volume * math.sqrt(fraction * (1 - fraction) / sample_count),
        sample_count=sample_count,
        seed=seed,
        accepted=accepted,
    )
    logger.info(
        f"{LOG_TAG} 体积估计: {result.volume_estimate:.6g} ± {result.standard_error:.2g} "
        f"(N={sample_count}, 命中 {accepted})"
    )
    return result


@dataclass(frozen=True)
class GridAxis:
    dimension: int  # 坐标下标（0 起始）
    lower: float
    upper: float
    count: int

    def values(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, self.count)


@dataclass(frozen=True, eq=False)
class GridResult:
    variables: tuple[str, ...]
    points: np.ndarray
    w: np.ndarray
    v_min: np.ndarray
    in_X: np.ndarray
    in_Xk: np.ndarray
    in_Yk: np.ndarray

    @property
    def header(self) -> list[str]:
        return [*self.variables, "w", "v_min", "in_X", "in_Xk", "in_Yk"]

    def rows(self):
        for i in range(self.points.shape[0]):
            yield (
                *self.points[i],
                self.w[i],
                self.v_min[i],
                int(self.in_X[i]),
                int(self.in_Xk[i]),
                int(self.in_Yk[i]),
            )

    def to_csv(self, path: str | Path) -> Path:
        return write_csv(path, self.header, self.rows())


def grid_evaluate(
    approximation: AttractorApproximation,
    axes: Sequence[GridAxis],
    fixed: Mapping[int, float] | None = None,
) -> GridResult:
    """
    行优先网格（第一条轴变化最慢）
    axes 覆盖 1 到 3 个坐标，其余坐标必须在 fixed 中给定
    """
    fixed = dict(fixed or {})
    dim = approximation.dim
    if not 1 <= len(axes) <= MAX_GRID_AXES:
        raise DimensionMismatchError(f"网格轴数必须在 1 到 {MAX_GRID_AXES} 之间，当前为 {len(axes)}")
    axis_dims = [axis.dimension for axis in axes]
    covered = sorted(axis_dims + list(fixed))
    if covered != list(range(dim)):
        raise DimensionMismatchError(
            f"网格轴 {axis_dims} 与固定坐标 {sorted(fixed)} 未恰好覆盖 {dim} 个维度"
        )
    for axis in axes:
        if axis.count < 2:
            raise ValueError(f"第 {axis.dimension} 维的网格点数必须 ≥ 2，当前为 {axis.count}")

    mesh = np.meshgrid(*(axis.values() for axis in axes), indexing="ij")
    total = mesh[0].size
    points = np.empty((total, dim))
    for axis, values in zip(axes, mesh):
        points[:, axis.dimension] = values.ravel()
    for index, value in fixed.items():
        points[:, index] = value

    w = approximation.w_values(points)
    v_min = approximation.v_min_values(points)
    in_X = approximation.X.contains_many(points)
    logger.debug(f"{LOG_TAG} 网格求值完成: {total} 个点")
    return GridResult(
        variables=tuple(approximation.system.variables),
        points=points,
        w=w,
        v_min=v_min,
        in_X=in_X,
        in_Xk=in_X & (v_min >= 0.0),
        in_Yk=in_X & (w >= 1.0),
    )
