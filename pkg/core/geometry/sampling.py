"""
矩域上的均匀采样
盒域逐坐标反变换；球与环从包围盒拒绝采样，接受率低于 1% 时直接报错。
"""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np

from ...models.errors import SamplingError
from .domain import BoxDomain, MomentDomain

MIN_ACCEPTANCE = 0.01

SeedLike = int | Sequence[int]


def make_rng(seed: SeedLike) -> np.random.Generator:
    """整数或整数序列种子（序列用于按分片派生独立流）"""
    if isinstance(seed, (int, np.integer)):
        return np.random.default_rng(int(seed))
    return np.random.default_rng([int(s) for s in seed])


def acceptance_rate(domain: MomentDomain) -> float:
    """包围盒拒绝采样的理论接受率"""
    lower, upper = domain.bounding_box()
    return domain.volume / float(np.prod(upper - lower))


def sample_uniform(domain: MomentDomain, count: int, seed: SeedLike) -> np.ndarray:
    """返回 (count, dim) 的独立均匀样本，给定种子结果确定"""
    if count < 1:
        raise ValueError(f"样本数必须 ≥ 1，当前为 {count}")
    rng = make_rng(seed)
    lower, upper = domain.bounding_box()
    span = upper - lower

    if isinstance(domain, BoxDomain):
        return lower + span * rng.random((count, domain.dim))

    rate = acceptance_rate(domain)
    if rate < MIN_ACCEPTANCE:
        raise SamplingError(
            f"{domain.kind} 域的拒绝采样接受率 {rate:.3%} 低于下限 {MIN_ACCEPTANCE:.0%}"
        )

    accepted: list[np.ndarray] = []
    remaining = count
    while remaining > 0:
        batch = math.ceil(remaining / rate * 1.1) + 16
        candidates = lower + span * rng.random((batch, domain.dim))
        kept = candidates[domain.contains_many(candidates)][:remaining]
        accepted.append(kept)
        remaining -= kept.shape[0]
    return np.concatenate(accepted, axis=0)
