"""
吸引子外逼近核心服务
把收紧构造、编译、求解、恢复、认证串成流水线，并提供结果文档上的各类查询。
"""

from __future__ import annotations

import asyncio
import os
import time
from collections.abc import Sequence
from pathlib import Path

from ...models.errors import AttractorToolkitError, ConfigError
from ...models.models import ApproximationSet, DynamicalSystem, TimeKind, TrajectorySample
from ...models.run_config import RunConfig
from ...utils.logger import LOG_TAG, logger
from ..attractor.approximation import AttractorApproximation
from ..attractor.certification import certify
from ..attractor.queries import (
    GridAxis,
    GridResult,
    RegionQueryResult,
    estimate_volume,
    grid_evaluate,
    intersect,
)
from ..dynamics.simulation_service import SimulationDefaults, sample_attractor
from ..geometry.domain import SemialgebraicSet
from ..sdp.problem import SdpStatus, SolverSettings
from ..sdp.residuals import residuals
from ..sdp.sdpa_io import export_sdpa
from ..sdp.solver import solve
from ..sos.compiler import compile_to_sdp, recover_solution
from ..sos.scaling import ScalingMode
from ..sos.tightening import build_tightening
from ..storage.result_store import ResultDocument, SolveRecord


def solve_degree(
    system: DynamicalSystem,
    X: SemialgebraicSet,
    k: int,
    settings: SolverSettings,
    scaling: ScalingMode = "auto",
    certify_samples: int = 10000,
    seed: int = 0,
) -> SolveRecord:
    """单个 (k, 折扣) 的完整流水线：构造 → 编译 → 求解 → 恢复 → 认证"""
    started = time.perf_counter()
    program = build_tightening(system, X, k, scaling)
    compiled = compile_to_sdp(program)
    logger.info(
        f"{LOG_TAG} 开始求解 k={k}, 折扣={system.discount}: {compiled.problem.size_summary()}"
    )
    solution = solve(compiled.problem, settings)
    record = SolveRecord(
        k=k,
        discount=system.discount,
        status=solution.status,
        iterations=solution.iterations,
        near_optimal=solution.near_optimal,
        sdp_residuals=solution.residuals.to_dict(),
    )

    if not solution.is_usable:
        record.error = f"SDP 求解未成功: {solution.status.value}"
        record.wall_time = time.perf_counter() - started
        logger.error(f"{LOG_TAG} k={k} 求解失败: {solution.status.value}")
        return record

    check = residuals(compiled.problem, solution)
    logger.debug(
        f"{LOG_TAG} k={k} 独立残差复算: 等式 {check.equality_inf_norm:.3e}, "
        f"最小特征值 {check.min_block_eigenvalue:.3e}"
    )
    recovered = recover_solution(compiled, solution)
    certification = certify(program, recovered, certify_samples, seed)
    record.solution = recovered
    record.approximation = AttractorApproximation.from_recovered(
        system, X, k, recovered, program.scaling, certification
    )
    record.wall_time = time.perf_counter() - started
    logger.info(
        f"{LOG_TAG} k={k}, 折扣={system.discount}: d_k = {record.approximation.d_k:.8g}, "
        f"{solution.status.value}, {solution.iterations} 次迭代, 用时 {record.wall_time:.2f}s"
    )
    return record


class AttractorService:
    """按运行配置驱动各个动作"""

    def __init__(self, config: RunConfig):
        self.config = config
        self.X = config.build_set()

    @property
    def seed(self) -> int:
        if self.config.seed is None:
            raise ConfigError("该动作需要随机种子，请在配置中设置 seed 或使用 --seed")
        return self.config.seed

    def _jobs(self) -> list[tuple[int, float]]:
        return [
            (k, discount)
            for discount in self.config.discount_sweep()
            for k in self.config.tightening.degrees
        ]

    def _solve_one(self, k: int, discount: float) -> SolveRecord:
        try:
            return solve_degree(
                self.config.build_system(discount),
                self.X,
                k,
                self.config.solver,
                self.config.domain.scaling,
                self.config.certify.samples,
                self.seed,
            )
        except AttractorToolkitError as e:
            logger.error(f"{LOG_TAG} k={k}, 折扣={discount} 流水线出错: {e}")
            return SolveRecord(k=k, discount=discount, status=SdpStatus.NUMERICAL_TROUBLE, error=str(e))

    async def solve_all(self) -> ResultDocument:
        """每个 (折扣, k) 组合独立求解，不做热启动；记录顺序与配置一致"""
        jobs = self._jobs()
        if self.config.tightening.parallel and len(jobs) > 1:
            records = await asyncio.gather(
                *(asyncio.to_thread(self._solve_one, k, discount) for k, discount in jobs)
            )
        else:
            records = [self._solve_one(k, discount) for k, discount in jobs]
        return ResultDocument(config=self.config, records=list(records))

    # ------------------------------------------------------------------ 结果文档上的动作

    def recertify(self, document: ResultDocument, samples: int | None = None) -> ResultDocument:
        """用新的样本重新认证文档中保存了原始解的记录"""
        samples = self.config.certify.samples if samples is None else samples
        for record in document.records:
            approximation = record.approximation
            if approximation is None or record.solution is None:
                logger.warning(f"{LOG_TAG} 记录 {record.key} 没有可认证的解，跳过")
                continue
            program = build_tightening(
                approximation.system, approximation.X, approximation.k, approximation.scaling
            )
            certification = certify(program, record.solution, samples, self.seed)
            record.approximation = approximation.with_certification(certification)
        return document

    def volume(
        self,
        document: ResultDocument,
        which: ApproximationSet | None = None,
        samples: int | None = None,
        degree: int | None = None,
    ) -> RegionQueryResult:
        section = self.config.volume
        which = which or section.approximation_set
        samples = samples or section.samples
        if which is ApproximationSet.INTERSECTION:
            predicate = intersect(document.approximations)
        else:
            approximation = document.select(degree or section.degree).approximation
            predicate = approximation.membership(which)
        return estimate_volume(
            predicate, self.X.moment_domain, samples, self.seed, workers=section.workers
        )

    def grid(self, document: ResultDocument, degree: int | None = None) -> GridResult:
        section = self.config.grid
        if section is None:
            raise ConfigError("配置中缺少 [grid] 节")
        approximation = document.select(degree or section.degree).approximation
        axes = [GridAxis(a.dimension, a.lower, a.upper, a.count) for a in section.axes]
        fixed = {f.dimension: f.value for f in section.fixed}
        return grid_evaluate(approximation, axes, fixed)

    def simulate(self) -> TrajectorySample:
        section = self.config.simulate
        system = self.config.build_system()
        defaults = SimulationDefaults(dt=section.dt, count=section.count, stride=section.stride)
        if section.burn_in is not None:
            if system.time_kind is TimeKind.CONTINUOUS:
                defaults.burn_in_time = section.burn_in
            else:
                defaults.burn_in_steps = int(section.burn_in)
        x0: Sequence[float] = section.initial_state or self.X.moment_domain.center
        return sample_attractor(
            system,
            self.X,
            x0,
            defaults.burn_in_for(system),
            defaults.count,
            dt=defaults.dt,
            stride=defaults.stride,
        )

    def export_sdpa(self, destination: str | os.PathLike, degree: int | None = None) -> Path:
        k = degree or self.config.export.degree or self.config.tightening.degrees[0]
        program = build_tightening(
            self.config.build_system(), self.X, k, self.config.domain.scaling
        )
        compiled = compile_to_sdp(program)
        export_sdpa(compiled.problem, destination)
        return Path(destination)
