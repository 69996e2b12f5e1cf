import logging

import numpy as np

from ...models.models import TimeKind
from ...models.run_config import RunConfig
from ...utils.logger import LOG_TAG, logger
from ..algebra.polynomial import binomial_count
from ..geometry.sampling import sample_uniform
from ..sos.tightening import target_degrees

# 超过此规模建议导出 SDPA 交给外部求解器
MAX_EMBEDDED_BLOCK_ORDER = 300
MAX_EMBEDDED_ROWS = 6000

SPOT_CHECK_SAMPLES = 2000


class ConfigValidator:
    """
    配置校验器
    schema 校验（pydantic）之后运行，只给出警告和少量自动修正，不拒绝配置。
    """

    @staticmethod
    def validate(config: RunConfig) -> tuple[RunConfig, list[str]]:
        """
        执行所有语义检查
        :param config: 已通过 schema 校验的配置
        :return: (可能被修正的配置, 警告列表)
        """
        logger.debug(f"{LOG_TAG} 正在进行配置语义检查...")
        warnings: list[str] = []

        config = ConfigValidator._validate_log_level(config, warnings)
        ConfigValidator._check_domain_descriptor(config, warnings)
        if config.time_kind is TimeKind.DISCRETE:
            ConfigValidator._check_injectivity(config, warnings)
        ConfigValidator._check_problem_size(config, warnings)

        for message in warnings:
            logger.warning(f"{LOG_TAG} 配置警告: {message}")
        logger.debug(f"{LOG_TAG} 配置语义检查完成，{len(warnings)} 条警告")
        return config, warnings

    @staticmethod
    def _validate_log_level(config: RunConfig, warnings: list[str]) -> RunConfig:
        level = config.log_level.upper()
        if not isinstance(logging.getLevelName(level), int):
            warnings.append(f"日志级别 {config.log_level!r} 无效，已修正为 INFO")
            return config.model_copy(update={"log_level": "INFO"})
        if level != config.log_level:
            return config.model_copy(update={"log_level": level})
        return config

    @staticmethod
    def _check_domain_descriptor(config: RunConfig, warnings: list[str]):
        """额外不等式切掉了矩域的一部分时，目标中的矩仍按整个矩域计算"""
        if not config.domain.inequalities:
            return
        X = config.build_set()
        mismatch = X.descriptor_mismatch(SPOT_CHECK_SAMPLES, seed=config.seed or 0)
        if mismatch > 0:
            warnings.append(
                f"额外不等式与矩域描述不一致（抽查 {mismatch:.1%} 的点判定不同），"
                "Lebesgue 矩仍按矩域计算"
            )

    @staticmethod
    def _check_injectivity(config: RunConfig, warnings: list[str]):
        """离散 v2_growth 约束假定映射在 X 上单射；抽查 Jacobian 行列式是否变号"""
        system = config.build_system()
        domain = config.domain.build_domain()
        points = sample_uniform(domain, SPOT_CHECK_SAMPLES, config.seed or 0)
        n = system.dim
        jacobian = np.empty((points.shape[0], n, n))
        for i, component in enumerate(system.field):
            for j, partial in enumerate(component.gradient()):
                jacobian[:, i, j] = partial.evaluate_many(points)
        determinant = np.linalg.det(jacobian)
        if np.any(determinant > 0) and np.any(determinant < 0):
            warnings.append("离散映射的 Jacobian 行列式在 X 上变号，映射可能不是单射")
        elif np.any(np.isclose(determinant, 0.0)):
            warnings.append("离散映射的 Jacobian 行列式在 X 上接近 0，单射性未验证")

    @staticmethod
    def _check_problem_size(config: RunConfig, warnings: list[str]):
        system = config.build_system()
        n = system.dim
        for k in config.tightening.degrees:
            _, dynamic_degree = target_degrees(system.time_kind, k, system.field.degree)
            block_order = binomial_count(n, dynamic_degree // 2)
            rows = 2 * binomial_count(n, k) + 2 * binomial_count(n, dynamic_degree)
            if block_order > MAX_EMBEDDED_BLOCK_ORDER or rows > MAX_EMBEDDED_ROWS:
                warnings.append(
                    f"k={k} 的 SDP 规模较大（最大 Gram 块 {block_order} 阶，约 {rows} 行等式），"
                    "内置求解器可能很慢，建议 export-sdpa 后使用外部求解器"
                )
