"""
命令行入口
    python -m attractor_sos <verb> [选项]
verb: solve / certify / volume / grid / simulate / export-sdpa
退出码: 0 成功；2 配置、文件缺失、维数/指纹不一致或轨迹离开 X / 发散；3 求解失败（部分结果仍会写出）
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from collections.abc import Sequence
from pathlib import Path

from .core.app.attractor_service import AttractorService
from .core.dynamics.simulation_service import write_trajectory_csv
from .core.storage.result_store import ResultDocument
from .core.support.config_validator import ConfigValidator
from .models.errors import (
    AttractorToolkitError,
    ConfigError,
    DimensionMismatchError,
    DivergenceError,
    FingerprintMismatchError,
    SamplingError,
    TrajectoryExitError,
)
from .models.models import ApproximationSet
from .models.run_config import RunConfig, load_config, parse_overrides
from .utils.atomic_file import atomic_write_text
from .utils.formatters import ReportFormatter
from .utils.logger import LOG_TAG, logger, setup_logging
from .utils.version import TOOLKIT_NAME, get_toolkit_version

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

VERBS = ("solve", "certify", "volume", "grid", "simulate", "export-sdpa")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=TOOLKIT_NAME,
        description="多项式动力系统全局吸引子的 SOS 外逼近工具",
    )
    parser.add_argument("--version", action="version", version=get_toolkit_version())
    parser.add_argument("verb", choices=VERBS)
    parser.add_argument("--config", help="配置文件路径或内置示例名 (lorenz / henon / vanderpol / vanderpol_disk)")
    parser.add_argument("--result", help="solve 生成的结果文档 (JSON)")
    parser.add_argument("--out", help="输出路径")
    parser.add_argument("--seed", type=int, help="覆盖配置中的随机种子")
    parser.add_argument("--samples", type=int, help="采样数 (certify / volume)")
    parser.add_argument("--degree", type=int, help="选用的次数 k (volume / grid / export-sdpa)")
    parser.add_argument(
        "--set",
        dest="approximation_set",
        choices=[s.value for s in ApproximationSet],
        help="体积估计使用的集合",
    )
    parser.add_argument(
        "--override",
        action="append",
        metavar="KEY=VALUE",
        help="覆盖配置项，例如 --override tightening.degrees=[4,6]",
    )
    parser.add_argument("--log-level", help="日志级别 (默认取配置中的 log_level)")
    return parser


def _default_out(args: argparse.Namespace, suffix: str) -> Path:
    source = args.result or args.config or TOOLKIT_NAME
    stem = Path(source).stem.removesuffix("_result")
    return Path(f"{stem}{suffix}")


def _load_run_config(args: argparse.Namespace) -> RunConfig:
    overrides = parse_overrides(args.override)
    if args.seed is not None:
        overrides.append(("seed", str(args.seed)))
    if args.config is None:
        raise ConfigError(f"{args.verb} 需要 --config")
    config, _ = ConfigValidator.validate(load_config(args.config, overrides))
    if args.log_level is None:
        setup_logging(config.log_level)
    return config


def _load_document(args: argparse.Namespace) -> tuple[AttractorService, ResultDocument]:
    if args.result is None:
        raise ConfigError(f"{args.verb} 需要 --result")
    document = ResultDocument.load(args.result)
    config = document.config
    if args.log_level is None:
        setup_logging(config.log_level)
    if args.seed is not None:
        config = config.model_copy(update={"seed": args.seed})
    return AttractorService(config), document


def cmd_solve(args: argparse.Namespace) -> int:
    config = _load_run_config(args)
    service = AttractorService(config)
    document = asyncio.run(service.solve_all())
    out = Path(args.out) if args.out else _default_out(args, "_result.json")
    document.save(out)
    logger.info(f"{LOG_TAG} {ReportFormatter.format_document(document)}")
    print(out)
    if not document.all_succeeded:
        logger.error(f"{LOG_TAG} 部分求解未达到最优或认证被拒绝，结果已写入 {out}")
        return EXIT_SOLVER
    return EXIT_OK


def cmd_certify(args: argparse.Namespace) -> int:
    service, document = _load_document(args)
    service.recertify(document, args.samples)
    document.save(Path(args.out or args.result))
    logger.info(f"{LOG_TAG} {ReportFormatter.format_document(document)}")
    return EXIT_OK if document.all_succeeded else EXIT_SOLVER


def cmd_volume(args: argparse.Namespace) -> int:
    service, document = _load_document(args)
    which = ApproximationSet(args.approximation_set) if args.approximation_set else None
    result = service.volume(document, which, args.samples, args.degree)
    out = Path(args.out) if args.out else _default_out(args, "_volume.json")
    atomic_write_text(out, json.dumps(result.to_dict(), indent=2) + "\n")
    logger.info(f"{LOG_TAG} {ReportFormatter.format_volume(result)} -> {out}")
    return EXIT_OK


def cmd_grid(args: argparse.Namespace) -> int:
    service, document = _load_document(args)
    grid = service.grid(document, args.degree)
    out = grid.to_csv(Path(args.out) if args.out else _default_out(args, "_grid.csv"))
    logger.info(f"{LOG_TAG} 网格 {grid.points.shape[0]} 个点已写入 {out}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_run_config(args)
    sample = AttractorService(config).simulate()
    out = Path(args.out) if args.out else _default_out(args, "_trajectory.csv")
    write_trajectory_csv(sample, out, config.variables)
    logger.info(f"{LOG_TAG} 轨迹样本 {sample.count} 个点已写入 {out}")
    return EXIT_OK


def cmd_export_sdpa(args: argparse.Namespace) -> int:
    config = _load_run_config(args)
    out = Path(args.out) if args.out else _default_out(args, ".dat-s")
    AttractorService(config).export_sdpa(out, args.degree)
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "certify": cmd_certify,
    "volume": cmd_volume,
    "grid": cmd_grid,
    "simulate": cmd_simulate,
    "export-sdpa": cmd_export_sdpa,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level or "INFO")
    try:
        return COMMANDS[args.verb](args)
    except (ConfigError, DimensionMismatchError, FingerprintMismatchError) as e:
        logger.error(f"{LOG_TAG} {e}")
        return EXIT_CONFIG
    except FileNotFoundError as e:
        logger.error(f"{LOG_TAG} 文件不存在: {e.filename}")
        return EXIT_CONFIG
    except (TrajectoryExitError, DivergenceError, SamplingError) as e:
        logger.error(f"{LOG_TAG} {e}")
        return EXIT_CONFIG
    except AttractorToolkitError as e:
        logger.error(f"{LOG_TAG} {e}", exc_info=True)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
