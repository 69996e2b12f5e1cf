"""
日志工具
整个工具包共享同一个 logger，所有消息统一带 [吸引子逼近] 前缀。
stdout 只留给 solve 命令输出结果路径，日志一律写 stderr。
"""

import logging
import sys

LOG_TAG = "[吸引子逼近]"

logger = logging.getLogger("attractor_sos")
logger.addHandler(logging.NullHandler())


def setup_logging(level: str | int = "INFO", stream=None) -> logging.Logger:
    """配置 stderr 日志输出（重复调用只更新级别）"""
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.INFO

    stream = stream or sys.stderr
    handler = next(
        (h for h in logger.handlers if getattr(h, "_attractor_handler", False)), None
    )
    if handler is None:
        handler = logging.StreamHandler(stream)
        handler.setFormatter(
            logging.Formatter("%(asctime)s %(levelname)-7s %(message)s", "%H:%M:%S")
        )
        handler._attractor_handler = True
        logger.addHandler(handler)

    logger.setLevel(level)
    handler.setLevel(level)
    return logger
