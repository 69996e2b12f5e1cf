import os
import re

from .logger import LOG_TAG, logger

TOOLKIT_NAME = "attractor_sos"


def get_toolkit_version() -> str:
    """
    获取工具包版本号

    通过读取包根目录下的 metadata.yaml 文件获取版本信息。
    """
    try:
        current_dir = os.path.dirname(os.path.abspath(__file__))
        metadata_path = os.path.join(os.path.dirname(current_dir), "metadata.yaml")

        if os.path.exists(metadata_path):
            with open(metadata_path, encoding="utf-8") as f:
                # 轻量解析：只取 "version: <值>"，去掉行尾注释
                for line in f:
                    match = re.match(r"^\s*version:\s*([^#\n]+)", line)
                    if match:
                        return match.group(1).strip()
        else:
            logger.debug(f"{LOG_TAG} metadata.yaml 未找到: {metadata_path}")
    except OSError as e:
        logger.error(f"{LOG_TAG} 获取版本号失败: {e}")

    return "unknown"
