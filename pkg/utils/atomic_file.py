"""
原子文件写入：先写临时文件，再 os.replace 覆盖目标
"""

from __future__ import annotations

import os
from pathlib import Path

from .logger import LOG_TAG, logger


def atomic_write_text(path: str | os.PathLike, text: str, newline: str | None = None) -> Path:
    """把 text 原子写入 path，失败时清理临时文件并重新抛出"""
    target = Path(path)
    if target.parent and not target.parent.exists():
        target.parent.mkdir(parents=True, exist_ok=True)

    temp_file = target.with_name(target.name + ".tmp")
    try:
        with open(temp_file, "w", encoding="utf-8", newline=newline) as f:
            f.write(text)
        os.replace(temp_file, target)
    except Exception as e:
        logger.error(f"{LOG_TAG} 写入文件失败 {target}: {e}")
        if temp_file.exists():
            try:
                temp_file.unlink()
            except OSError:
                pass
        raise
    return target
