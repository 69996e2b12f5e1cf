"""
SDPA 稀疏格式 (.dat-s) 读写

SDPA 的对偶形式为  max ⟨F0, Y⟩  s.t. ⟨F_i, Y⟩ = c_i, Y ⪰ 0。
本工具包的最小化问题按 Y = X、F_i = A_i、c_i = b_i、F0 = −C 映射，
因此外部求解器报告的目标值与这里的目标值互为相反数。
自由变量拆成 x⁺ − x⁻，放在最后一个负尺寸（对角）块中：
第 k 个自由变量对应对角位置 k 与 nf + k，两处系数互为相反数。
"""

from __future__ import annotations

import io
import os
import re
from collections.abc import Iterable
from pathlib import Path
from typing import TextIO

from ...models.errors import SdpFormatError
from ...utils.atomic_file import atomic_write_text
from ...utils.logger import LOG_TAG, logger
from .problem import BlockEntry, SdpProblem, SdpProblemBuilder

_SEPARATORS = re.compile(r"[{},()]")


def _format_value(value: float) -> str:
    return repr(float(value))


def _matrix_lines(
    matno: int,
    block_entries: Iterable[BlockEntry],
    free_entries: Iterable[tuple[int, float]],
    free_count: int,
    free_block: int,
    sign: float,
) -> list[str]:
    rows: list[tuple[int, int, int, float]] = []
    for block, i, j, value in block_entries:
        rows.append((block + 1, i + 1, j + 1, sign * value))
    for index, value in free_entries:
        rows.append((free_block, index + 1, index + 1, sign * value))
        rows.append((free_block, free_count + index + 1, free_count + index + 1, -sign * value))
    rows.sort(key=lambda row: row[:3])
    return [
        f"{matno} {block} {i} {j} {_format_value(value)}"
        for block, i, j, value in rows
        if value != 0.0
    ]


def render_sdpa(problem: SdpProblem) -> str:
    """生成 .dat-s 文本；同一问题逐字节稳定"""
    sizes = [str(order) for order in problem.block_orders]
    free_block = len(problem.block_orders) + 1
    if problem.free_count:
        sizes.append(str(-2 * problem.free_count))

    lines = [
        str(problem.constraint_count),
        str(len(sizes)),
        " ".join(sizes),
        " ".join(_format_value(c.rhs) for c in problem.constraints),
    ]
    lines += _matrix_lines(
        0, problem.objective_blocks, problem.objective_free, problem.free_count, free_block, -1.0
    )
    for matno, constraint in enumerate(problem.constraints, start=1):
        lines += _matrix_lines(
            matno,
            constraint.block_entries,
            constraint.free_entries,
            problem.free_count,
            free_block,
            1.0,
        )
    return "\n".join(lines) + "\n"


def export_sdpa(problem: SdpProblem, destination: str | os.PathLike | TextIO | None = None) -> str:
    """导出 SDPA 稀疏格式；destination 可以是路径或文本流，返回文本"""
    text = render_sdpa(problem)
    if destination is None:
        return text
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        path = atomic_write_text(destination, text)
        logger.info(f"{LOG_TAG} SDPA 文件已写入: {path} ({problem.size_summary()})")
    return text


def _tokens(text: str) -> list[str]:
    body = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith(('"', "*")):
            continue
        body.append(_SEPARATORS.sub(" ", stripped))
    return " ".join(body).split()


def _split_free_block(
    size: int, entries: dict[int, dict[tuple[int, int], float]]
) -> bool:
    """判断对角块是否是成对相反的自由变量拆分"""
    if size % 2:
        return False
    half = size // 2
    for matrix in entries.values():
        for (i, j), value in matrix.items():
            if i != j:
                return False
            partner = i + half if i < half else i - half
            if matrix.get((partner, partner), 0.0) != -value:
                return False
    return True


def parse_sdpa(text: str) -> SdpProblem:
    """解析 .dat-s 文本；识别自由变量拆分块并还原为自由变量"""
    tokens = _tokens(text)
    try:
        position = 0
        m = int(tokens[position])
        nblocks = int(tokens[position + 1])
        position += 2
        sizes = [int(float(t)) for t in tokens[position : position + nblocks]]
        position += nblocks
        rhs = [float(t) for t in tokens[position : position + m]]
        position += m
    except (IndexError, ValueError) as e:
        raise SdpFormatError(f"SDPA 文件头无法解析: {e}") from e
    if len(sizes) != nblocks or len(rhs) != m:
        raise SdpFormatError("SDPA 文件头长度不足")

    remaining = tokens[position:]
    if len(remaining) % 5:
        raise SdpFormatError(f"矩阵项个数不是 5 的倍数: 剩余 {len(remaining)} 个记号")

    # 每个块: matno -> {(i, j): value}（0 起始、上三角）
    per_block: list[dict[int, dict[tuple[int, int], float]]] = [{} for _ in sizes]
    for offset in range(0, len(remaining), 5):
        try:
            matno, block, i, j = (int(t) for t in remaining[offset : offset + 4])
            value = float(remaining[offset + 4])
        except ValueError as e:
            raise SdpFormatError(f"矩阵项无法解析: {remaining[offset:offset + 5]}") from e
        if not 0 <= matno <= m or not 1 <= block <= nblocks:
            raise SdpFormatError(f"矩阵项下标越界: {remaining[offset:offset + 5]}")
        order = abs(sizes[block - 1])
        if not (1 <= i <= order and 1 <= j <= order):
            raise SdpFormatError(f"矩阵项行列越界: {remaining[offset:offset + 5]}")
        if sizes[block - 1] < 0 and i != j:
            raise SdpFormatError(f"对角块出现非对角项: {remaining[offset:offset + 5]}")
        key = (min(i, j) - 1, max(i, j) - 1)
        matrix = per_block[block - 1].setdefault(matno, {})
        matrix[key] = matrix.get(key, 0.0) + value

    builder = SdpProblemBuilder()
    # 原块号 -> 新块号（对角块展开为若干 1 阶块），或自由变量起点
    psd_map: dict[int, list[int]] = {}
    free_map: dict[int, int] = {}
    for index, size in enumerate(sizes):
        if size > 0:
            psd_map[index] = [builder.add_block(size)]
        elif _split_free_block(-size, per_block[index]):
            free_map[index] = builder.add_free(-size // 2)
        else:
            psd_map[index] = [builder.add_block(1) for _ in range(-size)]

    def convert(matno: int) -> tuple[list[BlockEntry], dict[int, float]]:
        block_entries: list[BlockEntry] = []
        free_entries: dict[int, float] = {}
        for index, size in enumerate(sizes):
            matrix = per_block[index].get(matno, {})
            if index in free_map:
                half = -size // 2
                for (i, _), value in matrix.items():
                    if i < half:
                        free_entries[free_map[index] + i] = value
            elif size > 0:
                target = psd_map[index][0]
                block_entries += [(target, i, j, v) for (i, j), v in matrix.items()]
            else:
                block_entries += [(psd_map[index][i], 0, 0, v) for (i, _), v in matrix.items()]
        return block_entries, free_entries

    objective_blocks, objective_free = convert(0)
    builder.add_objective(
        [(b, i, j, -v) for b, i, j, v in objective_blocks],
        {k: -v for k, v in objective_free.items()},
    )
    for matno in range(1, m + 1):
        block_entries, free_entries = convert(matno)
        try:
            builder.add_constraint(block_entries, free_entries, rhs[matno - 1])
        except ValueError as e:
            raise SdpFormatError(f"第 {matno} 条约束无效: {e}") from e
    return builder.build()


def import_sdpa(source: str | os.PathLike | TextIO) -> SdpProblem:
    """从路径或文本流读取 .dat-s"""
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text(encoding="utf-8")
    return parse_sdpa(text)


def sdpa_round_trip(problem: SdpProblem) -> SdpProblem:
    """导出后立即导入（测试与诊断用）"""
    return import_sdpa(io.StringIO(render_sdpa(problem)))


__all__ = [
    "export_sdpa",
    "import_sdpa",
    "parse_sdpa",
    "render_sdpa",
    "sdpa_round_trip",
]
