"""
结果文档的保存与重新加载
JSON (UTF-8, indent=2)，浮点数按 Python 最短往返表示写出。
除 timestamp 字段外，同一配置两次运行得到的文档逐字节一致。
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

from ...models.errors import ConfigError
from ...models.run_config import RunConfig, config_from_dict, config_to_dict
from ...utils.atomic_file import atomic_write_text
from ...utils.logger import LOG_TAG, logger
from ...utils.version import TOOLKIT_NAME, get_toolkit_version
from ..attractor.approximation import AttractorApproximation
from ..sdp.problem import SdpStatus
from ..sos.compiler import RecoveredSolution

SCHEMA_VERSION = 1


def record_key(k: int, discount: float) -> str:
    return f"k={k},discount={discount!r}"


@dataclass
class SolveRecord:
    """一个 (k, 折扣) 组合的求解结果；求解失败时 approximation 为 None"""

    k: int
    discount: float
    status: SdpStatus
    iterations: int = 0
    near_optimal: bool = False
    approximation: AttractorApproximation | None = None
    solution: RecoveredSolution | None = None
    sdp_residuals: dict[str, float] = field(default_factory=dict)
    wall_time: float = 0.0
    error: str | None = None

    @property
    def key(self) -> str:
        return record_key(self.k, self.discount)

    @property
    def succeeded(self) -> bool:
        """求解达到最优且认证未被拒绝"""
        if self.status is not SdpStatus.OPTIMAL or self.approximation is None:
            return False
        certification = self.approximation.certification
        return certification is None or certification.accepted

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "k": self.k,
            "discount": self.discount,
            "status": self.status.value,
            "iterations": self.iterations,
            "near_optimal": self.near_optimal,
            "sdp_residuals": self.sdp_residuals,
        }
        if self.error is not None:
            data["error"] = self.error
        if self.approximation is not None:
            data.update(self.approximation.to_dict())
        if self.solution is not None:
            data["solution"] = {
                "decision": [float(v) for v in self.solution.decision_values],
                "grams": {slot: np.asarray(g).tolist() for slot, g in self.solution.grams.items()},
            }
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any], config: RunConfig) -> SolveRecord:
        k = int(data["k"])
        discount = float(data["discount"])
        approximation = None
        if "w" in data:
            approximation = AttractorApproximation.from_dict(
                data, config.build_system(discount), config.build_set()
            )
        solution = None
        if "solution" in data and approximation is not None:
            raw = data["solution"]
            solution = RecoveredSolution(
                decision={"v1": approximation.v1, "v2": approximation.v2, "w": approximation.w},
                grams={slot: np.asarray(g, dtype=float) for slot, g in raw["grams"].items()},
                decision_values=np.asarray(raw["decision"], dtype=float),
                objective_value=approximation.d_k / approximation.scaling.volume_factor,
            )
        return cls(
            k=k,
            discount=discount,
            status=SdpStatus(data["status"]),
            iterations=int(data.get("iterations", 0)),
            near_optimal=bool(data.get("near_optimal", False)),
            approximation=approximation,
            solution=solution,
            sdp_residuals=dict(data.get("sdp_residuals", {})),
            error=data.get("error"),
        )


@dataclass
class ResultDocument:
    config: RunConfig
    records: list[SolveRecord] = field(default_factory=list)
    version: str = field(default_factory=get_toolkit_version)
    created: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

    @property
    def approximations(self) -> list[AttractorApproximation]:
        return [r.approximation for r in self.records if r.approximation is not None]

    @property
    def all_succeeded(self) -> bool:
        return bool(self.records) and all(r.succeeded for r in self.records)

    def select(self, k: int | None = None, discount: float | None = None) -> SolveRecord:
        """按次数/折扣选出一条带外逼近的记录；k 缺省时取最高次数"""
        candidates = [
            r
            for r in self.records
            if r.approximation is not None
            and (k is None or r.k == k)
            and (discount is None or r.discount == discount)
        ]
        if not candidates:
            raise ConfigError(f"结果文档中没有满足 k={k}, 折扣={discount} 的可用记录")
        return max(candidates, key=lambda r: r.k)

    def to_dict(self) -> dict[str, Any]:
        system = self.config.build_system()
        return {
            "schema": SCHEMA_VERSION,
            "toolkit": {"name": TOOLKIT_NAME, "version": self.version},
            "config": config_to_dict(self.config),
            "system": {**system.to_dict(), "fingerprint": system.fingerprint()},
            "X": self.config.build_set().to_dict(self.config.variables),
            "records": [r.to_dict() for r in self.records],
            "timestamp": {
                "created": self.created,
                "wall_times": {r.key: r.wall_time for r in self.records},
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n"

    def save(self, path: str | os.PathLike) -> Path:
        target = atomic_write_text(path, self.to_json())
        logger.info(f"{LOG_TAG} 结果文档已写入: {target} ({len(self.records)} 条记录)")
        return target

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ResultDocument:
        config = config_from_dict(data["config"])
        fingerprint = data.get("system", {}).get("fingerprint")
        if fingerprint is not None and fingerprint != config.build_system().fingerprint():
            raise ConfigError("结果文档中的系统指纹与其配置回显不一致")
        records = [SolveRecord.from_dict(r, config) for r in data.get("records", [])]
        timestamp = data.get("timestamp", {})
        for record in records:
            record.wall_time = float(timestamp.get("wall_times", {}).get(record.key, 0.0))
        return cls(
            config=config,
            records=records,
            version=data.get("toolkit", {}).get("version", "unknown"),
            created=timestamp.get("created", ""),
        )

    @classmethod
    def load(cls, path: str | os.PathLike) -> ResultDocument:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"结果文件不存在: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigError(f"结果文件不是合法 JSON: {path}: {e}") from e
        document = cls.from_dict(data)
        logger.debug(f"{LOG_TAG} 已加载结果文档 {path}: {len(document.records)} 条记录")
        return document
