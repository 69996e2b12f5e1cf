"""
运行配置
TOML 文本（分节、逐行），由 pydantic 模型校验；多项式以字符串表达式给出。
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Literal

try:
    import tomllib
except ImportError:
    import tomli as tomllib

import tomli_w
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..core.algebra.parser import parse_polynomial
from ..core.algebra.polynomial import Polynomial
from ..core.geometry.domain import MomentDomain, SemialgebraicSet, domain_from_dict
from ..core.sdp.problem import SolverSettings
from .errors import ConfigError
from .models import ApproximationSet, DynamicalSystem, TimeKind, validate_discount

Action = Literal["solve", "certify", "volume", "grid", "simulate", "export-sdpa"]
STOCHASTIC_ACTIONS = frozenset({"solve", "certify", "volume"})

CONFIG_DIR = Path(__file__).resolve().parent.parent / "resources" / "configs"
BUNDLED_CONFIGS = {
    "lorenz": "lorenz.toml",
    "henon": "henon.toml",
    "vanderpol": "vanderpol.toml",
    "vanderpol_disk": "vanderpol_disk.toml",
}


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SystemSection(_Section):
    variables: list[str] = Field(min_length=1)
    time: Literal["continuous", "discrete"]
    discount: float
    field: list[str] = Field(min_length=1)

    @model_validator(mode="after")
    def _check(self) -> SystemSection:
        if len(set(self.variables)) != len(self.variables):
            raise ValueError(f"变量名重复: {self.variables}")
        if len(self.field) != len(self.variables):
            raise ValueError(
                f"向量场分量数 {len(self.field)} 与变量数 {len(self.variables)} 不一致"
            )
        validate_discount(TimeKind(self.time), self.discount)
        for expression in self.field:
            parse_polynomial(expression, self.variables)
        return self


class DomainSection(_Section):
    kind: Literal["box", "ball", "annulus"]
    lower: list[float] | None = None
    upper: list[float] | None = None
    center: list[float] | None = None
    radius: float | None = None
    inner_radius: float | None = None
    outer_radius: float | None = None
    inequalities: list[str] = Field(default_factory=list)
    scaling: Literal["auto", "on", "off"] = "auto"

    @model_validator(mode="after")
    def _check(self) -> DomainSection:
        required = {
            "box": ("lower", "upper"),
            "ball": ("center", "radius"),
            "annulus": ("center", "inner_radius", "outer_radius"),
        }[self.kind]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.kind} 域缺少字段: {', '.join(missing)}")
        self.build_domain()
        return self

    def build_domain(self) -> MomentDomain:
        return domain_from_dict(self.model_dump(exclude={"inequalities", "scaling"}, exclude_none=True))


class TighteningSection(_Section):
    degrees: list[int] = Field(min_length=1)
    discounts: list[float] = Field(default_factory=list)
    parallel: bool = False

    @field_validator("degrees")
    @classmethod
    def _even(cls, degrees: list[int]) -> list[int]:
        for k in degrees:
            if k < 2 or k % 2:
                raise ValueError(f"次数 k 必须是 ≥ 2 的偶数，当前为 {k}")
        return degrees


class SimulateSection(_Section):
    initial_state: list[float] | None = None
    burn_in: float | None = None  # 连续: 时间；离散: 步数
    count: int = Field(default=10000, ge=1)
    dt: float = Field(default=1e-3, gt=0)
    stride: int = Field(default=1, ge=1)


class CertifySection(_Section):
    samples: int = Field(default=10000, ge=0)


class VolumeSection(_Section):
    samples: int = Field(default=100000, ge=100)
    set: Literal["xk", "yk", "intersection"] = "xk"
    degree: int | None = None
    workers: int = Field(default=1, ge=1)

    @property
    def approximation_set(self) -> ApproximationSet:
        return ApproximationSet(self.set)


class GridAxisSection(_Section):
    dimension: int = Field(ge=0)
    lower: float
    upper: float
    count: int = Field(ge=2)


class GridFixedSection(_Section):
    dimension: int = Field(ge=0)
    value: float


class GridSection(_Section):
    axes: list[GridAxisSection] = Field(min_length=1, max_length=3)
    fixed: list[GridFixedSection] = Field(default_factory=list)
    degree: int | None = None


class ExportSection(_Section):
    degree: int | None = None


class RunConfig(_Section):
    seed: int | None = None
    actions: list[Action] = Field(default_factory=lambda: ["solve"])
    log_level: str = "INFO"
    system: SystemSection
    domain: DomainSection
    tightening: TighteningSection
    solver: SolverSettings = Field(default_factory=SolverSettings)
    simulate: SimulateSection = Field(default_factory=SimulateSection)
    certify: CertifySection = Field(default_factory=CertifySection)
    volume: VolumeSection = Field(default_factory=VolumeSection)
    grid: GridSection | None = None
    export: ExportSection = Field(default_factory=ExportSection)

    @model_validator(mode="after")
    def _check(self) -> RunConfig:
        stochastic = STOCHASTIC_ACTIONS.intersection(self.actions)
        if stochastic and self.seed is None:
            raise ValueError(f"动作 {sorted(stochastic)} 需要随机种子，请设置 seed")
        if "grid" in self.actions and self.grid is None:
            raise ValueError("动作 grid 需要 [grid] 节")

        dim = len(self.system.variables)
        if self.domain.build_domain().dim != dim:
            raise ValueError(f"矩域维数与变量数 {dim} 不一致")
        field_degree = max(parse_polynomial(e, self.system.variables).degree for e in self.system.field)
        minimum = max(2, field_degree)
        for k in self.tightening.degrees:
            if k < minimum:
                raise ValueError(f"次数 k = {k} 低于 max(2, deg f) = {minimum}")
        time_kind = TimeKind(self.system.time)
        for discount in self.tightening.discounts:
            validate_discount(time_kind, discount)
        if self.simulate.initial_state is not None and len(self.simulate.initial_state) != dim:
            raise ValueError(f"simulate.initial_state 维数与变量数 {dim} 不一致")
        if self.grid is not None:
            used = [a.dimension for a in self.grid.axes] + [f.dimension for f in self.grid.fixed]
            if sorted(used) != list(range(dim)):
                raise ValueError(f"grid 的轴与固定坐标必须恰好覆盖 {dim} 个维度，当前为 {used}")
        return self

    # ------------------------------------------------------------------ 构造领域对象

    @property
    def time_kind(self) -> TimeKind:
        return TimeKind(self.system.time)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(self.system.variables)

    def build_system(self, discount: float | None = None) -> DynamicalSystem:
        return DynamicalSystem.from_expressions(
            self.system.variables,
            self.system.field,
            self.time_kind,
            self.system.discount if discount is None else discount,
        )

    def build_set(self) -> SemialgebraicSet:
        extra: list[Polynomial] = [
            parse_polynomial(e, self.system.variables) for e in self.domain.inequalities
        ]
        return SemialgebraicSet.from_domain(self.domain.build_domain(), extra)

    def discount_sweep(self) -> list[float]:
        return list(self.tightening.discounts) or [self.system.discount]


# ---------------------------------------------------------------------- 读写


def _format_validation_error(error: ValidationError) -> str:
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        message = item["msg"].removeprefix("Value error, ")
        lines.append(f"{location}: {message}")
    return "配置校验失败: " + "; ".join(lines)


def _set_dotted(data: dict[str, Any], dotted: str, raw: str) -> None:
    """--override section.key=value；值按 TOML 解析，失败时按字符串处理"""
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw
    keys = dotted.split(".")
    target = data
    for key in keys[:-1]:
        target = target.setdefault(key, {})
        if not isinstance(target, dict):
            raise ConfigError(f"--override {dotted}: {key} 不是配置节")
    target[keys[-1]] = value


def parse_overrides(pairs: list[str] | None) -> list[tuple[str, str]]:
    result = []
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--override 参数格式应为 key=value，当前为 {pair!r}")
        result.append((key.strip(), value.strip()))
    return result


def config_from_dict(data: dict[str, Any]) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_format_validation_error(e)) from e


def loads_config(text: str, overrides: list[tuple[str, str]] | None = None) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"TOML 解析失败: {e}") from e
    for key, value in overrides or []:
        _set_dotted(data, key, value)
    return config_from_dict(data)


def resolve_config_path(name_or_path: str | Path) -> Path:
    """文件路径或内置示例名（lorenz / henon / vanderpol / vanderpol_disk）"""
    path = Path(name_or_path)
    if path.is_file():
        return path
    bundled = BUNDLED_CONFIGS.get(str(name_or_path))
    if bundled is not None:
        return CONFIG_DIR / bundled
    raise ConfigError(f"配置文件不存在: {name_or_path}")


def load_config(
    name_or_path: str | Path, overrides: list[tuple[str, str]] | None = None
) -> RunConfig:
    path = resolve_config_path(name_or_path)
    return loads_config(path.read_text(encoding="utf-8"), overrides)


def config_to_dict(config: RunConfig) -> dict[str, Any]:
    return config.model_dump(mode="json", exclude_none=True)


def dump_config(config: RunConfig) -> str:
    """序列化回 TOML；解析 → 序列化 → 解析为不动点"""
    return tomli_w.dumps(config_to_dict(config))


def bundled_config_names() -> list[str]:
    return sorted(BUNDLED_CONFIGS)
