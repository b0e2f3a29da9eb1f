"""
运行配置模块

优先级：命令行参数 > --config 文件 > --preset 预设 > 模型默认值。
配置文件是扁平的 YAML 映射或逐行 `key = value`；预设文件另带 metadata 段，
参数放在 config 段。
"""

import logging
import math
import os
import re
from pathlib import Path
from typing import Any, Dict, Literal, Mapping, Optional

import yaml
from dotenv import find_dotenv, load_dotenv
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from modules.dynamics.lattice import LatticeConfig
from modules.utils.errors import ConfigError, LatticeError

_ = load_dotenv(find_dotenv(usecwd=True))

logger = logging.getLogger(__name__)

_KEY_VALUE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")

AnalysisKind = Literal["r1", "cluster-hard", "cluster-bulk", "cluster-soft", "spacing"]


def default_output_dir() -> Path:
    return Path(os.getenv("ENTANGLE_OUTPUT_DIR", "outputs"))


def default_n_jobs() -> int:
    raw = os.getenv("ENTANGLE_N_JOBS", "1")
    try:
        return int(raw)
    except ValueError as e:
        raise ConfigError(f"ENTANGLE_N_JOBS 不是整数: {raw}") from e


class RunConfig(BaseModel):
    """一次运行的全部参数"""

    model_config = ConfigDict(extra="forbid")

    # 格点与系统参数
    N: int = Field(default=64, ge=1)
    k1: float = 3.0
    k2: float = 2.5
    cpp: float = 0.05

    # 初态
    initial: Literal["fixed", "random"] = "fixed"
    x0: float = math.pi / 2
    p0: float = math.pi / 4
    sigma: Optional[float] = Field(default=None, gt=0.0)
    order: Literal["kick-first", "kinetic-first"] = "kick-first"

    # 采集协议
    burn_in: int | Literal["auto"] = "auto"
    stride: int = Field(default=10, ge=1)
    count: int = Field(default=2000, ge=1)
    trajectories: int = Field(default=1, ge=1)
    master_seed: int = Field(default=0, ge=0)
    saturation_window: int = Field(default=50, ge=2)
    saturation_tol: float = Field(default=1e-3, gt=0.0)
    guard_steps: int = Field(default=50, ge=0)
    max_burn_in: int = Field(default=5000, ge=1)

    # entropy 子命令
    steps: int = Field(default=1000, ge=0)
    levels: int = Field(default=3, ge=1)

    # rmt-sample / analyze 子命令
    fixed_trace: bool = False
    analysis: AnalysisKind = "r1"

    # 输出
    output_dir: Path = Field(default_factory=default_output_dir)
    ensemble_path: Optional[Path] = None
    entropy_path: Optional[Path] = None
    table_path: Optional[Path] = None

    n_jobs: int = Field(default_factory=default_n_jobs)
    tracking: bool = False

    @field_validator("burn_in")
    @classmethod
    def _non_negative_burn_in(cls, v):
        if isinstance(v, int) and v < 0:
            raise ValueError("burn_in 必须 ≥ 0")
        return v

    @field_validator("k1", "k2", "cpp", "x0", "p0")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("必须是有限实数")
        return v

    @model_validator(mode="after")
    def _trajectories_fit(self) -> "RunConfig":
        if self.trajectories > self.count:
            raise ValueError(f"trajectories={self.trajectories} 超过 count={self.count}")
        if self.trajectories > 1 and self.initial == "fixed":
            # 固定初态的各条轨迹完全相同，只会复制同一组谱
            raise ValueError("trajectories > 1 时 initial 必须为 random")
        return self

    def lattice_config(self) -> LatticeConfig:
        """动力学子命令所需的格点配置（N 为偶数）"""
        try:
            return LatticeConfig(self.N)
        except LatticeError as e:
            raise ConfigError(str(e)) from e

    def resolve(self, name: Literal["ensemble", "entropy", "table"]) -> Path:
        """某类输出的路径，未显式指定时放在 output_dir 下"""
        explicit = getattr(self, f"{name}_path")
        if explicit is not None:
            return Path(explicit)
        filename = {
            "ensemble": "ensemble.txt",
            "entropy": "entropy.tsv",
            "table": f"{self.analysis}.tsv",
        }[name]
        return self.output_dir / filename

    def tracking_params(self) -> Dict[str, Any]:
        """可记录到 mlflow 的标量参数"""
        return {
            k: (str(v) if isinstance(v, Path) else v)
            for k, v in self.model_dump().items()
            if v is not None
        }


def _key_value_lines(text: str) -> Optional[Dict[str, Any]]:
    """按 `key = value` 逐行解析；有一行不符合时返回 None，交给 YAML"""
    data: Dict[str, Any] = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        match = _KEY_VALUE.match(line)
        if match is None:
            return None
        key, value = match.groups()
        try:
            data[key] = yaml.safe_load(value) if value else None
        except yaml.YAMLError:
            data[key] = value
    return data or None


def load_config_file(path: str | Path) -> Dict[str, Any]:
    """
    读取配置文件

    支持 YAML 映射，也接受每行一个 `key = value` 的纯文本格式；
    后者的值按 YAML 标量解析类型。

    Args:
        path: 配置文件路径

    Returns:
        Dict[str, Any]: 参数映射（预设文件只取 config 段）

    Raises:
        ConfigError: 文件无法读取或不是映射
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"无法读取配置文件 {path}: {e.strerror}") from e
    flat = _key_value_lines(text)
    if flat is not None:
        logger.debug("按 key = value 格式读取 %s", path)
        return flat
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"配置文件 {path} 不是合法的 YAML: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"配置文件 {path} 必须是 key: value 映射")
    if "config" in data:
        data = data["config"] or {}
        if not isinstance(data, dict):
            raise ConfigError(f"配置文件 {path} 的 config 段必须是映射")
    return dict(data)


def build_config(
    preset: Optional[str] = None,
    config_path: Optional[str | Path] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """
    按优先级合并预设、配置文件与显式参数

    Args:
        preset: 预设文件名或类别
        config_path: 配置文件路径
        overrides: 显式参数，值为 None 的项忽略

    Returns:
        RunConfig: 校验后的配置

    Raises:
        ConfigError: 未知字段、取值不合法或预设不存在
    """
    values: Dict[str, Any] = {}
    if preset:
        from modules.presets.manager import get_preset_manager

        values.update(get_preset_manager().load_preset(preset))
    if config_path:
        values.update(load_config_file(config_path))
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        cfg = RunConfig(**values)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "config"
        raise ConfigError(f"配置无效 ({where}): {first['msg']}") from e
    logger.debug("运行配置: %s", cfg.model_dump())
    return cfg
