"""
谱系综与谱文件读写模块

文件格式（UTF-8 文本）：
    以 "# key=value" 开头的头部行，第一行为 format_version=1；
    之后每行一个谱，N 个科学计数法浮点数（%.17e，可无损往返），降序。
"""

import logging
import math
from pathlib import Path
from typing import Any, Dict, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from modules.utils.errors import EnsembleFormatError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
TRACE_TOLERANCE = 1e-6

# 头部字段的书写顺序
HEADER_KEYS = (
    "N",
    "source",
    "k1",
    "k2",
    "cpp",
    "sigma",
    "burn_in",
    "stride",
    "seed",
    "count",
    "fixed_trace",
    "protocol",
    "trajectories",
    "initial",
    "order",
)


class EnsembleMetadata(BaseModel):
    """谱系综的来源记录"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    N: int
    source: Literal["simulation", "lue-sampler", "synthetic"]
    k1: Optional[float] = None
    k2: Optional[float] = None
    cpp: Optional[float] = None
    sigma: Optional[float] = None
    burn_in: Optional[int | Literal["auto"]] = None
    stride: Optional[int] = None
    seed: int = 0
    count: int = 0
    fixed_trace: bool = False
    protocol: Optional[str] = None
    trajectories: Optional[int] = None
    initial: Optional[str] = None
    order: Optional[str] = None

    @property
    def normalized(self) -> bool:
        """谱是否来自归一化波函数（或定迹采样），即 Σε = N² 是否成立"""
        return self.source == "simulation" or self.fixed_trace


class SpectraEnsemble:
    """
    ε 谱的集合

    Attributes:
        N: 维数
        spectra: 形状 (样本数, N)，每行降序
        metadata: 来源记录
    """

    def __init__(self, spectra: np.ndarray, metadata: EnsembleMetadata):
        spectra = np.asarray(spectra, dtype=float)
        if spectra.ndim == 1 and spectra.size == 0:
            spectra = spectra.reshape(0, metadata.N)
        if spectra.ndim != 2 or spectra.shape[1] != metadata.N:
            raise EnsembleFormatError(
                f"谱数组形状 {spectra.shape} 与 N={metadata.N} 不符"
            )
        if not np.all(np.isfinite(spectra)) or np.any(spectra < 0.0):
            raise EnsembleFormatError("谱中含有负值或非有限值")
        if np.any(np.diff(spectra, axis=1) > 0.0):
            raise EnsembleFormatError("每个谱必须降序排列")
        if metadata.normalized and spectra.shape[0]:
            target = float(metadata.N) ** 2
            worst = float(np.max(np.abs(spectra.sum(axis=1) - target)))
            if worst > target * TRACE_TOLERANCE:
                raise EnsembleFormatError(f"谱的迹偏离 N²: 最大偏差 {worst:.3g}")
        if metadata.count != spectra.shape[0]:
            metadata = metadata.model_copy(update={"count": spectra.shape[0]})
        self.spectra = spectra
        self.metadata = metadata

    @property
    def N(self) -> int:
        return self.metadata.N

    def __len__(self) -> int:
        return self.spectra.shape[0]

    def __repr__(self) -> str:
        return f"SpectraEnsemble(N={self.N}, samples={len(self)}, source={self.metadata.source})"


def _format_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(text: str) -> Any:
    return None if text == "none" else text


def write_ensemble(ensemble: SpectraEnsemble, path: str | Path) -> Path:
    """
    写出谱文件（同样输入得到逐字节相同的文件）

    Args:
        ensemble: 谱系综
        path: 输出路径

    Returns:
        Path: 写出的路径
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fields = ensemble.metadata.model_dump()
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"# format_version={FORMAT_VERSION}\n")
        for key in HEADER_KEYS:
            f.write(f"# {key}={_format_value(fields[key])}\n")
        if len(ensemble):
            np.savetxt(f, ensemble.spectra, fmt="%.17e", delimiter=" ")
    logger.info("写出谱文件 %s (%d 个谱)", path, len(ensemble))
    return path


def read_ensemble(path: str | Path) -> SpectraEnsemble:
    """
    读取谱文件

    Raises:
        EnsembleFormatError: 头部缺失、版本不符或数据不合法
    """
    path = Path(path)
    header: Dict[str, Any] = {}
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, sep, value = line[1:].strip().partition("=")
                if not sep:
                    raise EnsembleFormatError(f"{path}:{lineno} 头部行缺少 '='")
                header[key.strip()] = _parse_value(value.strip())
                continue
            try:
                rows.append([float(v) for v in line.split()])
            except ValueError as e:
                raise EnsembleFormatError(f"{path}:{lineno} 无法解析的数值") from e

    version = header.pop("format_version", None)
    if version is None or int(version) != FORMAT_VERSION:
        raise EnsembleFormatError(f"{path}: 不支持的 format_version={version}")
    try:
        metadata = EnsembleMetadata(**header)
    except ValidationError as e:
        raise EnsembleFormatError(f"{path}: 头部无效: {e.errors()[0]['msg']}") from e

    if any(len(r) != metadata.N for r in rows):
        raise EnsembleFormatError(f"{path}: 存在长度不为 N={metadata.N} 的谱")
    spectra = np.array(rows, dtype=float).reshape(len(rows), metadata.N)
    if metadata.count != len(rows):
        raise EnsembleFormatError(
            f"{path}: 头部 count={metadata.count} 与实际谱数 {len(rows)} 不符"
        )
    return SpectraEnsemble(spectra, metadata)


def ensemble_mean_entropy(ensemble: SpectraEnsemble) -> float:
    """各谱（权重 ε/Σε）的平均 von Neumann 熵"""
    weights = ensemble.spectra / ensemble.spectra.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(weights > 1e-300, weights * np.log(weights), 0.0)
    return float(np.mean(-terms.sum(axis=1))) if len(ensemble) else math.nan
