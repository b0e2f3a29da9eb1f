"""
Schmidt 分解与纠缠熵模块
"""

import math
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from modules.dynamics.lattice import WaveFunction2D
from modules.utils.errors import (
    DegenerateWindowError,
    DomainError,
    NonFiniteStateError,
    SvdConvergenceError,
)

WEIGHT_SUM_TOLERANCE = 1e-9
# 低于此值的权重对熵的贡献按 0·ln0 = 0 处理
ENTROPY_FLOOR = 1e-300


class SchmidtSpectrum:
    """
    Schmidt 权重 λᵢ²，非增排序，和为 1
    """

    __slots__ = ("weights",)

    def __init__(self, weights: Sequence[float]):
        weights = np.asarray(weights, dtype=float)
        if weights.ndim != 1 or weights.size == 0:
            raise DomainError("Schmidt 权重必须是非空一维数组")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0.0):
            raise DomainError("Schmidt 权重必须是非负有限数")
        if np.any(np.diff(weights) > 0.0):
            raise DomainError("Schmidt 权重必须非增排序")
        if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise DomainError(f"Schmidt 权重之和 {weights.sum():.12g} ≠ 1")
        self.weights = weights

    @property
    def N(self) -> int:
        return self.weights.size

    def __len__(self) -> int:
        return self.weights.size


class ScaledSpectrum:
    """εᵢ = N²·λᵢ²，非增排序，和为 N²"""

    __slots__ = ("epsilons", "N")

    def __init__(self, epsilons: Sequence[float], N: int):
        epsilons = np.asarray(epsilons, dtype=float)
        if epsilons.ndim != 1 or epsilons.size != N:
            raise DomainError(f"缩放谱必须是长度 {N} 的一维数组")
        if not np.all(np.isfinite(epsilons)) or np.any(epsilons < 0.0):
            raise DomainError("缩放谱必须是非负有限数")
        if np.any(np.diff(epsilons) > 0.0):
            raise DomainError("缩放谱必须非增排序")
        target = float(N) ** 2
        if abs(epsilons.sum() - target) > WEIGHT_SUM_TOLERANCE * target:
            raise DomainError(f"缩放谱之和 {epsilons.sum():.12g} ≠ N² = {target:.12g}")
        self.epsilons = epsilons
        self.N = N


def schmidt_decompose(psi: WaveFunction2D) -> SchmidtSpectrum:
    """
    对系数矩阵做奇异值分解，返回 Schmidt 权重

    只保留奇异值，U、V 丢弃。结果重新归一化到和恰为 1。

    Args:
        psi: 归一化波函数

    Returns:
        SchmidtSpectrum: 非增排序的 λᵢ²

    Raises:
        NonFiniteStateError: 振幅非有限
        SvdConvergenceError: SVD 不收敛
    """
    amplitudes = psi.amplitudes
    if not np.all(np.isfinite(amplitudes)):
        raise NonFiniteStateError("波函数含有非有限振幅")
    try:
        singular = linalg.svdvals(amplitudes, check_finite=False)
    except linalg.LinAlgError as e:
        raise SvdConvergenceError(f"SVD 不收敛: {e}") from e
    weights = np.sort(singular**2)[::-1]
    return SchmidtSpectrum(weights / weights.sum())


def von_neumann_entropy(s: SchmidtSpectrum) -> float:
    """
    S = −Σ λᵢ² ln λᵢ²，满足 0 ≤ S ≤ ln N

    Args:
        s: Schmidt 谱

    Returns:
        float: 纠缠熵（nat）
    """
    w = s.weights[s.weights > ENTROPY_FLOOR]
    entropy = float(-np.sum(w * np.log(w)))
    return min(max(entropy, 0.0), math.log(s.N))


def scale_spectrum(s: SchmidtSpectrum, N: int) -> ScaledSpectrum:
    """
    εᵢ = N²·λᵢ²

    Args:
        s: Schmidt 谱
        N: 希尔伯特空间维数

    Returns:
        ScaledSpectrum: 缩放后的谱
    """
    if len(s) != N:
        raise DomainError(f"谱长度 {len(s)} 与 N={N} 不符")
    return ScaledSpectrum(float(N) ** 2 * s.weights, N)


def detect_saturation(
    entropy_series: Sequence[float], window: int, slope_tol: float
) -> Optional[int]:
    """
    找到熵开始饱和的第一个下标

    对每个下标 i ≥ window−1，用最小二乘拟合 series[i−window+1 : i+1] 的斜率，
    返回第一个 |斜率| < slope_tol 的 i；始终不满足则返回 None。

    Args:
        entropy_series: 熵的时间序列
        window: 拟合窗口长度，≥ 2
        slope_tol: 斜率阈值（nat/步）

    Returns:
        Optional[int]: 饱和下标
    """
    series = np.asarray(entropy_series, dtype=float)
    if window < 2:
        raise DegenerateWindowError(f"窗口长度必须 ≥ 2: {window}")
    if series.size < window:
        raise DegenerateWindowError(f"序列长度 {series.size} 小于窗口 {window}")

    t = np.arange(window, dtype=float)
    t -= t.mean()
    denom = float(np.sum(t**2))
    # 所有滑动窗口的最小二乘斜率
    windows = np.lib.stride_tricks.sliding_window_view(series, window)
    slopes = windows @ t / denom
    hits = np.flatnonzero(np.abs(slopes) < slope_tol)
    if hits.size == 0:
        return None
    return int(hits[0]) + window - 1
