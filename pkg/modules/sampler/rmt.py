"""
随机矩阵采样模块

Laguerre 幺正系综：N×N 复高斯矩阵（实部、虚部方差各 1/2）的奇异值平方。
每个样本下标对应一条独立的随机流 SeedSequence(seed, spawn_key=(index,))，
结果与并行调度无关。
"""

import logging
from typing import Optional

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field
from scipy import linalg

from modules.schmidt.analysis import SchmidtSpectrum, von_neumann_entropy
from modules.utils.errors import DomainError, EigenDecompositionError, SvdConvergenceError

logger = logging.getLogger(__name__)

# 每个并行任务处理的样本数
BLOCK_SIZE = 256


class SamplerConfig(BaseModel):
    """采样配置"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    N: int = Field(ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    fixed_trace: bool = False


def stream_rng(seed: int, index: int) -> np.random.Generator:
    """第 index 个样本的独立随机流"""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def sample_ginibre(N: int, rng: np.random.Generator) -> np.ndarray:
    """N×N 复高斯矩阵，E|A_ij|² = 1"""
    return (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / np.sqrt(2.0)


def spectrum_from_matrix(matrix: np.ndarray, fixed_trace: bool = False) -> np.ndarray:
    """
    奇异值平方，降序

    Args:
        matrix: 方阵
        fixed_trace: 是否缩放到 Σε = N²

    Returns:
        np.ndarray: ε 谱
    """
    try:
        singular = linalg.svdvals(matrix, check_finite=False)
    except linalg.LinAlgError as e:
        raise SvdConvergenceError(f"SVD 不收敛: {e}") from e
    eps = np.sort(singular**2)[::-1]
    if fixed_trace:
        N = matrix.shape[0]
        eps = eps * (float(N) ** 2 / eps.sum())
    return eps


def sample_lue_spectrum(cfg: SamplerConfig, rng: np.random.Generator) -> np.ndarray:
    """
    抽取一个 LUE 谱

    Args:
        cfg: 采样配置
        rng: 随机数发生器

    Returns:
        np.ndarray: 长度 N 的非负降序 ε
    """
    return spectrum_from_matrix(sample_ginibre(cfg.N, rng), cfg.fixed_trace)


def _sample_block(cfg: SamplerConfig, start: int, stop: int) -> np.ndarray:
    return np.stack(
        [sample_lue_spectrum(cfg, stream_rng(cfg.seed, i)) for i in range(start, stop)]
    )


def sample_lue_ensemble(cfg: SamplerConfig, count: int, n_jobs: int = 1) -> np.ndarray:
    """
    并行抽取 count 个 LUE 谱

    Returns:
        np.ndarray: 形状 (count, N)，第 i 行只依赖 (seed, i)
    """
    if count < 1:
        raise DomainError(f"count 必须 ≥ 1: {count}")
    blocks = [(s, min(s + BLOCK_SIZE, count)) for s in range(0, count, BLOCK_SIZE)]
    logger.info("抽取 %d 个 LUE 谱 (N=%d, fixed_trace=%s)", count, cfg.N, cfg.fixed_trace)
    parts = Parallel(n_jobs=n_jobs)(
        delayed(_sample_block)(cfg, start, stop) for start, stop in blocks
    )
    return np.concatenate(parts, axis=0)


def semicircle_counting(eigenvalues: np.ndarray, N: int) -> np.ndarray:
    """半圆律累积能级数，E|H_ij|² = 1 时半径为 2√N"""
    t = np.clip(eigenvalues / (2.0 * np.sqrt(N)), -1.0, 1.0)
    return N * (0.5 + (t * np.sqrt(1.0 - t**2) + np.arcsin(t)) / np.pi)


def sample_gue_unfolded_spacings(
    N: int, count: int, rng: np.random.Generator
) -> np.ndarray:
    """
    GUE 展开后的最近邻间距（只取每个谱的中间一半）

    Args:
        N: 矩阵维数，≥ 8
        count: 矩阵个数
        rng: 随机数发生器

    Returns:
        np.ndarray: 间距，均值约为 1
    """
    if N < 8:
        raise DomainError(f"N 必须 ≥ 8: {N}")
    lo, hi = N // 4, 3 * N // 4
    spacings = []
    for _ in range(count):
        a = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        hermitian = (a + a.conj().T) / 2.0
        try:
            levels = linalg.eigvalsh(hermitian, check_finite=False)
        except linalg.LinAlgError as e:
            raise EigenDecompositionError(f"本征值分解失败: {e}") from e
        spacings.append(np.diff(semicircle_counting(levels, N)[lo:hi]))
    return np.concatenate(spacings)


def lue_mean_entropy(
    N: int, count: int, seed: int = 0, n_jobs: int = 1, spectra: Optional[np.ndarray] = None
) -> float:
    """
    定迹 LUE 谱（权重 ε/N²）的平均 von Neumann 熵

    Args:
        N: 维数
        count: 样本数
        seed: 种子
        n_jobs: 并行任务数
        spectra: 已有的定迹谱，给定时不再采样

    Returns:
        float: 平均熵
    """
    if spectra is None:
        cfg = SamplerConfig(N=N, seed=seed, fixed_trace=True)
        spectra = sample_lue_ensemble(cfg, count, n_jobs)
    weights = spectra / spectra.sum(axis=1, keepdims=True)
    return float(np.mean([von_neumann_entropy(SchmidtSpectrum(w)) for w in weights]))
