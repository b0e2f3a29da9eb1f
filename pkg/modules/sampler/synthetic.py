"""
无关联对照系综：每个能级独立按 σ_N/N 抽取
"""

import logging

import numpy as np

from modules.analytics.unfolding import UnfoldingMap, invert_unfold
from modules.sampler.rmt import stream_rng
from modules.statistics.ensemble import EnsembleMetadata, SpectraEnsemble
from modules.utils.errors import DomainError

logger = logging.getLogger(__name__)


def synthetic_poisson_ensemble(
    unfolding: UnfoldingMap, count: int, seed: int = 0
) -> SpectraEnsemble:
    """
    展开坐标下均匀、相互独立的能级

    一能级密度与 LUE 相同，但没有任何关联：展开后的 T̄₂ 为零，
    间距分布为 e^{−s}。

    Args:
        unfolding: 展开映射
        count: 谱个数
        seed: 种子，第 i 个谱用 stream_rng(seed, i)

    Returns:
        SpectraEnsemble: source="synthetic" 的系综
    """
    if count < 1:
        raise DomainError(f"count 必须 ≥ 1: {count}")
    N = unfolding.N
    omega = np.stack([stream_rng(seed, i).uniform(0.0, N, size=N) for i in range(count)])
    eps = np.asarray(invert_unfold(unfolding, omega)).reshape(count, N)
    eps = -np.sort(-eps, axis=1)
    logger.info("生成 %d 个无关联谱 (N=%d)", count, N)
    metadata = EnsembleMetadata(N=N, source="synthetic", seed=seed, count=count)
    return SpectraEnsemble(eps, metadata)
