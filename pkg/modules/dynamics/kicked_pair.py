"""
耦合踢转系统的分步 Floquet 传播模块

一个周期的传播子 = 位置表象中的踢转相位 × 动量表象中的动能相位，
两表象之间用归一化的二维 DFT 变换，因此每一步都是精确幺正的。
"""

import logging
import math
from functools import lru_cache
from typing import Callable, Literal, Optional

import numpy as np
from scipy import fft

from modules.dynamics.lattice import (
    CoherentStateSpec,
    LatticeConfig,
    SystemParams,
    WaveFunction2D,
)
from modules.utils.errors import LatticeError

logger = logging.getLogger(__name__)

StepOrder = Literal["kick-first", "kinetic-first"]

# 高斯尾部截断误差上限
WINDING_TOLERANCE = 1e-14
MIN_WINDINGS = 5


def _winding_cutoff(sigma: float) -> int:
    """使 exp(−(2πW − π)²/(2σ²)) < 1e−14 的最小缠绕数 W（至少 5）"""
    reach = sigma * math.sqrt(-2.0 * math.log(WINDING_TOLERANCE))
    return max(MIN_WINDINGS, int(math.ceil((reach + math.pi) / (2.0 * math.pi))))


def periodized_gaussian(spec: CoherentStateSpec, lattice: LatticeConfig) -> np.ndarray:
    """
    环面上的一维相干态（已归一化）

    Args:
        spec: 相干态参数
        lattice: 格点配置

    Returns:
        np.ndarray: 长度 N 的复振幅
    """
    sigma = spec.width(lattice)
    hbar = lattice.hbar
    windings = np.arange(-_winding_cutoff(sigma), _winding_cutoff(sigma) + 1)
    d = lattice.positions()[:, None] - spec.x0 - 2.0 * math.pi * windings[None, :]
    phi = np.exp(-(d**2) / (2.0 * sigma**2) + 1j * spec.p0 * d / hbar).sum(axis=1)
    return phi / np.linalg.norm(phi)


def build_coherent_product(
    spec1: CoherentStateSpec, spec2: CoherentStateSpec, lattice: LatticeConfig
) -> WaveFunction2D:
    """
    两个相干态的直积 ψ(x1, x2) = φ1(x1)·φ2(x2)

    Args:
        spec1: 第一个自由度的相干态
        spec2: 第二个自由度的相干态
        lattice: 格点配置

    Returns:
        WaveFunction2D: 归一化的直积态
    """
    if lattice.N < 2:
        raise LatticeError(f"N 必须 ≥ 2: {lattice.N}")
    psi = np.outer(periodized_gaussian(spec1, lattice), periodized_gaussian(spec2, lattice))
    psi /= np.linalg.norm(psi)
    return WaveFunction2D(psi, lattice)


def to_momentum(amplitudes: np.ndarray) -> np.ndarray:
    """位置表象 → 动量表象（幺正 DFT，下标 m 对应 LatticeConfig.momenta()）"""
    return fft.fft2(amplitudes, norm="ortho")


def to_position(amplitudes: np.ndarray) -> np.ndarray:
    """动量表象 → 位置表象"""
    return fft.ifft2(amplitudes, norm="ortho")


def kinetic_energy(p1: np.ndarray, p2: np.ndarray, cpp: float) -> np.ndarray:
    """2sin²(p1/2) + 2sin²(p2/2) + 4·cpp·sin(p1/2)sin(p2/2)"""
    s1 = np.sin(p1 / 2.0)
    s2 = np.sin(p2 / 2.0)
    return 2.0 * s1**2 + 2.0 * s2**2 + 4.0 * cpp * s1 * s2


class FloquetPropagator:
    """
    预先计算好相位的单周期传播子

    每个 (格点, 参数, 顺序) 组合只构造一次，见 get_propagator。
    """

    def __init__(
        self,
        lattice: LatticeConfig,
        params: SystemParams,
        order: StepOrder = "kick-first",
    ):
        if order not in ("kick-first", "kinetic-first"):
            raise LatticeError(f"未知的分步顺序: {order}")
        self.lattice = lattice
        self.params = params
        self.order = order

        hbar = lattice.hbar
        x = lattice.positions()
        p = lattice.momenta()
        # 踢转相位可分离：外积即可
        self.kick_phase = np.outer(
            np.exp(-1j * params.k1 * np.sin(x) / hbar),
            np.exp(-1j * params.k2 * np.sin(x) / hbar),
        )
        p1, p2 = np.meshgrid(p, p, indexing="ij")
        self.kinetic_phase = np.exp(-1j * kinetic_energy(p1, p2, params.cpp) / hbar)

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        if self.order == "kick-first":
            kicked = amplitudes * self.kick_phase
            return to_position(to_momentum(kicked) * self.kinetic_phase)
        freed = to_position(to_momentum(amplitudes) * self.kinetic_phase)
        return freed * self.kick_phase


@lru_cache(maxsize=32)
def get_propagator(
    lattice: LatticeConfig, params: SystemParams, order: StepOrder = "kick-first"
) -> FloquetPropagator:
    """按 (格点, 参数, 顺序) 缓存传播子"""
    logger.debug("构造 Floquet 传播子: N=%d, %s, %s", lattice.N, params, order)
    return FloquetPropagator(lattice, params, order)


def floquet_step(
    psi: WaveFunction2D, params: SystemParams, order: StepOrder = "kick-first"
) -> WaveFunction2D:
    """
    施加一个周期的踢转动力学

    Args:
        psi: 归一化波函数
        params: 系统参数
        order: 分步顺序，默认先踢后自由传播

    Returns:
        WaveFunction2D: 演化一步后的波函数

    Raises:
        NonFiniteStateError: 结果含非有限振幅
    """
    propagator = get_propagator(psi.lattice, params, order)
    return WaveFunction2D(propagator.apply(psi.amplitudes), psi.lattice)


def evolve(
    psi: WaveFunction2D,
    params: SystemParams,
    steps: int,
    observer: Optional[Callable[[int, WaveFunction2D], None]] = None,
    order: StepOrder = "kick-first",
) -> WaveFunction2D:
    """
    连续施加 steps 次 floquet_step

    Args:
        psi: 初态
        params: 系统参数
        steps: 步数，≥ 1
        observer: 每步之后以 (步序号, 当前态) 调用，步序号从 1 开始
        order: 分步顺序

    Returns:
        WaveFunction2D: 末态
    """
    if steps < 1:
        raise LatticeError(f"steps 必须 ≥ 1: {steps}")
    for step in range(1, steps + 1):
        psi = floquet_step(psi, params, order)
        if observer is not None:
            observer(step, psi)
    return psi
