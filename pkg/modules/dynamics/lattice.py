"""
环面格点与波函数类型模块

位置 x = 2πj/N，动量窗口 [−π, π)，有效普朗克常数 ħ = 2π/N。
"""

import math
from dataclasses import dataclass

import numpy as np

from modules.utils.errors import LatticeError, NonFiniteStateError

NORM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class LatticeConfig:
    """每个自由度 N 个格点的双周期格子"""

    N: int

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or isinstance(self.N, bool):
            raise LatticeError(f"N 必须是整数: {self.N!r}")
        if self.N < 2:
            raise LatticeError(f"N 必须 ≥ 2: {self.N}")
        if self.N % 2:
            # 动量窗口 [−π, π) 需要关于下标对称
            raise LatticeError(f"N 必须是偶数: {self.N}")

    @property
    def hbar(self) -> float:
        return 2.0 * math.pi / self.N

    def positions(self) -> np.ndarray:
        """位置格点 x_j = 2πj/N"""
        return 2.0 * math.pi * np.arange(self.N) / self.N

    def momenta(self) -> np.ndarray:
        """
        DFT 下标对应的动量 p(m) = ħ·(((m + N/2) mod N) − N/2)

        Returns:
            np.ndarray: 长度 N，取值在 [−π, π)
        """
        m = np.arange(self.N)
        return self.hbar * (((m + self.N // 2) % self.N) - self.N // 2)


@dataclass(frozen=True)
class SystemParams:
    """踢转强度 k1, k2 与动量-动量耦合 cpp"""

    k1: float
    k2: float
    cpp: float

    def __post_init__(self):
        for name in ("k1", "k2", "cpp"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise LatticeError(f"{name} 必须是有限实数: {value}")


@dataclass(frozen=True)
class CoherentStateSpec:
    """
    周期化高斯相干态

    Attributes:
        x0: 位置中心，[0, 2π)
        p0: 动量中心，[−π, π)
        sigma: 位置空间宽度，None 表示取 √(ħ/2)
    """

    x0: float
    p0: float
    sigma: float | None = None

    def __post_init__(self):
        if not (0.0 <= self.x0 < 2.0 * math.pi):
            raise LatticeError(f"x0 超出 [0, 2π): {self.x0}")
        if not (-math.pi <= self.p0 < math.pi):
            raise LatticeError(f"p0 超出 [−π, π): {self.p0}")
        if self.sigma is not None and not (self.sigma > 0.0):
            raise LatticeError(f"sigma 必须 > 0: {self.sigma}")

    def width(self, lattice: LatticeConfig) -> float:
        if self.sigma is None:
            return math.sqrt(lattice.hbar / 2.0)
        return self.sigma


class WaveFunction2D:
    """
    两自由度波函数，amplitudes[j1, j2] 即位置基下的系数矩阵 A

    构造时检查有限性与归一化。
    """

    __slots__ = ("amplitudes", "lattice")

    def __init__(self, amplitudes: np.ndarray, lattice: LatticeConfig):
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (lattice.N, lattice.N):
            raise LatticeError(
                f"振幅形状 {amplitudes.shape} 与格点 N={lattice.N} 不符"
            )
        if not np.all(np.isfinite(amplitudes)):
            raise NonFiniteStateError("波函数含有非有限振幅")
        norm = float(np.sum(np.abs(amplitudes) ** 2))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise LatticeError(f"波函数未归一化: ‖ψ‖² = {norm:.12g}")
        self.amplitudes = amplitudes
        self.lattice = lattice

    @property
    def N(self) -> int:
        return self.lattice.N

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def __repr__(self) -> str:
        return f"WaveFunction2D(N={self.N})"
