"""
最近邻间距的参考分布
"""

import numpy as np
from scipy.special import erf


def wigner_surmise_gue(s):
    """GUE 的 Wigner 猜想 P(s) = (32/π²)·s²·exp(−4s²/π)"""
    s = np.asarray(s, dtype=float)
    values = (32.0 / np.pi**2) * s**2 * np.exp(-4.0 * s**2 / np.pi)
    return float(values) if values.ndim == 0 else values


def wigner_surmise_gue_cdf(s):
    """∫₀^s P = erf(2s/√π) − (4s/π)·exp(−4s²/π)"""
    s = np.maximum(np.asarray(s, dtype=float), 0.0)
    values = erf(2.0 * s / np.sqrt(np.pi)) - (4.0 * s / np.pi) * np.exp(-4.0 * s**2 / np.pi)
    return float(values) if values.ndim == 0 else values


def poisson_spacing(s):
    """无关联能级的间距分布 e^{−s}"""
    s = np.asarray(s, dtype=float)
    values = np.exp(-s)
    return float(values) if values.ndim == 0 else values


def poisson_spacing_cdf(s):
    s = np.maximum(np.asarray(s, dtype=float), 0.0)
    values = 1.0 - np.exp(-s)
    return float(values) if values.ndim == 0 else values
