"""
异常定义模块

所有库代码只抛出 EntangleError 的子类，由命令行入口统一转换为一行诊断信息。
"""


class EntangleError(Exception):
    """工具包的根异常"""


class ConfigError(EntangleError, ValueError):
    """配置文件或命令行参数无效"""


class LatticeError(EntangleError, ValueError):
    """格点或相干态参数无效"""


class NonFiniteStateError(EntangleError, ValueError):
    """波函数中出现 NaN 或 Inf"""


class SvdConvergenceError(EntangleError):
    """奇异值分解不收敛"""


class EigenDecompositionError(EntangleError):
    """本征值分解失败"""


class DomainError(EntangleError, ValueError):
    """自变量超出定义域（负的 ε、越界的 ω、密度为零等）"""


class DegenerateWindowError(EntangleError, ValueError):
    """饱和检测窗口退化"""


class EmptyEnsembleError(EntangleError, ValueError):
    """系综为空"""


class EmptyWindowError(EntangleError, ValueError):
    """给定 N 下统计窗口为空"""


class EnsembleFormatError(EntangleError, ValueError):
    """谱文件格式错误"""


class DimensionMismatchError(EntangleError, ValueError):
    """文件中的 N 与请求的解析量不一致"""
