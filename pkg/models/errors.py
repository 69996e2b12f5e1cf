"""
异常定义
工具包内所有可预期的错误都派生自 AttractorToolkitError，
CLI 依据异常类型决定退出码。
"""


class AttractorToolkitError(Exception):
    """工具包异常基类"""


class DimensionMismatchError(AttractorToolkitError, ValueError):
    """多项式、点或映射的维数不一致"""


class PolynomialSyntaxError(AttractorToolkitError, ValueError):
    """多项式表达式语法错误，position 为出错字符位置（从 0 开始）"""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (位置 {position})")
        self.position = position


class UnknownVariableError(PolynomialSyntaxError):
    """表达式中出现未声明的变量名"""


class InvalidExponentError(PolynomialSyntaxError):
    """指数为负数或非整数"""


class SamplingError(AttractorToolkitError):
    """均匀采样失败（拒绝采样接受率过低）"""


class DivergenceError(AttractorToolkitError):
    """数值积分或迭代出现非有限值"""


class TrajectoryExitError(AttractorToolkitError):
    """轨迹离开状态集 X"""


class TighteningError(AttractorToolkitError, ValueError):
    """SOS 收紧问题的参数不合法（次数、约束列表等）"""


class CompilationError(AttractorToolkitError):
    """SOS 程序到 SDP 的编译出现内部一致性错误"""


class SolutionStatusError(AttractorToolkitError):
    """SDP 解的状态不允许恢复多项式"""


class FingerprintMismatchError(AttractorToolkitError, ValueError):
    """外逼近对象属于不同的系统或状态集"""


class ConfigError(AttractorToolkitError, ValueError):
    """配置文件校验失败"""


class SdpFormatError(AttractorToolkitError, ValueError):
    """SDPA 稀疏格式文件无法解析"""
