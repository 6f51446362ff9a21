from typing import Optional, Tuple


class PlannerError(Exception):
    """规划工具包异常基类"""


class FormulaSyntaxError(PlannerError, ValueError):
    """公式语法错误"""

    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        if position is not None:
            message = f"{message} (位置 {position})"
        super().__init__(message)


class UnknownAtomError(PlannerError, KeyError):
    """公式引用了未声明的原子命题"""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"未知原子命题: {name}")

    def __str__(self) -> str:
        return self.args[0]


class NonCoSafeError(PlannerError, ValueError):
    """公式不满足语法co-safe约束"""


class DimensionMismatchError(PlannerError, ValueError):
    """原子系数或信念维度与模型不一致"""


class AutomatonTooLargeError(PlannerError):
    """自动机状态数超过上限"""

    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"自动机状态数超过上限 {limit}，公式过大无法显式编译")


class ImpossibleObservationError(PlannerError, ValueError):
    """观测在当前信念和动作下概率为0"""


class UnavailableActionError(PlannerError, ValueError):
    """动作在当前状态不可用"""


class ModelFormatError(PlannerError, ValueError):
    """模型文件格式错误"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"第{line}行: {message}"
        super().__init__(message)


class RowSumError(ModelFormatError):
    """概率行和不为1"""

    def __init__(self, kind: str, row: Tuple[int, ...], total: float):
        self.kind = kind
        self.row = row
        self.total = total
        super().__init__(f"{kind} 行 {row} 概率和为 {total!r}，应为1")


class ExpectimaxBudgetError(PlannerError):
    """期望极大树节点数超过预算"""

    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"expectimax 节点数超过预算 {limit}")


class ConfigError(PlannerError, ValueError):
    """配置项非法"""
