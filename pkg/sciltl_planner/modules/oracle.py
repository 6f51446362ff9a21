"""
有限视界 expectimax：对所有动作取最大、对所有观测取期望，
作为MCTS收敛测试的精确参照值。
"""

from typing import Dict, Optional, Tuple

from .automata import Dfa
from .pomdp import Pomdp, legal_actions
from .product import ProductHistoryState, enumerate_successors
from ..utils.config_loader import ConfigLoader
from ..utils.errors import ExpectimaxBudgetError

DEFAULT_MAX_NODES = 1000000


class ExpectimaxOracle:
    """带节点预算的递归求值器"""

    def __init__(self, pomdp: Pomdp, dfa: Dfa, max_nodes: int = DEFAULT_MAX_NODES):
        self._pomdp = pomdp
        self._dfa = dfa
        self._max_nodes = max_nodes
        self.nodes = 0

    @classmethod
    def from_config(cls, pomdp: Pomdp, dfa: Dfa, config: Optional[ConfigLoader] = None) -> 'ExpectimaxOracle':
        """节点预算取配置文件的 oracle.max_nodes"""
        section = (config or ConfigLoader()).oracle
        return cls(pomdp, dfa, int(section.get('max_nodes', DEFAULT_MAX_NODES)))

    def _visit(self) -> None:
        self.nodes += 1
        if self.nodes > self._max_nodes:
            raise ExpectimaxBudgetError(self._max_nodes)

    def action_value(self, x: ProductHistoryState, a: int, horizon: int) -> float:
        """Q_D(x, a)：即时奖励已计入的后继值期望"""
        total = 0.0
        for p, child, _ in enumerate_successors(self._pomdp, self._dfa, x, a):
            # 进入接受态的后继值为1，reward 与之重合，不重复计
            total += p * self.value(child, horizon - 1)
        return total

    def value(self, x: ProductHistoryState, horizon: int) -> float:
        """V_D(x)：Sink 或接受态为1，死状态或视界耗尽为0"""
        self._visit()
        if x.sink or x.collected:
            return 1.0
        if horizon <= 0 or self._dfa.is_dead(x.q):
            return 0.0
        return max(self.action_value(x, a, horizon) for a in legal_actions(self._pomdp, x.belief))

    def action_values(self, x: ProductHistoryState, horizon: int) -> Dict[int, float]:
        return {a: self.action_value(x, a, horizon) for a in legal_actions(self._pomdp, x.belief)}


def expectimax_value(
    x: ProductHistoryState, horizon: int, pomdp: Pomdp, dfa: Dfa, max_nodes: int = DEFAULT_MAX_NODES
) -> float:
    """精确的有限视界最优到达概率"""
    return ExpectimaxOracle(pomdp, dfa, max_nodes).value(x, horizon)


def expectimax_action(
    x: ProductHistoryState, horizon: int, pomdp: Pomdp, dfa: Dfa, max_nodes: int = DEFAULT_MAX_NODES
) -> Tuple[int, Dict[int, float]]:
    """最优动作 (平局取编号最小) 与各动作的值"""
    values = ExpectimaxOracle(pomdp, dfa, max_nodes).action_values(x, horizon)
    best = max(values, key=lambda a: (values[a], -a))
    return best, values
