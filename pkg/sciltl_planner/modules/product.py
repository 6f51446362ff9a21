"""
乘积历史MDP

状态是 (历史, DFA状态) 或 Sink。DFA读入的是源信念的标签 L(b)，
进入接受态的那一步奖励为1，之后转入吸收的 Sink。
"""

from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .automata import Dfa
from .pomdp import History, Pomdp, legal_actions, observation_likelihood, posterior, predict
from ..utils.errors import PlannerError


@dataclass(frozen=True)
class ProductHistoryState:
    """乘积历史状态 h^× = ⟨h, q⟩"""
    history: Optional[History]
    q: int
    label: int = 0
    collected: bool = False
    sink: bool = False

    @property
    def belief(self) -> np.ndarray:
        if self.history is None:
            raise PlannerError("Sink 没有信念")
        return self.history.belief

    @property
    def key(self) -> tuple:
        if self.sink:
            return ('sink',)
        return (self.history.steps, self.q)


SINK = ProductHistoryState(history=None, q=-1, collected=True, sink=True)


@dataclass(frozen=True)
class StepOutcome:
    next: ProductHistoryState
    reward: float
    observation: Optional[int] = None


def _make_state(d: Dfa, history: History, q: int) -> ProductHistoryState:
    collected = d.is_final(q)
    # 接受态和死状态之后不再读标签
    if collected or d.is_dead(q):
        return ProductHistoryState(history, q, 0, collected)
    return ProductHistoryState(history, q, d.label_bits(history.belief), False)


def init_product(m: Pomdp, d: Dfa) -> ProductHistoryState:
    """初始乘积状态 ⟨b0, q_init⟩"""
    d.check_dimension(m.state_count)
    history = History.initial(m)
    return ProductHistoryState(history, d.initial, d.label_bits(history.belief), d.is_final(d.initial))


def is_terminal(x: ProductHistoryState) -> bool:
    return x.sink


def advance(m: Pomdp, d: Dfa, x: ProductHistoryState, a: int, o: int) -> StepOutcome:
    """给定观测的确定性乘积转移"""
    if x.sink or x.collected:
        return StepOutcome(SINK, 0.0)
    q_next = d.transitions[x.q][x.label]
    history = x.history.extend(m, a, o)
    return StepOutcome(_make_state(d, history, q_next), 1.0 if d.is_final(q_next) else 0.0, o)


def product_step(m: Pomdp, d: Dfa, x: ProductHistoryState, a: int, rng: np.random.Generator) -> StepOutcome:
    """按观测似然采样观测后推进"""
    if x.sink or x.collected:
        return StepOutcome(SINK, 0.0)
    likelihood = observation_likelihood(m, x.history.belief, a)
    cdf = np.cumsum(likelihood)
    o = int(np.searchsorted(cdf / cdf[-1], rng.random(), side='right'))
    return advance(m, d, x, a, o)


def enumerate_successors(
    m: Pomdp, d: Dfa, x: ProductHistoryState, a: int
) -> List[Tuple[float, ProductHistoryState, float]]:
    """所有正概率后继 (概率, 状态, 奖励)"""
    if x.sink:
        raise PlannerError("Sink 没有后继可枚举")
    if x.collected:
        return [(1.0, SINK, 0.0)]
    predicted = predict(m, x.history.belief, a)
    likelihood = predicted @ m.observations
    q_next = d.transitions[x.q][x.label]
    reward = 1.0 if d.is_final(q_next) else 0.0
    successors = []
    for o in np.flatnonzero(likelihood > 0):
        o = int(o)
        history = x.history.child(a, o, posterior(m, predicted, o))
        successors.append((float(likelihood[o]), _make_state(d, history, q_next), reward))
    return successors


def branching_factor(m: Pomdp, d: Dfa, x: ProductHistoryState) -> Tuple[int, int]:
    """(实际后继数之和, |A|·|Ω| 上界)；DFA转移确定，所以不增加分支"""
    count = sum(len(enumerate_successors(m, d, x, a)) for a in legal_actions(m, x.belief))
    return count, m.action_count * m.observation_count


def _belief_key(b: np.ndarray) -> bytes:
    return np.round(b, 12).tobytes()


def reachable_counts(m: Pomdp, d: Dfa, depth: int, max_nodes: int = 1000000) -> List[Dict[str, int]]:
    """逐层统计可达的不同信念数和不同乘积状态数"""
    x0 = init_product(m, d)
    beliefs = {_belief_key(x0.belief)}
    products = {(_belief_key(x0.belief), x0.q)}
    layer = [x0]
    counts = [{'depth': 0, 'beliefs': 1, 'product_states': 1}]
    for level in range(1, depth + 1):
        frontier: Dict[tuple, ProductHistoryState] = {}
        for x in layer:
            if x.sink or x.collected:
                continue
            for a in legal_actions(m, x.belief):
                for _, child, _ in enumerate_successors(m, d, x, a):
                    key = (_belief_key(child.belief), child.q)
                    beliefs.add(key[0])
                    products.add(key)
                    frontier.setdefault(key, child)
                    if len(products) > max_nodes:
                        raise PlannerError(f"可达状态数超过上限 {max_nodes}")
        layer = list(frontier.values())
        counts.append({'depth': level, 'beliefs': len(beliefs), 'product_states': len(products)})
    return counts


def format_step_log(
    step: int, action: str, observation: str, q: int, reward: float, max_belief: float
) -> str:
    """单步轨迹日志: 步数 动作 观测 q 奖励 ‖b‖∞"""
    return f"{step}\t{action}\t{observation}\t{q}\t{reward:g}\t{max_belief:.6f}"
