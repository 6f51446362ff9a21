"""
乘积历史状态上的蒙特卡洛树搜索

每次调用 search 建一棵新树。节点以动作-观测序列为键 (q 由序列唯一确定)，
保存访问次数、回报均值和每个动作的统计量。未访问的动作按编号顺序优先尝试，
之后按 UCB (自然对数) 选择。
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .automata import Dfa
from .pomdp import Pomdp, belief_cdf, legal_actions, sample_from_belief, sample_initial_state, sample_step
from .product import ProductHistoryState, StepOutcome, advance
from ..utils.config_loader import ConfigLoader
from ..utils.errors import ConfigError, PlannerError
from ..utils.logger import get_logger


@dataclass
class PlannerConfig:
    """搜索参数"""
    simulations: int = 2000
    max_depth: int = 20
    ucb_c: float = 1.0
    value_init: float = 0.0
    count_init: int = 0
    seed: Optional[int] = 0
    rollout_policy: str = 'uniform'

    def __post_init__(self):
        if self.simulations < 1:
            raise ConfigError(f"simulations 必须 ≥ 1，当前为 {self.simulations}")
        if self.max_depth < 1:
            raise ConfigError(f"max_depth 必须 ≥ 1，当前为 {self.max_depth}")
        if self.ucb_c < 0:
            raise ConfigError(f"ucb_c 必须 ≥ 0，当前为 {self.ucb_c}")
        if self.count_init < 0:
            raise ConfigError(f"count_init 必须 ≥ 0，当前为 {self.count_init}")
        if self.rollout_policy != 'uniform':
            raise ConfigError(f"不支持的 rollout 策略: {self.rollout_policy}")

    @classmethod
    def from_config(cls, config: Optional[ConfigLoader] = None, **overrides: Any) -> 'PlannerConfig':
        """从配置文件的planner段构造，overrides中非None的值优先"""
        section = dict((config or ConfigLoader()).planner)
        section.update({k: v for k, v in overrides.items() if v is not None})
        return cls(
            simulations=int(section.get('simulations', 2000)),
            max_depth=int(section.get('max_depth', 20)),
            ucb_c=float(section.get('ucb_c', 1.0)),
            value_init=float(section.get('value_init', 0.0)),
            count_init=int(section.get('count_init', 0)),
            seed=section.get('seed', 0),
            rollout_policy=section.get('rollout_policy', 'uniform'),
        )


@dataclass
class NodeStats:
    """访问次数与回报的增量均值"""
    visits: int = 0
    value: float = 0.0

    def update(self, ret: float) -> None:
        self.visits += 1
        self.value += (ret - self.value) / self.visits


class HistoryNode:
    """树节点 h^×"""

    __slots__ = ('state', 'actions', 'stats', 'action_stats', 'children')

    def __init__(self, state: ProductHistoryState, actions: Tuple[int, ...], value_init: float, count_init: int):
        self.state = state
        self.actions = actions
        self.action_stats = [NodeStats(count_init, value_init) for _ in actions]
        self.stats = NodeStats(count_init * len(actions), value_init)
        # (a, o) -> 子乘积状态与即时奖励
        self.children: Dict[Tuple[int, int], StepOutcome] = {}

    @property
    def belief(self) -> np.ndarray:
        return self.state.belief


class SearchTree:
    """以历史为键的节点表"""

    def __init__(self, root: ProductHistoryState):
        self.root = root
        self.nodes: Dict[Tuple[Tuple[int, int], ...], HistoryNode] = {}

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, state: ProductHistoryState) -> bool:
        return state.history.steps in self.nodes

    def get(self, state: ProductHistoryState) -> Optional[HistoryNode]:
        return self.nodes.get(state.history.steps)

    def add(self, node: HistoryNode) -> HistoryNode:
        self.nodes[node.state.history.steps] = node
        return node

    @property
    def root_node(self) -> Optional[HistoryNode]:
        return self.get(self.root)


class MctsPlanner:
    """乘积信念MDP上的MCTS规划器"""

    def __init__(self, pomdp: Pomdp, dfa: Dfa, config: Optional[PlannerConfig] = None):
        self._pomdp = pomdp
        self._dfa = dfa
        self._config = config or PlannerConfig()
        self._logger = get_logger('MctsPlanner')
        self._legal_cache: Dict[bytes, Tuple[int, ...]] = {}
        self.last_tree: Optional[SearchTree] = None

    @property
    def config(self) -> PlannerConfig:
        return self._config

    def legal_actions(self, belief: np.ndarray) -> Tuple[int, ...]:
        if self._pomdp.all_actions_available:
            return tuple(range(self._pomdp.action_count))
        key = (np.asarray(belief) > 0).tobytes()
        if key not in self._legal_cache:
            self._legal_cache[key] = legal_actions(self._pomdp, belief)
        return self._legal_cache[key]

    def search(self, x: ProductHistoryState, rng: Optional[np.random.Generator] = None) -> int:
        """运行 simulations 次模拟，返回根节点 V̂(h^×a) 最大的动作 (平局取编号最小)"""
        if x.sink:
            raise PlannerError("不能从 Sink 开始搜索")
        if rng is None:
            rng = np.random.default_rng(self._config.seed)

        tree = SearchTree(x)
        empty_history = not x.history.steps
        cdf = None if empty_history else belief_cdf(x.belief)
        for _ in range(self._config.simulations):
            if empty_history:
                s = sample_initial_state(self._pomdp, rng)
            else:
                s = sample_from_belief(x.belief, rng, cdf)
            self.simulate(s, x, 0, tree, rng)

        self.last_tree = tree
        root = tree.root_node
        values = np.array([st.value for st in root.action_stats])
        best = root.actions[int(np.argmax(values))]
        if self._logger.isEnabledFor(logging.DEBUG):
            self._logger.debug(f"搜索完成: 树节点 {len(tree)}, 根统计 {self.root_statistics()}")
        return best

    def simulate(
        self, s: int, x: ProductHistoryState, depth: int, tree: SearchTree, rng: np.random.Generator
    ) -> float:
        """一次模拟，返回从x出发的回报"""
        if depth >= self._config.max_depth or x.sink:
            return 0.0

        node = tree.get(x)
        if node is None:
            actions = self.legal_actions(x.belief)
            tree.add(HistoryNode(x, actions, self._config.value_init, self._config.count_init))
            return self.rollout(s, x, depth, rng)

        candidates = self._available_at(node.actions, s)
        if not candidates:
            return 0.0
        index = self._select(node, candidates)
        a = node.actions[index]
        s_next, o = sample_step(self._pomdp, s, a, rng)
        outcome = node.children.get((a, o))
        if outcome is None:
            outcome = advance(self._pomdp, self._dfa, x, a, o)
            node.children[(a, o)] = outcome

        ret = outcome.reward + self.simulate(s_next, outcome.next, depth + 1, tree, rng)
        node.stats.update(ret)
        node.action_stats[index].update(ret)
        return ret

    def _available_at(self, actions: Tuple[int, ...], s: int) -> List[int]:
        """actions 中在隐状态 s 可用的下标"""
        if self._pomdp.all_actions_available:
            return list(range(len(actions)))
        return [i for i, a in enumerate(actions) if self._pomdp.available[s, a]]

    def _select(self, node: HistoryNode, candidates: List[int]) -> int:
        for index in candidates:
            if node.action_stats[index].visits == 0:
                return index
        log_n = math.log(node.stats.visits)
        scores = [
            node.action_stats[i].value + self._config.ucb_c * math.sqrt(log_n / node.action_stats[i].visits)
            for i in candidates
        ]
        return candidates[int(np.argmax(scores))]

    def rollout(self, s: int, x: ProductHistoryState, depth: int, rng: np.random.Generator) -> float:
        """均匀随机动作推演到 d_max 或 Sink"""
        ret = 0.0
        while depth < self._config.max_depth and not x.sink:
            # 已接受的下一步只会进入Sink，死状态不可能再得奖励
            if x.collected or self._dfa.is_dead(x.q):
                break
            actions = self.legal_actions(x.belief)
            candidates = self._available_at(actions, s)
            if not candidates:
                break
            a = actions[candidates[int(rng.integers(len(candidates)))]]
            s, o = sample_step(self._pomdp, s, a, rng)
            outcome = advance(self._pomdp, self._dfa, x, a, o)
            ret += outcome.reward
            x = outcome.next
            depth += 1
        return ret

    def root_statistics(self) -> List[Dict[str, Any]]:
        """上一次搜索根节点每个动作的 (N, V̂)"""
        if self.last_tree is None or self.last_tree.root_node is None:
            return []
        root = self.last_tree.root_node
        return [
            {
                'action': self._pomdp.action_names[a],
                'index': a,
                'visits': st.visits,
                'value': st.value,
            }
            for a, st in zip(root.actions, root.action_stats)
        ]


def search(
    x: ProductHistoryState,
    config: PlannerConfig,
    pomdp: Pomdp,
    dfa: Dfa,
    rng: Optional[np.random.Generator] = None,
) -> int:
    """便捷函数：单次搜索"""
    return MctsPlanner(pomdp, dfa, config).search(x, rng)
