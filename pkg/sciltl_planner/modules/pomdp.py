"""
有限POMDP模型与精确信念更新

信念是隐状态上的稠密概率向量。belief_update 实现贝叶斯滤波：
先按转移预测，再乘观测似然并归一化。
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from ..utils.errors import (
    DimensionMismatchError,
    ImpossibleObservationError,
    RowSumError,
    UnavailableActionError,
)

TOLERANCE = 1e-9

Belief = np.ndarray


def _cdf_rows(rows: np.ndarray) -> np.ndarray:
    """逐行累积分布，最后一项归一到恰好1.0；全零行保持为0"""
    cdf = np.cumsum(rows, axis=-1)
    last = cdf[..., -1:]
    safe = np.where(last > 0, last, 1.0)
    cdf = np.where(last > 0, cdf / safe, 0.0)
    return cdf


def _freeze(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Pomdp:
    """有限POMDP: T(s,a,s')、初始分布、观测函数 O(s,o)"""
    transitions: np.ndarray
    observations: np.ndarray
    init: np.ndarray
    action_names: Tuple[str, ...]
    observation_names: Tuple[str, ...]
    state_names: Tuple[str, ...] = ()
    available: np.ndarray = field(init=False, repr=False)
    all_actions_available: bool = field(init=False, repr=False)
    _transition_cdf: np.ndarray = field(init=False, repr=False)
    _observation_cdf: np.ndarray = field(init=False, repr=False)
    _init_cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        transitions = _freeze(self.transitions)
        observations = _freeze(self.observations)
        init = _freeze(self.init)
        object.__setattr__(self, 'transitions', transitions)
        object.__setattr__(self, 'observations', observations)
        object.__setattr__(self, 'init', init)
        object.__setattr__(self, 'action_names', tuple(self.action_names))
        object.__setattr__(self, 'observation_names', tuple(self.observation_names))
        object.__setattr__(self, 'state_names', tuple(self.state_names))
        self.validate()

        available = transitions.sum(axis=2).T > 0
        available.setflags(write=False)
        object.__setattr__(self, 'available', available)
        object.__setattr__(self, 'all_actions_available', bool(available.all()))
        object.__setattr__(self, '_transition_cdf', _cdf_rows(transitions))
        object.__setattr__(self, '_observation_cdf', _cdf_rows(observations))
        object.__setattr__(self, '_init_cdf', _cdf_rows(init))

    @property
    def state_count(self) -> int:
        return self.transitions.shape[1]

    @property
    def action_count(self) -> int:
        return self.transitions.shape[0]

    @property
    def observation_count(self) -> int:
        return self.observations.shape[1]

    def validate(self, tolerance: float = TOLERANCE) -> None:
        """检查形状与随机性约束"""
        A, S, S2 = self.transitions.shape
        if S != S2:
            raise DimensionMismatchError(f"转移矩阵形状错误: {self.transitions.shape}")
        if self.observations.shape[0] != S:
            raise DimensionMismatchError(f"观测矩阵行数 {self.observations.shape[0]} 与状态数 {S} 不一致")
        if self.init.shape != (S,):
            raise DimensionMismatchError(f"初始分布维度 {self.init.shape} 与状态数 {S} 不一致")
        if len(self.action_names) != A:
            raise DimensionMismatchError(f"动作名数 {len(self.action_names)} 与动作数 {A} 不一致")
        if len(self.observation_names) != self.observations.shape[1]:
            raise DimensionMismatchError("观测名数与观测数不一致")
        if self.state_names and len(self.state_names) != S:
            raise DimensionMismatchError("状态名数与状态数不一致")

        if (self.transitions < 0).any() or (self.observations < 0).any() or (self.init < 0).any():
            raise ValueError("概率不能为负")

        for a in range(A):
            for s in range(S):
                total = float(self.transitions[a, s].sum())
                # 不可用动作的行全为0
                if total != 0.0 and abs(total - 1.0) > tolerance:
                    raise RowSumError('T', (s, a), total)
        for s in range(S):
            total = float(self.observations[s].sum())
            if abs(total - 1.0) > tolerance:
                raise RowSumError('O', (s,), total)
        total = float(self.init.sum())
        if abs(total - 1.0) > tolerance:
            raise RowSumError('init', (), total)

    def available_actions(self, s: int) -> Tuple[int, ...]:
        return tuple(int(a) for a in np.flatnonzero(self.available[s]))

    def action_index(self, name: str) -> int:
        return self.action_names.index(name)

    def same_as(self, other: 'Pomdp') -> bool:
        """数值与命名完全相同"""
        return (
            np.array_equal(self.transitions, other.transitions)
            and np.array_equal(self.observations, other.observations)
            and np.array_equal(self.init, other.init)
            and self.action_names == other.action_names
            and self.observation_names == other.observation_names
        )


def validate_belief(b: Belief, state_count: Optional[int] = None, tolerance: float = TOLERANCE) -> bool:
    """信念非负且和为1"""
    b = np.asarray(b, dtype=float)
    if state_count is not None and b.shape != (state_count,):
        return False
    return bool((b >= 0).all() and abs(float(b.sum()) - 1.0) <= tolerance)


def legal_actions(m: Pomdp, b: Belief) -> Tuple[int, ...]:
    """信念支撑上所有状态都可用的动作；若为空则退化为任一支撑状态可用的动作"""
    if m.all_actions_available:
        return tuple(range(m.action_count))
    support = m.available[np.asarray(b) > 0]
    everywhere = np.flatnonzero(support.all(axis=0))
    if len(everywhere):
        return tuple(int(a) for a in everywhere)
    return tuple(int(a) for a in np.flatnonzero(support.any(axis=0)))


def predict(m: Pomdp, b: Belief, a: int) -> np.ndarray:
    """一步预测 Σ_{s'} b(s')T(s',a,s)"""
    b = np.asarray(b, dtype=float)
    if b.shape != (m.state_count,):
        raise DimensionMismatchError(f"信念维度 {b.shape} 与状态数 {m.state_count} 不一致")
    if not m.all_actions_available and not m.available[b > 0, a].any():
        raise UnavailableActionError(f"动作 {m.action_names[a]} 在信念支撑上不可用")
    predicted = b @ m.transitions[a]
    return predicted / predicted.sum()


def observation_likelihood(m: Pomdp, b: Belief, a: int) -> np.ndarray:
    """执行a后各观测的边缘概率"""
    return predict(m, b, a) @ m.observations


def posterior(m: Pomdp, predicted: np.ndarray, o: int) -> Belief:
    """由预测分布和观测得到后验"""
    joint = predicted * m.observations[:, o]
    normalizer = joint.sum()
    if normalizer <= 0.0:
        raise ImpossibleObservationError(f"观测 {m.observation_names[o]} 在当前信念下概率为0")
    return joint / normalizer


def belief_update(m: Pomdp, b: Belief, a: int, o: int) -> Belief:
    """贝叶斯信念更新"""
    return posterior(m, predict(m, b, a), o)


def _draw(cdf_row: np.ndarray, rng: np.random.Generator) -> int:
    return int(np.searchsorted(cdf_row, rng.random(), side='right'))


def sample_step(m: Pomdp, s: int, a: int, rng: np.random.Generator) -> Tuple[int, int]:
    """采样 s' ~ T(s,a,·), o ~ O(s',·)"""
    if not m.available[s, a]:
        raise UnavailableActionError(f"动作 {m.action_names[a]} 在状态 {s} 不可用")
    s_next = _draw(m._transition_cdf[a, s], rng)
    o = _draw(m._observation_cdf[s_next], rng)
    return s_next, o


def sample_initial_state(m: Pomdp, rng: np.random.Generator) -> int:
    return _draw(m._init_cdf, rng)


def sample_from_belief(b: Belief, rng: np.random.Generator, cdf: Optional[np.ndarray] = None) -> int:
    """按信念采样隐状态；可传入预先算好的累积分布"""
    if cdf is None:
        cdf = _cdf_rows(np.asarray(b, dtype=float))
    return _draw(cdf, rng)


def belief_cdf(b: Belief) -> np.ndarray:
    return _cdf_rows(np.asarray(b, dtype=float))


@dataclass(frozen=True)
class History:
    """动作-观测历史及其缓存信念"""
    steps: Tuple[Tuple[int, int], ...]
    belief: np.ndarray = field(compare=False, repr=False)

    @classmethod
    def initial(cls, m: Pomdp) -> 'History':
        return cls((), np.array(m.init, dtype=float))

    def __len__(self) -> int:
        return len(self.steps)

    def extend(self, m: Pomdp, a: int, o: int) -> 'History':
        return History(self.steps + ((a, o),), belief_update(m, self.belief, a, o))

    def child(self, a: int, o: int, belief: Belief) -> 'History':
        """已算好后验时直接构造子历史"""
        return History(self.steps + ((a, o),), belief)

    def recompute(self, m: Pomdp) -> Belief:
        b = np.array(m.init, dtype=float)
        for a, o in self.steps:
            b = belief_update(m, b, a, o)
        return b

    def verify(self, m: Pomdp, tolerance: float = TOLERANCE) -> bool:
        """缓存信念与从头重算的结果一致"""
        return bool(np.allclose(self.belief, self.recompute(m), rtol=0.0, atol=tolerance))


def max_component(b: Belief) -> float:
    """‖b‖∞"""
    return float(np.max(b))
