"""
无人机探测基准模型

隐状态编码 (无人机位置, 目标位置)：state = drone_cell * C + target_cell，
cell = x + y * width，(0,0) 在西南角，N 使 y 加一。
"""

from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from .formula import LinearAtom, MaxComponentAtom
from .model_io import ModelBundle
from .pomdp import Pomdp
from ..utils.errors import ConfigError
from ..utils.logger import get_logger


ACTIONS: Tuple[str, ...] = ('N', 'S', 'E', 'W', 'X')
OBSERVATIONS: Tuple[str, ...] = ('SW', 'NW', 'NE', 'SE', 'None')

MOVES: Dict[str, Tuple[int, int]] = {
    'N': (0, 1),
    'S': (0, -1),
    'E': (1, 0),
    'W': (-1, 0),
    'X': (0, 0),
}

# 目标相对无人机的偏移 (dx, dy) -> 观测分布；视野外一律 None
DEFAULT_SENSOR: Dict[Tuple[int, int], Dict[str, float]] = {
    (0, 0): {'SW': 0.25, 'NW': 0.25, 'NE': 0.25, 'SE': 0.25},
    (0, 1): {'NE': 0.5, 'NW': 0.5},
    (0, -1): {'SE': 0.5, 'SW': 0.5},
    (1, 0): {'NE': 0.5, 'SE': 0.5},
    (-1, 0): {'NW': 0.5, 'SW': 0.5},
    (1, 1): {'NE': 1.0},
    (-1, 1): {'NW': 1.0},
    (-1, -1): {'SW': 1.0},
    (1, -1): {'SE': 1.0},
}

OBJECTIVE = "(!goal U measured) & F goal & F measured"


class DroneGrid:
    """网格坐标与隐状态编号之间的换算"""

    def __init__(self, width: int, height: int):
        if width < 2 or height < 2:
            raise ConfigError(f"网格尺寸过小: {width}x{height}，宽高都必须不小于2")
        self.width = width
        self.height = height

    @property
    def cells(self) -> int:
        return self.width * self.height

    @property
    def state_count(self) -> int:
        return self.cells * self.cells

    def contains(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def cell(self, x: int, y: int) -> int:
        return x + y * self.width

    def coords(self, cell: int) -> Tuple[int, int]:
        return cell % self.width, cell // self.width

    def state(self, drone: Tuple[int, int], target: Tuple[int, int]) -> int:
        return self.cell(*drone) * self.cells + self.cell(*target)

    def decode(self, s: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        drone, target = divmod(s, self.cells)
        return self.coords(drone), self.coords(target)

    def move(self, position: Tuple[int, int], action: str) -> Tuple[int, int]:
        """越界移动原地不动"""
        dx, dy = MOVES[action]
        x, y = position[0] + dx, position[1] + dy
        return (x, y) if self.contains(x, y) else position

    def neighbours(self, position: Tuple[int, int]) -> List[Tuple[int, int]]:
        x, y = position
        result = [(x + dx, y + dy) for dx, dy in ((0, 1), (0, -1), (1, 0), (-1, 0))]
        result = [p for p in result if self.contains(*p)]
        return result or [position]

    def target_marginal(self, b: np.ndarray) -> np.ndarray:
        """信念在目标位置上的边缘分布 (长度 C)"""
        return np.asarray(b).reshape(self.cells, self.cells).sum(axis=0)

    def drone_marginal(self, b: np.ndarray) -> np.ndarray:
        return np.asarray(b).reshape(self.cells, self.cells).sum(axis=1)


def _sensor_row(sensor: Mapping[Tuple[int, int], Mapping[str, float]], offset: Tuple[int, int]) -> np.ndarray:
    row = np.zeros(len(OBSERVATIONS))
    distribution = sensor.get(offset, {'None': 1.0})
    for name, p in distribution.items():
        if name not in OBSERVATIONS:
            raise ConfigError(f"传感器表中有未知观测 {name!r}")
        row[OBSERVATIONS.index(name)] = p
    return row


def drone_probing_model(
    width: int = 4,
    height: int = 4,
    threshold: float = 0.9,
    goal_cell: Tuple[int, int] = (3, 3),
    sensor: Optional[Mapping[Tuple[int, int], Mapping[str, float]]] = None,
) -> ModelBundle:
    """生成无人机探测模型、原子表 (measured, goal) 和目标公式"""
    logger = get_logger('DroneProbing')
    grid = DroneGrid(width, height)
    goal_cell = (int(goal_cell[0]), int(goal_cell[1]))
    if not grid.contains(*goal_cell):
        raise ConfigError(f"目标格 {goal_cell} 不在 {width}x{height} 网格内")
    sensor = DEFAULT_SENSOR if sensor is None else sensor

    C = grid.cells
    S = grid.state_count
    transitions = np.zeros((len(ACTIONS), S, S))
    observations = np.zeros((S, len(OBSERVATIONS)))
    init = np.zeros(S)

    for s in range(S):
        drone, target = grid.decode(s)
        observations[s] = _sensor_row(sensor, (target[0] - drone[0], target[1] - drone[1]))
        targets = grid.neighbours(target)
        for a, name in enumerate(ACTIONS):
            next_drone = grid.move(drone, name)
            for next_target in targets:
                transitions[a, s, grid.state(next_drone, next_target)] += 1.0 / len(targets)

    # 无人机在 (0,0)，目标在除 (0,0) 外的格子上均匀分布
    for cell in range(1, C):
        init[grid.state((0, 0), grid.coords(cell))] = 1.0 / (C - 1)

    state_names = tuple(
        f"d{d[0]},{d[1]}|t{t[0]},{t[1]}" for d, t in (grid.decode(s) for s in range(S))
    )
    pomdp = Pomdp(transitions, observations, init, ACTIONS, OBSERVATIONS, state_names)

    goal_states = {
        grid.state(goal_cell, grid.coords(cell)): 1.0 for cell in range(C)
    }
    atoms = {
        'measured': MaxComponentAtom('measured', threshold, strict=True),
        'goal': LinearAtom('goal', goal_states, 1.0, strict=False),
    }
    logger.info(f"无人机探测模型: {width}x{height} 网格, {S} 个隐状态, 降落点 {goal_cell}")
    return ModelBundle(pomdp, atoms, OBJECTIVE)
