"""共享测试夹具：玩具模型、内置无人机模型与编译好的自动机"""

import numpy as np
import pytest

from sciltl_planner.modules.automata import build_automaton
from sciltl_planner.modules.drone_probing import drone_probing_model
from sciltl_planner.modules.formula_parser import parse_formula
from sciltl_planner.modules.model_io import parse_model


# 两个状态，观测直接揭示状态；good 以0.5、bad 以0.2 进入吸收态1
TOY_MODEL = """\
# convergence toy
states 2
actions good bad
observations o0 o1
init 0 1.0
T 0 good 0 0.5
T 0 good 1 0.5
T 0 bad 0 0.8
T 0 bad 1 0.2
T 1 good 1 1.0
T 1 bad 1 1.0
O 0 o0 1.0
O 1 o1 1.0
atom arrived {1:1.0} > 0.9
objective F arrived
"""

# a1 确定地到达目标态1，a2 确定地进入陷阱态2
REACH_MODEL = """\
states 3
actions a1 a2
observations o
init 0 1.0
T 0 a1 1 1.0
T 0 a2 2 1.0
T 1 a1 1 1.0
T 1 a2 1 1.0
T 2 a1 2 1.0
T 2 a2 2 1.0
O 0 o 1.0
O 1 o 1.0
O 2 o 1.0
atom arrived {1:1.0} > 0.9
objective F arrived
"""

# 单状态，原子 yes 恒真、no 恒假
TRIVIAL_MODEL = """\
states 1
actions stay other
observations o
init 0 1.0
T 0 stay 0 1.0
T 0 other 0 1.0
O 0 o 1.0
atom yes {0:1.0} >= 1
atom no {0:1.0} > 1
objective F yes
"""

# 状态隐藏、观测带噪声的三状态模型
NOISY_MODEL = """\
states 3
actions left right
observations dark light
init 0 0.5
init 1 0.5
T 0 left 0 0.7
T 0 left 1 0.3
T 0 right 1 0.6
T 0 right 2 0.4
T 1 left 0 0.5
T 1 left 1 0.5
T 1 right 2 1.0
T 2 left 1 0.2
T 2 left 2 0.8
T 2 right 2 1.0
O 0 dark 0.9
O 0 light 0.1
O 1 dark 0.5
O 1 light 0.5
O 2 dark 0.2
O 2 light 0.8
atom bright {2:1.0} > 0.6
atom shadow {0:1.0} >= 0.5
objective !bright U (shadow & X bright)
"""


class Problem:
    """模型 + 公式 + 自动机"""

    def __init__(self, text, objective=None):
        self.bundle = parse_model(text)
        self.pomdp = self.bundle.pomdp
        self.atoms = self.bundle.atoms
        self.formula = parse_formula(objective or self.bundle.objective, self.atoms)
        self.dfa = build_automaton(self.formula)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def toy():
    return Problem(TOY_MODEL)


@pytest.fixture
def reach():
    return Problem(REACH_MODEL)


@pytest.fixture
def trivial():
    return Problem(TRIVIAL_MODEL)


@pytest.fixture
def noisy():
    return Problem(NOISY_MODEL)


@pytest.fixture(scope='session')
def drone_bundle():
    return drone_probing_model()


@pytest.fixture(scope='session')
def drone_dfa(drone_bundle):
    return build_automaton(parse_formula(drone_bundle.objective, drone_bundle.atoms))


@pytest.fixture
def write_model(tmp_path):
    """把模型文本写到临时文件并返回路径"""
    def _write(text, name='model.pomdp'):
        path = tmp_path / name
        path.write_text(text, encoding='utf-8')
        return str(path)
    return _write


@pytest.fixture
def model_texts():
    return {
        'toy': TOY_MODEL,
        'reach': REACH_MODEL,
        'trivial': TRIVIAL_MODEL,
        'noisy': NOISY_MODEL,
    }


@pytest.fixture
def make_problem():
    return Problem
