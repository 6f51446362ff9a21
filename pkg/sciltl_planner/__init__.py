"""
sc-iLTL 规划器

在部分可观测环境中，为信念上的线性不等式时序目标 (sc-iLTL) 做在线规划：
目标公式编译成DFA，与信念MDP做乘积，再用蒙特卡洛树搜索选择动作。
"""

__version__ = "1.0.0"
__author__ = "Mongkok AI Team"

from .modules.automata import Dfa, build_automaton
from .modules.drone_probing import drone_probing_model
from .modules.experiment import ExperimentConfig, run_episode, run_experiment
from .modules.formula_parser import parse_formula
from .modules.model_io import load_model, save_model
from .modules.planner import MctsPlanner, PlannerConfig
from .modules.pomdp import Pomdp, belief_update
from .utils.config_loader import ConfigLoader
from .utils.logger import get_logger

__all__ = [
    'Dfa',
    'build_automaton',
    'drone_probing_model',
    'ExperimentConfig',
    'run_episode',
    'run_experiment',
    'parse_formula',
    'load_model',
    'save_model',
    'MctsPlanner',
    'PlannerConfig',
    'Pomdp',
    'belief_update',
    'ConfigLoader',
    'get_logger',
]


def run_main():
    """同步入口函数，用于命令行执行"""
    import sys

    from sciltl_planner.main import cli_main
    sys.exit(cli_main())
