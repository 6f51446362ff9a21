"""功能模块"""

from .formula import LinearAtom, MaxComponentAtom, AnyOfAtom, Formula, LabelVector, Verdict, label_of, progress, trace_satisfies
from .formula_parser import FormulaParser, parse_formula
from .automata import Dfa, accepts_prefix, build_automaton, compile_formula, minimize, step
from .pomdp import History, Pomdp, belief_update, observation_likelihood, sample_step
from .model_io import ModelBundle, load_model, save_model
from .drone_probing import drone_probing_model
from .product import SINK, ProductHistoryState, StepOutcome, advance, enumerate_successors, init_product, is_terminal, product_step
from .planner import MctsPlanner, NodeStats, PlannerConfig, SearchTree
from .oracle import ExpectimaxOracle, expectimax_action, expectimax_value
from .experiment import EpisodeResult, ExperimentConfig, ExperimentRunner, run_episode, run_experiment

__all__ = [
    'LinearAtom',
    'MaxComponentAtom',
    'AnyOfAtom',
    'Formula',
    'LabelVector',
    'Verdict',
    'label_of',
    'progress',
    'trace_satisfies',
    'FormulaParser',
    'parse_formula',
    'Dfa',
    'accepts_prefix',
    'build_automaton',
    'compile_formula',
    'minimize',
    'step',
    'History',
    'Pomdp',
    'belief_update',
    'observation_likelihood',
    'sample_step',
    'ModelBundle',
    'load_model',
    'save_model',
    'drone_probing_model',
    'SINK',
    'ProductHistoryState',
    'StepOutcome',
    'advance',
    'enumerate_successors',
    'init_product',
    'is_terminal',
    'product_step',
    'MctsPlanner',
    'NodeStats',
    'PlannerConfig',
    'SearchTree',
    'ExpectimaxOracle',
    'expectimax_action',
    'expectimax_value',
    'EpisodeResult',
    'ExperimentConfig',
    'ExperimentRunner',
    'run_episode',
    'run_experiment',
]
