"""
回合与批量实验

每个回合按 sha256(主种子, 回合编号) 派生独立随机流，因此结果与执行顺序、
是否并行都无关。汇总结果用 pandas 写成CSV。
"""

import hashlib
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from .automata import DEFAULT_MAX_STATES, Dfa, build_automaton
from .drone_probing import drone_probing_model
from .formula import Formula
from .formula_parser import parse_formula
from .model_io import ModelBundle, load_model
from .planner import MctsPlanner, PlannerConfig
from .pomdp import max_component, sample_initial_state, sample_step
from .product import advance, format_step_log, init_product
from ..utils.config_loader import ConfigLoader
from ..utils.errors import ConfigError
from ..utils.logger import get_logger


BUILTIN_MODELS = ('drone-probing',)


class Cause(Enum):
    ACCEPTED = 'accepted'
    DEAD = 'dead-automaton'
    HORIZON = 'horizon-exceeded'


@dataclass(frozen=True)
class ModelSource:
    """模型来源：内置生成器或模型文件"""
    builtin: Optional[str] = 'drone-probing'
    path: Optional[str] = None
    width: int = 4
    height: int = 4
    threshold: float = 0.9
    goal: Tuple[int, int] = (3, 3)

    def __post_init__(self):
        # 给出模型文件时忽略内置模型
        if self.path is not None:
            object.__setattr__(self, 'builtin', None)
        elif self.builtin is None:
            raise ConfigError("必须指定 --model 或 --builtin 之一")
        if self.builtin is not None and self.builtin not in BUILTIN_MODELS:
            raise ConfigError(f"未知内置模型 {self.builtin!r}，可选: {', '.join(BUILTIN_MODELS)}")
        object.__setattr__(self, 'goal', tuple(int(v) for v in self.goal))

    def load(self) -> ModelBundle:
        if self.path is not None:
            return load_model(self.path)
        return drone_probing_model(self.width, self.height, self.threshold, tuple(self.goal))


@dataclass(frozen=True)
class Problem:
    """已加载的模型、解析好的目标公式及其自动机"""
    bundle: ModelBundle
    formula: Formula
    dfa: Dfa


def build_problem(
    source: ModelSource, objective: Optional[str] = None, max_states: int = DEFAULT_MAX_STATES
) -> Problem:
    bundle = source.load()
    text = objective or bundle.objective
    if not text:
        raise ConfigError("模型没有声明 objective，也没有通过 --objective 给出")
    phi = parse_formula(text, bundle.atoms)
    dfa = build_automaton(phi, max_states)
    dfa.check_dimension(bundle.pomdp.state_count)
    return Problem(bundle, phi, dfa)


@lru_cache(maxsize=4)
def _cached_problem(source: ModelSource, objective: Optional[str], max_states: int) -> Problem:
    return build_problem(source, objective, max_states)


@dataclass
class ExperimentConfig:
    """实验参数"""
    model: ModelSource = field(default_factory=ModelSource)
    runs: int = 100
    horizon: int = 100
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    output_dir: str = 'results'
    seed: int = 7
    workers: int = 1
    belief_fix_threshold: float = 0.9
    hist_bin_width: int = 5
    show_progress: bool = False
    objective: Optional[str] = None
    max_states: int = DEFAULT_MAX_STATES

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError(f"runs 必须 ≥ 1，当前为 {self.runs}")
        if self.horizon < 1:
            raise ConfigError(f"horizon 必须 ≥ 1，当前为 {self.horizon}")
        if self.workers < 1:
            raise ConfigError(f"workers 必须 ≥ 1，当前为 {self.workers}")
        if self.hist_bin_width < 1:
            raise ConfigError(f"hist_bin_width 必须 ≥ 1，当前为 {self.hist_bin_width}")

    @classmethod
    def from_config(
        cls,
        config: Optional[ConfigLoader] = None,
        model: Optional[ModelSource] = None,
        planner: Optional[PlannerConfig] = None,
        **overrides: Any,
    ) -> 'ExperimentConfig':
        """从配置文件构造，overrides中非None的值优先"""
        config = config or ConfigLoader()
        section = dict(config.experiment)
        section.update({k: v for k, v in overrides.items() if v is not None})
        if model is None:
            drone = config.drone_probing
            if planner is None:
                planner = PlannerConfig.from_config(config, ucb_c=drone.get('ucb_c'))
            model = ModelSource(
                width=int(drone.get('width', 4)),
                height=int(drone.get('height', 4)),
                threshold=float(drone.get('threshold', 0.9)),
                goal=tuple(drone.get('goal', (3, 3))),
            )
        return cls(
            model=model,
            runs=int(section.get('runs', 100)),
            horizon=int(section.get('horizon', 100)),
            planner=planner or PlannerConfig.from_config(config),
            output_dir=section.get('output_dir', 'results'),
            seed=int(section.get('seed', 7)),
            workers=int(section.get('workers', 1)),
            belief_fix_threshold=float(section.get('belief_fix_threshold', 0.9)),
            hist_bin_width=int(section.get('hist_bin_width', 5)),
            show_progress=bool(section.get('show_progress', False)),
            objective=section.get('objective'),
            max_states=int(config.automata.get('max_states', DEFAULT_MAX_STATES)),
        )

    def problem(self) -> Problem:
        return _cached_problem(self.model, self.objective, self.max_states)


@dataclass
class EpisodeResult:
    run_id: int
    success: bool
    steps: int
    cause: Cause
    belief_trace: List[float] = field(default_factory=list)
    log_lines: List[str] = field(default_factory=list)


@dataclass
class ExperimentSummary:
    runs: int
    successes: int
    success_rate: float
    mean_steps: float
    cause_counts: Dict[str, int]
    step_histogram: List[Tuple[int, int]]
    belief_curve: List[Tuple[int, float, int]]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'runs': self.runs,
            'successes': self.successes,
            'success_rate': self.success_rate,
            'mean_steps': self.mean_steps,
            'accepted': self.cause_counts[Cause.ACCEPTED.value],
            'dead_automaton': self.cause_counts[Cause.DEAD.value],
            'horizon_exceeded': self.cause_counts[Cause.HORIZON.value],
        }


def episode_seed(master_seed: int, index: int) -> int:
    """由 (主种子, 回合编号) 派生的回合种子"""
    digest = hashlib.sha256(f"{master_seed}:{index}".encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'big')


def episode_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(episode_seed(master_seed, index))


class ExperimentRunner:
    """回合执行与统计汇总"""

    def __init__(self, config: ExperimentConfig, problem: Optional[Problem] = None):
        self._config = config
        self._problem = problem or config.problem()
        self._logger = get_logger('ExperimentRunner')

    @property
    def problem(self) -> Problem:
        return self._problem

    def run_episode(self, rng: np.random.Generator, run_id: int = 0) -> EpisodeResult:
        """采样真实隐状态，循环 搜索 → 执行 → 观测 → 推进乘积状态"""
        m = self._problem.bundle.pomdp
        d = self._problem.dfa
        cfg = self._config
        planner = MctsPlanner(m, d, cfg.planner)

        true_state = sample_initial_state(m, rng)
        x = init_product(m, d)
        trace = [max_component(x.belief)]
        fixed: Optional[float] = trace[0] if trace[0] > cfg.belief_fix_threshold else None
        lines: List[str] = []
        steps = 0
        cause = Cause.HORIZON

        if d.is_final(x.q):
            # 目标恒真，无需行动
            cause = Cause.ACCEPTED
        elif d.is_dead(x.q):
            cause = Cause.DEAD
        else:
            for step in range(1, cfg.horizon + 1):
                a = planner.search(x, rng)
                true_state, o = sample_step(m, true_state, a, rng)
                outcome = advance(m, d, x, a, o)
                x = outcome.next
                steps = step

                current = max_component(x.belief)
                trace.append(fixed if fixed is not None else current)
                if fixed is None and current > cfg.belief_fix_threshold:
                    fixed = current
                lines.append(format_step_log(
                    step, m.action_names[a], m.observation_names[o], x.q, outcome.reward, current
                ))

                if outcome.reward == 1.0:
                    cause = Cause.ACCEPTED
                    break
                if d.is_dead(x.q):
                    cause = Cause.DEAD
                    break

        result = EpisodeResult(run_id, cause is Cause.ACCEPTED, steps, cause, trace, lines)
        self._logger.info(f"回合 {run_id} 结束: {cause.value}, {steps} 步")
        return result

    def run_all(self) -> List[EpisodeResult]:
        cfg = self._config
        indices = range(cfg.runs)
        if cfg.workers > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                iterator = pool.map(_run_indexed_episode, [(cfg, i) for i in indices])
                results = list(tqdm(iterator, total=cfg.runs, disable=not cfg.show_progress, desc='episodes'))
        else:
            results = [
                self.run_episode(episode_rng(cfg.seed, i), i)
                for i in tqdm(indices, disable=not cfg.show_progress, desc='episodes')
            ]
        return sorted(results, key=lambda r: r.run_id)

    def summarize(self, results: List[EpisodeResult]) -> ExperimentSummary:
        cfg = self._config
        successes = [r for r in results if r.success]
        mean_steps = float(np.mean([r.steps for r in successes])) if successes else math.nan

        counts = {cause.value: 0 for cause in Cause}
        for r in results:
            counts[r.cause.value] += 1

        width = cfg.hist_bin_width
        bins = [0] * (cfg.horizon // width + 1)
        for r in successes:
            bins[r.steps // width] += 1
        histogram = [(i * width, count) for i, count in enumerate(bins)]

        curve: List[Tuple[int, float, int]] = []
        longest = max((len(r.belief_trace) for r in successes), default=0)
        for t in range(longest):
            active = [r.belief_trace[t] for r in successes if len(r.belief_trace) > t]
            curve.append((t, math.fsum(active) / len(active), len(active)))

        return ExperimentSummary(
            runs=len(results),
            successes=len(successes),
            success_rate=len(successes) / len(results),
            mean_steps=mean_steps,
            cause_counts=counts,
            step_histogram=histogram,
            belief_curve=curve,
        )

    def write_outputs(self, results: List[EpisodeResult], summary: ExperimentSummary, output_dir: str) -> List[str]:
        """写 episodes / steps_hist / belief_inf / summary 四个CSV"""
        os.makedirs(output_dir, exist_ok=True)
        frames = {
            'episodes.csv': pd.DataFrame(
                [(r.run_id, r.success, r.steps, r.cause.value) for r in results],
                columns=['run_id', 'success', 'steps', 'cause'],
            ),
            'steps_hist.csv': pd.DataFrame(summary.step_histogram, columns=['bin', 'count']),
            'belief_inf.csv': pd.DataFrame(summary.belief_curve, columns=['step', 'mean_belief_inf', 'active_runs']),
            'summary.csv': pd.DataFrame([summary.to_dict()]),
        }
        paths = []
        for name, frame in frames.items():
            path = os.path.join(output_dir, name)
            frame.to_csv(path, index=False, float_format='%.10g')
            paths.append(path)
        self._logger.info(f"实验结果已写入 {output_dir}")
        return paths

    def run_experiment(self) -> ExperimentSummary:
        results = self.run_all()
        summary = self.summarize(results)
        self.write_outputs(results, summary, self._config.output_dir)
        self._logger.info(
            f"实验完成: 成功 {summary.successes}/{summary.runs}, 成功回合平均步数 {summary.mean_steps:.2f}, "
            f"失败原因 {summary.cause_counts}"
        )
        return summary


def _run_indexed_episode(args: Tuple[ExperimentConfig, int]) -> EpisodeResult:
    cfg, index = args
    return ExperimentRunner(cfg).run_episode(episode_rng(cfg.seed, index), index)


def run_episode(config: ExperimentConfig, rng: np.random.Generator, run_id: int = 0) -> EpisodeResult:
    """便捷函数：单个回合"""
    return ExperimentRunner(config).run_episode(rng, run_id)


def run_experiment(config: ExperimentConfig) -> ExperimentSummary:
    """便捷函数：批量实验并写CSV"""
    return ExperimentRunner(config).run_experiment()
