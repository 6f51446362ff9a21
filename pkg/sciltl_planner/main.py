#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
sc-iLTL 规划器 - 命令行入口

子命令: compile / plan / episode / experiment / validate / export / reach
退出码: 0 成功, 1 运行错误, 2 用法错误
"""

import argparse
import json
import os
import sys
from typing import List, Optional, Tuple

import numpy as np

from sciltl_planner.modules.automata import DEFAULT_MAX_STATES, build_automaton, export_dot, live_states, to_json
from sciltl_planner.modules.experiment import (
    BUILTIN_MODELS,
    ExperimentConfig,
    ExperimentRunner,
    ModelSource,
    episode_rng,
)
from sciltl_planner.modules.formula import formula_depth
from sciltl_planner.modules.formula_parser import parse_formula
from sciltl_planner.modules.model_io import load_model, save_model
from sciltl_planner.modules.oracle import DEFAULT_MAX_NODES, ExpectimaxOracle
from sciltl_planner.modules.planner import MctsPlanner, PlannerConfig
from sciltl_planner.modules.product import init_product, reachable_counts
from sciltl_planner.utils.config_loader import ConfigLoader
from sciltl_planner.utils.errors import ConfigError, PlannerError
from sciltl_planner.utils.logger import configure_logging, get_logger


def _parse_goal(text: str) -> Tuple[int, int]:
    try:
        x, y = (int(part) for part in text.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError(f"降落点格式应为 x,y: {text!r}")
    return x, y


def build_parser() -> argparse.ArgumentParser:
    """构造参数解析器"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', '-c', default=None, help='配置文件路径 (默认: config/config.json)')
    common.add_argument('--model', default=None, help='模型文件路径')
    common.add_argument('--builtin', choices=BUILTIN_MODELS, default=None, help='内置模型')
    common.add_argument('--width', type=int, default=None, help='网格宽度')
    common.add_argument('--height', type=int, default=None, help='网格高度')
    common.add_argument('--threshold', type=float, default=None, help='measured 原子阈值')
    common.add_argument('--goal', type=_parse_goal, default=None, help='降落点 x,y')
    common.add_argument('--objective', default=None, help='覆盖模型中的目标公式')
    common.add_argument('--sims', type=int, default=None, help='每步模拟次数')
    common.add_argument('--depth', type=int, default=None, help='搜索深度 d_max')
    common.add_argument('--ucb-c', type=float, default=None, help='UCB 探索常数')
    common.add_argument('--horizon', type=int, default=None, help='回合视界')
    common.add_argument('--runs', type=int, default=None, help='实验回合数')
    common.add_argument('--seed', type=int, default=None, help='主随机种子')
    common.add_argument('--workers', type=int, default=None, help='并行进程数')
    common.add_argument('--out', default=None, help='输出路径')
    common.add_argument('--verbose', '-v', action='store_true', help='输出DEBUG日志')

    parser = argparse.ArgumentParser(prog='sciltl-planner', description='sc-iLTL 目标下的POMDP规划器')
    sub = parser.add_subparsers(dest='command', required=True)

    compile_cmd = sub.add_parser('compile', parents=[common], help='编译目标公式为DFA')
    compile_cmd.add_argument('--format', choices=('dot', 'json'), default='dot', help='导出格式')
    plan_cmd = sub.add_parser('plan', parents=[common], help='从初始状态做一次搜索')
    plan_cmd.add_argument('--exact', type=int, default=None, metavar='D', help='同时输出视界D的 expectimax 精确值')
    sub.add_parser('episode', parents=[common], help='运行一个带日志的回合')
    sub.add_parser('experiment', parents=[common], help='批量实验并写CSV')
    sub.add_parser('validate', parents=[common], help='检查模型文件')
    sub.add_parser('export', parents=[common], help='把内置模型写成模型文件')
    sub.add_parser('reach', parents=[common], help='统计可达信念与乘积状态数')
    return parser


class PlannerCli:
    """命令分发"""

    def __init__(self, args: argparse.Namespace, config: ConfigLoader):
        self._args = args
        self._config = config
        self._logger = get_logger('Cli')

    def model_source(self) -> ModelSource:
        args = self._args
        if args.model:
            return ModelSource(path=args.model)
        drone = self._config.drone_probing
        return ModelSource(
            builtin=args.builtin or 'drone-probing',
            width=args.width if args.width is not None else int(drone.get('width', 4)),
            height=args.height if args.height is not None else int(drone.get('height', 4)),
            threshold=args.threshold if args.threshold is not None else float(drone.get('threshold', 0.9)),
            goal=args.goal if args.goal is not None else tuple(drone.get('goal', (3, 3))),
        )

    def planner_config(self) -> PlannerConfig:
        args = self._args
        ucb_c = args.ucb_c
        if ucb_c is None and not args.model:
            # 内置模型的探索常数取 drone_probing 段
            ucb_c = self._config.drone_probing.get('ucb_c')
        return PlannerConfig.from_config(
            self._config,
            simulations=args.sims,
            max_depth=args.depth,
            ucb_c=ucb_c,
            seed=args.seed,
        )

    def experiment_config(self) -> ExperimentConfig:
        args = self._args
        return ExperimentConfig.from_config(
            self._config,
            model=self.model_source(),
            planner=self.planner_config(),
            runs=args.runs,
            horizon=args.horizon,
            seed=args.seed,
            workers=args.workers,
            output_dir=args.out,
            objective=args.objective,
        )

    def run(self) -> int:
        handler = getattr(self, f"cmd_{self._args.command}")
        return handler()

    def cmd_compile(self) -> int:
        bundle = self.model_source().load()
        text = self._args.objective or bundle.objective
        if not text:
            raise ConfigError("没有可编译的目标公式")
        phi = parse_formula(text, bundle.atoms)
        d = build_automaton(phi, int(self._config.automata.get('max_states', DEFAULT_MAX_STATES)))
        live = live_states(d)
        dead = d.state_count - live
        print(f"目标公式: {text}")
        print(f"公式嵌套深度: {formula_depth(phi)}")
        print(f"自动机状态数: {d.state_count} (活跃 {live}, 死状态 {dead})")
        print(f"DFA states: {d.state_count} (live {live}, dead {dead})")
        content = export_dot(d) if self._args.format == 'dot' else json.dumps(to_json(d), indent=2, ensure_ascii=False)
        if self._args.out:
            self._write(self._args.out, content)
            print(f"已写入 {self._args.out}")
        else:
            print(content)
        return 0

    def cmd_plan(self) -> int:
        cfg = self.experiment_config()
        problem = cfg.problem()
        m = problem.bundle.pomdp
        planner = MctsPlanner(m, problem.dfa, cfg.planner)
        x = init_product(m, problem.dfa)
        action = planner.search(x, np.random.default_rng(cfg.planner.seed))
        print(f"{'action':<8}{'N':>10}{'V':>12}")
        for row in planner.root_statistics():
            print(f"{row['action']:<8}{row['visits']:>10}{row['value']:>12.6f}")
        print(f"选择动作: {m.action_names[action]}")
        if self._args.exact is not None:
            oracle = ExpectimaxOracle.from_config(m, problem.dfa, self._config)
            values = oracle.action_values(x, self._args.exact)
            print(f"{'action':<8}{'V*':>12}")
            for a, value in values.items():
                print(f"{m.action_names[a]:<8}{value:>12.6f}")
            self._logger.info(f"expectimax 视界 {self._args.exact} 访问节点 {oracle.nodes}")
        return 0

    def cmd_episode(self) -> int:
        cfg = self.experiment_config()
        runner = ExperimentRunner(cfg)
        result = runner.run_episode(episode_rng(cfg.seed, 0), 0)
        print("step\taction\tobs\tq\treward\tmax_belief")
        for line in result.log_lines:
            print(line)
        print(f"结果: {result.cause.value}, {result.steps} 步")
        return 0

    def cmd_experiment(self) -> int:
        cfg = self.experiment_config()
        summary = ExperimentRunner(cfg).run_experiment()
        print(f"成功率: {summary.success_rate:.4f} ({summary.successes}/{summary.runs})")
        print(f"成功回合平均步数: {summary.mean_steps:.2f}")
        for cause, count in summary.cause_counts.items():
            print(f"  {cause}: {count}")
        print(f"CSV 已写入 {cfg.output_dir}")
        return 0

    def cmd_validate(self) -> int:
        bundle = load_model(self._args.model)
        m = bundle.pomdp
        for atom in bundle.atoms.values():
            atom.check_dimension(m.state_count)
        text = self._args.objective or bundle.objective
        if text:
            parse_formula(text, bundle.atoms)
        print(
            f"模型有效: {m.state_count} 个状态, {m.action_count} 个动作, "
            f"{m.observation_count} 个观测, {len(bundle.atoms)} 个原子"
        )
        return 0

    def cmd_export(self) -> int:
        if not self._args.out:
            raise ConfigError("export 需要 --out")
        save_model(self.model_source().load(), self._args.out)
        print(f"模型已写入 {self._args.out}")
        return 0

    def cmd_reach(self) -> int:
        cfg = self.experiment_config()
        problem = cfg.problem()
        depth = self._args.depth if self._args.depth is not None else 3
        counts = reachable_counts(
            problem.bundle.pomdp, problem.dfa, depth, int(self._config.oracle.get('max_nodes', DEFAULT_MAX_NODES))
        )
        print(f"{'depth':<8}{'beliefs':>12}{'product':>12}")
        for row in counts:
            print(f"{row['depth']:<8}{row['beliefs']:>12}{row['product_states']:>12}")
        return 0

    @staticmethod
    def _write(path: str, content: str) -> None:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(content)


def cli_main(argv: Optional[List[str]] = None) -> int:
    """解析参数并执行子命令，返回退出码"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == 'validate' and not args.model:
            parser.error("validate 需要 --model")
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    try:
        config = ConfigLoader(args.config)
        configure_logging(config.logging, args.verbose)
    except (OSError, ValueError) as e:
        print(f"错误: 无法加载配置: {e}", file=sys.stderr)
        return 1

    logger = get_logger('Main')
    try:
        return PlannerCli(args, config).run()
    except PlannerError as e:
        logger.error(f"{args.command} 失败: {e}")
        print(f"错误: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        logger.error(f"程序异常: {e}")
        if args.verbose:
            import traceback
            traceback.print_exc()
        print(f"错误: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == '__main__':
    main()
