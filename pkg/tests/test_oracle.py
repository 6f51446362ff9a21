import itertools
import json

import pytest

from sciltl_planner.modules.oracle import ExpectimaxOracle, expectimax_action, expectimax_value
from sciltl_planner.modules.pomdp import legal_actions
from sciltl_planner.modules.product import SINK, advance, enumerate_successors, init_product
from sciltl_planner.utils.config_loader import DEFAULT_CONFIG_PATH, ConfigLoader
from sciltl_planner.utils.errors import ExpectimaxBudgetError


def test_sink_is_worth_one(toy):
    assert expectimax_value(SINK, 0, toy.pomdp, toy.dfa) == 1.0


def test_zero_horizon(toy):
    assert expectimax_value(init_product(toy.pomdp, toy.dfa), 0, toy.pomdp, toy.dfa) == 0.0


def test_collected_state_is_worth_one(trivial):
    x = init_product(trivial.pomdp, trivial.dfa)
    collected = advance(trivial.pomdp, trivial.dfa, x, 0, 0).next
    assert expectimax_value(collected, 0, trivial.pomdp, trivial.dfa) == 1.0
    assert expectimax_value(x, 1, trivial.pomdp, trivial.dfa) == 1.0


def test_toy_values(toy):
    x = init_product(toy.pomdp, toy.dfa)
    best, values = expectimax_action(x, 4, toy.pomdp, toy.dfa)
    assert best == toy.pomdp.action_index('good')
    assert values[0] == pytest.approx(0.875)
    assert values[1] == pytest.approx(0.8)
    assert expectimax_value(x, 4, toy.pomdp, toy.dfa) == pytest.approx(0.875)
    assert expectimax_value(x, 3, toy.pomdp, toy.dfa) == pytest.approx(0.75)


def test_reward_needs_one_extra_step(reach):
    x = init_product(reach.pomdp, reach.dfa)
    assert expectimax_value(x, 1, reach.pomdp, reach.dfa) == 0.0
    best, values = expectimax_action(x, 2, reach.pomdp, reach.dfa)
    assert best == 0
    assert values == {0: pytest.approx(1.0), 1: pytest.approx(0.0)}


@pytest.mark.parametrize('name', ['toy', 'reach', 'noisy'])
def test_monotone_in_horizon(request, name):
    problem = request.getfixturevalue(name)
    x = init_product(problem.pomdp, problem.dfa)
    values = [expectimax_value(x, d, problem.pomdp, problem.dfa) for d in range(7)]
    assert all(0.0 <= v <= 1.0 + 1e-12 for v in values)
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


def test_value_is_best_action_value(noisy):
    x = init_product(noisy.pomdp, noisy.dfa)
    best, values = expectimax_action(x, 4, noisy.pomdp, noisy.dfa)
    assert expectimax_value(x, 4, noisy.pomdp, noisy.dfa) == pytest.approx(values[best])
    assert values[best] == max(values.values())


def test_node_budget(toy):
    oracle = ExpectimaxOracle(toy.pomdp, toy.dfa, max_nodes=5)
    with pytest.raises(ExpectimaxBudgetError) as info:
        oracle.value(init_product(toy.pomdp, toy.dfa), 4)
    assert info.value.limit == 5


def test_node_budget_from_config(toy, tmp_path):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps({'oracle': {'max_nodes': 5}}), encoding='utf-8')
    try:
        oracle = ExpectimaxOracle.from_config(toy.pomdp, toy.dfa, ConfigLoader(str(path)))
        with pytest.raises(ExpectimaxBudgetError):
            oracle.value(init_product(toy.pomdp, toy.dfa), 4)
    finally:
        ConfigLoader(DEFAULT_CONFIG_PATH)
    oracle = ExpectimaxOracle.from_config(toy.pomdp, toy.dfa)
    assert oracle.value(init_product(toy.pomdp, toy.dfa), 4) == pytest.approx(0.875)


def policy_values(problem, x, horizon):
    """每棵确定性策略树沿全部观测路径累加的到达概率"""
    m, d = problem.pomdp, problem.dfa
    if x.sink or x.collected:
        return [1.0]
    if horizon == 0 or d.is_dead(x.q):
        return [0.0]
    values = []
    for a in legal_actions(m, x.belief):
        successors = enumerate_successors(m, d, x, a)
        subtrees = [policy_values(problem, child, horizon - 1) for _, child, _ in successors]
        for choice in itertools.product(*subtrees):
            values.append(sum(p * v for (p, _, _), v in zip(successors, choice)))
    return values


@pytest.mark.parametrize('name', ['toy', 'noisy'])
def test_recursion_matches_policy_enumeration(request, name):
    problem = request.getfixturevalue(name)
    x = init_product(problem.pomdp, problem.dfa)
    best = max(policy_values(problem, x, 3))
    assert abs(expectimax_value(x, 3, problem.pomdp, problem.dfa) - best) < 1e-12
