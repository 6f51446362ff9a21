import itertools
import json

import numpy as np
import pytest

from sciltl_planner.modules.automata import (
    accepts_prefix,
    build_automaton,
    compile_formula,
    export_dot,
    from_json,
    live_states,
    minimize,
    step,
    to_json,
)
from sciltl_planner.modules.formula import (
    LabelVector,
    LinearAtom,
    Verdict,
    all_labels,
    canonical,
    to_text,
    trace_satisfies,
)
from sciltl_planner.modules.formula_parser import parse_formula
from sciltl_planner.utils.errors import AutomatonTooLargeError, DimensionMismatchError

from test_formula import random_formula, shallow_formulas


TABLE = {
    'a': LinearAtom('a', {0: 1.0}, 0.5),
    'b': LinearAtom('b', {1: 1.0}, 0.5),
    'c': LinearAtom('c', {2: 1.0}, 0.5),
}


def compiled(text):
    return build_automaton(parse_formula(text, TABLE))


def final_state_after(d, word):
    q = d.initial
    for label in word:
        q = step(d, q, label)
    return q


class TestSizes:

    def test_eventually(self):
        d = compiled('F a')
        assert d.state_count == 2
        assert live_states(d) == 2
        assert d.dead is None

    def test_conjunction_with_next(self):
        d = compiled('a & X b')
        assert live_states(d) == 3
        assert d.dead is not None
        names = ('a', 'b')
        assert accepts_prefix(d, [LabelVector(names, 0b01), LabelVector(names, 0b10)])
        assert not accepts_prefix(d, [LabelVector(names, 0b10), LabelVector(names, 0b10)])
        assert not accepts_prefix(d, [LabelVector(names, 0b01), LabelVector(names, 0b01)])

    def test_benchmark_objective(self, drone_dfa):
        # 3 个活跃状态 (含接受态) 加 1 个死状态
        assert drone_dfa.state_count == 4
        assert live_states(drone_dfa) == 3
        assert drone_dfa.atom_names == ('goal', 'measured')

    def test_benchmark_transitions(self, drone_dfa):
        q0 = drone_dfa.initial
        idle, measured_only, goal_only, both = 0b00, 0b10, 0b01, 0b11
        assert step(drone_dfa, q0, idle) == q0
        assert drone_dfa.is_dead(step(drone_dfa, q0, goal_only))
        assert drone_dfa.is_final(step(drone_dfa, q0, both))
        waiting = step(drone_dfa, q0, measured_only)
        assert waiting != q0 and not drone_dfa.is_final(waiting) and not drone_dfa.is_dead(waiting)
        assert step(drone_dfa, waiting, idle) == waiting
        assert drone_dfa.is_final(step(drone_dfa, waiting, goal_only))

    def test_state_limit(self):
        phi = parse_formula('(!b U a) & F b & F a', TABLE)
        with pytest.raises(AutomatonTooLargeError) as info:
            compile_formula(phi, max_states=2)
        assert info.value.limit == 2


class TestStructure:

    def test_total_and_absorbing(self):
        d = compiled('(a U b) | X X c')
        for q, row in enumerate(d.transitions):
            assert len(row) == d.alphabet_size
            if d.is_final(q) or d.is_dead(q):
                assert all(target == q for target in row)

    def test_minimize_is_idempotent(self):
        d = compiled('(a | X a) & F (b & X c)')
        assert minimize(d) == d

    def test_minimize_preserves_language(self):
        rng = np.random.default_rng(11)
        phi = parse_formula('(a U (b & X c)) | F (a & b)', TABLE)
        raw = compile_formula(phi)
        small = minimize(raw)
        assert small.state_count <= raw.state_count
        for _ in range(1000):
            word = list(rng.integers(8, size=int(rng.integers(8))))
            assert accepts_prefix(raw, word) == accepts_prefix(small, word)

    def test_label_names_must_match(self):
        d = compiled('F a')
        with pytest.raises(DimensionMismatchError):
            step(d, d.initial, LabelVector(('b',), 1))
        with pytest.raises(DimensionMismatchError):
            step(d, d.initial, 2)


class TestAgainstTraceSemantics:

    def test_exhaustive_small_formulas(self):
        atoms = (TABLE['a'], TABLE['b'])
        for phi in shallow_formulas(atoms):
            d = build_automaton(phi)
            names = d.atom_names
            for length in range(6):
                for bits in itertools.product(range(1 << len(names)), repeat=length):
                    word = [LabelVector(names, b) for b in bits]
                    expected = trace_satisfies(phi, word) is Verdict.SATISFIED
                    assert accepts_prefix(d, word) == expected, to_text(phi)

    def test_random_formulas(self):
        rng = np.random.default_rng(5)
        atoms = tuple(TABLE.values())
        for _ in range(1000):
            phi = random_formula(rng, atoms, 3)
            d = build_automaton(phi)
            names = d.atom_names
            word = [
                LabelVector(names, int(rng.integers(1 << len(names))))
                for _ in range(int(rng.integers(7)))
            ]
            expected = trace_satisfies(phi, word) is Verdict.SATISFIED
            assert accepts_prefix(d, word) == expected, to_text(phi)


class TestExport:

    def test_dot(self, drone_dfa):
        dot = export_dot(drone_dfa)
        assert dot.startswith('digraph dfa {')
        assert dot.count('doublecircle') == 1
        assert 'style=dashed' in dot
        assert '__start -> q0' in dot
        assert 'goal & measured' in dot

    def test_json_round_trip(self, drone_bundle, drone_dfa):
        data = json.loads(json.dumps(to_json(drone_dfa)))
        assert data['states'] == 4
        rebuilt = from_json(data, drone_bundle.atoms)
        assert rebuilt.transitions == drone_dfa.transitions
        assert rebuilt.finals == drone_dfa.finals
        assert rebuilt.dead == drone_dfa.dead
        assert rebuilt.initial == drone_dfa.initial

    def test_state_formulas_kept(self):
        d = compiled('F a')
        assert to_text(d.state_formulas[d.initial]) == to_text(canonical(parse_formula('F a', TABLE)))
