import itertools

import numpy as np
import pytest

from sciltl_planner.modules.formula import (
    FALSE,
    TRUE,
    AnyOfAtom,
    Formula,
    Kind,
    LabelVector,
    LinearAtom,
    MaxComponentAtom,
    Verdict,
    all_labels,
    and_,
    atom,
    atoms_of,
    canonical,
    eval_atom,
    eventually,
    formula_depth,
    label_of,
    neg_atom,
    negate,
    next_,
    or_,
    progress,
    to_text,
    trace_satisfies,
    until,
)
from sciltl_planner.utils.errors import DimensionMismatchError, NonCoSafeError


A = LinearAtom('a', {0: 1.0}, 0.5)
B = LinearAtom('b', {1: 1.0}, 0.5)
C = LinearAtom('c', {2: 1.0}, 0.5)


def kleene(phi, word, i=0):
    """三值递归求值，超出词尾的原子为未知 (None)"""
    kind = phi.kind
    if kind is Kind.TRUE:
        return True
    if kind is Kind.FALSE:
        return False
    if kind in (Kind.ATOM, Kind.NEG_ATOM):
        if i >= len(word):
            return None
        value = word[i].holds(phi.atom.name)
        return value if kind is Kind.ATOM else not value
    if kind is Kind.AND:
        values = [kleene(c, word, i) for c in phi.children]
        if any(v is False for v in values):
            return False
        return True if all(v is True for v in values) else None
    if kind is Kind.OR:
        values = [kleene(c, word, i) for c in phi.children]
        if any(v is True for v in values):
            return True
        return False if all(v is False for v in values) else None
    if kind is Kind.NEXT:
        return kleene(phi.children[0], word, i + 1)
    if kind is Kind.EVENTUALLY:
        now = kleene(phi.children[0], word, i)
        if i >= len(word):
            return now
        return _or3(now, kleene(phi, word, i + 1))
    left, right = phi.children
    r = kleene(right, word, i)
    if i >= len(word):
        return r
    return _or3(r, _and3(kleene(left, word, i), kleene(phi, word, i + 1)))


def _or3(x, y):
    if x is True or y is True:
        return True
    if x is False and y is False:
        return False
    return None


def _and3(x, y):
    if x is False or y is False:
        return False
    if x is True and y is True:
        return True
    return None


def verdict_of(value):
    return {True: Verdict.SATISFIED, False: Verdict.VIOLATED, None: Verdict.UNDETERMINED}[value]


def random_formula(rng, atoms, depth):
    if depth == 0 or rng.random() < 0.25:
        choice = int(rng.integers(len(atoms) * 2 + 2))
        if choice == 0:
            return TRUE
        if choice == 1:
            return FALSE
        a = atoms[(choice - 2) // 2]
        return Formula(Kind.ATOM, atom=a) if choice % 2 == 0 else Formula(Kind.NEG_ATOM, atom=a)
    op = int(rng.integers(5))
    if op == 0:
        return Formula(Kind.NEXT, (random_formula(rng, atoms, depth - 1),))
    if op == 1:
        return Formula(Kind.EVENTUALLY, (random_formula(rng, atoms, depth - 1),))
    left = random_formula(rng, atoms, depth - 1)
    right = random_formula(rng, atoms, depth - 1)
    kind = (Kind.AND, Kind.OR, Kind.UNTIL)[op - 2]
    return Formula(kind, (left, right))


def shallow_formulas(atoms):
    leaves = [TRUE, FALSE] + [f(a) for a in atoms for f in (atom, neg_atom)]
    result = list(leaves)
    for child in leaves:
        result.append(Formula(Kind.NEXT, (child,)))
        result.append(Formula(Kind.EVENTUALLY, (child,)))
    for left, right in itertools.product(leaves, repeat=2):
        for kind in (Kind.AND, Kind.OR, Kind.UNTIL):
            result.append(Formula(kind, (left, right)))
    return result


def words(names, max_length):
    labels = all_labels(names)
    for length in range(max_length + 1):
        yield from itertools.product(labels, repeat=length)


class TestAtoms:

    def test_linear_atom_strict_and_non_strict(self):
        b = np.array([0.5, 0.5])
        assert not LinearAtom('p', {0: 1.0}, 0.5, strict=True).holds(b)
        assert LinearAtom('p', {0: 1.0}, 0.5, strict=False).holds(b)

    def test_coefficients_are_merged_and_sorted(self):
        a = LinearAtom('p', [(2, 1.0), (0, 0.5), (2, 0.5)], 0.1)
        assert a.coeffs == ((0, 0.5), (2, 1.5))

    def test_negative_index_is_rejected(self):
        with pytest.raises(DimensionMismatchError):
            LinearAtom('p', {-1: 1.0}, 0.1)

    def test_indicator_sum_reaches_one_exactly_on_point_mass(self):
        b = np.zeros(16)
        b[4:8] = [0.1, 0.2, 0.3, 0.4]
        b = b / b.sum()
        goal = LinearAtom('goal', {i: 1.0 for i in range(4, 8)}, 1.0, strict=False)
        assert goal.holds(b)

    def test_max_component_atom(self):
        measured = MaxComponentAtom('measured', 0.9)
        assert measured.holds(np.array([0.05, 0.95]))
        assert not measured.holds(np.array([0.1, 0.9]))

    def test_anyof_atom(self):
        grouped = AnyOfAtom('any', (A, B))
        assert grouped.holds(np.array([0.1, 0.8, 0.1]))
        assert not grouped.holds(np.array([0.4, 0.2, 0.4]))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            eval_atom(C, np.array([0.5, 0.5]))


class TestLabels:

    def test_label_bits_follow_atom_order(self):
        label = label_of(np.array([0.1, 0.9, 0.0]), (A, B))
        assert label.names == ('a', 'b')
        assert label.bits == 0b10
        assert label.holds('b') and not label.holds('a')

    def test_unknown_name_in_label(self):
        label = LabelVector(('a',), 1)
        with pytest.raises(DimensionMismatchError):
            label.holds('z')

    def test_from_truths(self):
        assert LabelVector.from_truths(('a', 'b'), {'b': True}).bits == 2
        assert LabelVector.from_truths(('a', 'b'), [True, True]).bits == 3
        with pytest.raises(DimensionMismatchError):
            LabelVector.from_truths(('a', 'b'), [True])

    def test_all_labels(self):
        assert [l.bits for l in all_labels(('a', 'b'))] == [0, 1, 2, 3]


class TestCanonical:

    def test_and_or_flatten_and_absorb(self):
        a, b, c = atom(A), atom(B), atom(C)
        assert and_(a, and_(b, c)) == and_(c, b, a)
        assert and_(a, TRUE) == a
        assert and_(a, FALSE) == FALSE
        assert or_(a, TRUE) == TRUE
        assert or_(a, a) == a

    def test_temporal_constants_collapse(self):
        a = atom(A)
        assert next_(TRUE) == TRUE
        assert eventually(FALSE) == FALSE
        assert until(a, TRUE) == TRUE
        assert until(TRUE, a) == eventually(a)
        assert until(FALSE, a) == a

    def test_atoms_of_sorted_by_name(self):
        phi = and_(atom(B), eventually(atom(A)))
        assert [x.name for x in atoms_of(phi)] == ['a', 'b']

    def test_atoms_of_conflicting_definitions(self):
        other = LinearAtom('a', {1: 1.0}, 0.5)
        with pytest.raises(ValueError):
            atoms_of(and_(atom(A), atom(other)))

    def test_to_text(self):
        phi = until(neg_atom(A), and_(atom(B), next_(atom(A))))
        assert to_text(phi) == '(!a U (b & (X a)))'


class TestProgression:

    def test_eventually(self):
        phi = eventually(atom(A))
        assert progress(phi, LabelVector(('a',), 1)) == TRUE
        assert progress(phi, LabelVector(('a',), 0)) == phi

    def test_until(self):
        phi = until(atom(A), atom(B))
        names = ('a', 'b')
        assert progress(phi, LabelVector(names, 0b10)) == TRUE
        assert progress(phi, LabelVector(names, 0b01)) == phi
        assert progress(phi, LabelVector(names, 0b00)) == FALSE

    def test_next(self):
        phi = next_(atom(B))
        assert progress(phi, LabelVector(('b',), 0)) == atom(B)

    def test_missing_atom_in_label(self):
        with pytest.raises(DimensionMismatchError):
            progress(atom(B), LabelVector(('a',), 1))


class TestTraceSatisfies:

    def test_verdicts(self):
        phi = and_(atom(A), next_(atom(B)))
        names = ('a', 'b')
        assert trace_satisfies(phi, [LabelVector(names, 1), LabelVector(names, 2)]) is Verdict.SATISFIED
        assert trace_satisfies(phi, [LabelVector(names, 0)]) is Verdict.VIOLATED
        assert trace_satisfies(phi, [LabelVector(names, 1)]) is Verdict.UNDETERMINED

    def test_empty_trace(self):
        assert trace_satisfies(TRUE, []) is Verdict.SATISFIED
        assert trace_satisfies(eventually(atom(A)), []) is Verdict.UNDETERMINED

    def test_matches_three_valued_semantics_exhaustively(self):
        atoms = (A, B)
        names = ('a', 'b')
        for phi in shallow_formulas(atoms):
            for word in words(names, 3):
                assert trace_satisfies(phi, word) is verdict_of(kleene(phi, list(word))), to_text(phi)

    def test_matches_three_valued_semantics_randomly(self):
        rng = np.random.default_rng(7)
        atoms = (A, B, C)
        names = ('a', 'b', 'c')
        for _ in range(1000):
            phi = random_formula(rng, atoms, 3)
            length = int(rng.integers(7))
            word = [LabelVector(names, int(rng.integers(8))) for _ in range(length)]
            assert trace_satisfies(phi, word) is verdict_of(kleene(phi, word)), to_text(phi)


class TestNegate:

    def test_pushes_to_atoms(self):
        phi = Formula(Kind.AND, (atom(A), next_(atom(B))))
        result = canonical(negate(phi))
        assert result == or_(neg_atom(A), next_(neg_atom(B)))

    @pytest.mark.parametrize('phi', [eventually(atom(A)), until(atom(A), atom(B))])
    def test_temporal_negation_is_not_co_safe(self, phi):
        with pytest.raises(NonCoSafeError):
            negate(phi)


def test_formula_depth():
    assert formula_depth(TRUE) == 0
    assert formula_depth(atom(A)) == 0
    phi = Formula(Kind.UNTIL, (atom(A), Formula(Kind.NEXT, (Formula(Kind.EVENTUALLY, (atom(B),)),))))
    assert formula_depth(phi) == 3
