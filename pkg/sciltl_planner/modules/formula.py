"""
sc-iLTL 公式

原子命题是信念单纯形上的线性不等式 pᵀb > c (或 ≥ c)。公式只允许在原子上取反，
时序算子只有 X / U / F，因此每个满足的无穷路径都有有限的好前缀。
公式前移 (progression) 把“读入一个标签后剩余的义务”算成新的规范公式，
自动机编译就是对它求闭包。
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..utils.errors import DimensionMismatchError, NonCoSafeError


def _compare(value: float, threshold: float, strict: bool) -> bool:
    return value > threshold if strict else value >= threshold


def _belief_total(b: np.ndarray) -> float:
    return math.fsum(b.tolist())


@dataclass(frozen=True)
class LinearAtom:
    """线性不等式原子 pᵀb (>|≥) c"""
    name: str
    coeffs: Tuple[Tuple[int, float], ...]
    threshold: float
    strict: bool = True
    _indices: np.ndarray = field(init=False, compare=False, repr=False)
    _values: np.ndarray = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if isinstance(self.coeffs, Mapping):
            items = self.coeffs.items()
        else:
            items = self.coeffs
        merged: Dict[int, float] = {}
        for index, coef in items:
            index = int(index)
            if index < 0:
                raise DimensionMismatchError(f"原子 {self.name} 的系数下标为负: {index}")
            merged[index] = merged.get(index, 0.0) + float(coef)
        coeffs = tuple(sorted(merged.items()))
        object.__setattr__(self, 'coeffs', coeffs)
        object.__setattr__(self, 'threshold', float(self.threshold))
        object.__setattr__(self, '_indices', np.array([i for i, _ in coeffs], dtype=np.int64))
        object.__setattr__(self, '_values', np.array([c for _, c in coeffs], dtype=float))

    @property
    def max_index(self) -> int:
        return int(self._indices.max()) if len(self._indices) else -1

    def check_dimension(self, state_count: int) -> None:
        if self.max_index >= state_count:
            raise DimensionMismatchError(
                f"原子 {self.name} 引用状态 {self.max_index}，但模型只有 {state_count} 个状态"
            )

    def value(self, b: np.ndarray, total: Optional[float] = None) -> float:
        """pᵀb，按归一化后的信念计算"""
        if total is None:
            total = _belief_total(b)
        if not len(self._indices):
            return 0.0
        return math.fsum((self._values * b[self._indices]).tolist()) / total

    def holds(self, b: np.ndarray, total: Optional[float] = None) -> bool:
        return _compare(self.value(b, total), self.threshold, self.strict)

    def describe(self) -> str:
        terms = ','.join(f"{i}:{c!r}" for i, c in self.coeffs)
        return f"{{{terms}}} {'>' if self.strict else '>='} {self.threshold!r}"


@dataclass(frozen=True)
class MaxComponentAtom:
    """分组原子：存在分量 b(i) (>|≥) c"""
    name: str
    threshold: float
    strict: bool = True

    def check_dimension(self, state_count: int) -> None:
        return None

    def holds(self, b: np.ndarray, total: Optional[float] = None) -> bool:
        if total is None:
            total = _belief_total(b)
        return _compare(float(b.max()) / total, self.threshold, self.strict)

    def describe(self) -> str:
        return f"max_component {'>' if self.strict else '>='} {self.threshold!r}"


@dataclass(frozen=True)
class AnyOfAtom:
    """分组原子：成员原子中任一成立"""
    name: str
    members: Tuple[LinearAtom, ...]

    def check_dimension(self, state_count: int) -> None:
        for member in self.members:
            member.check_dimension(state_count)

    def holds(self, b: np.ndarray, total: Optional[float] = None) -> bool:
        if total is None:
            total = _belief_total(b)
        return any(member.holds(b, total) for member in self.members)

    def describe(self) -> str:
        return '[' + ', '.join(member.name for member in self.members) + ']'


Atom = Union[LinearAtom, MaxComponentAtom, AnyOfAtom]


class Kind(Enum):
    TRUE = 0
    FALSE = 1
    ATOM = 2
    NEG_ATOM = 3
    AND = 4
    OR = 5
    NEXT = 6
    UNTIL = 7
    EVENTUALLY = 8


@dataclass(frozen=True)
class Formula:
    """公式语法树节点 (否定范式)"""
    kind: Kind
    children: Tuple['Formula', ...] = ()
    atom: Optional[Atom] = None
    _key: tuple = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        name = self.atom.name if self.atom is not None else ''
        key = (self.kind.value, name, tuple(child._key for child in self.children))
        object.__setattr__(self, '_key', key)

    @property
    def sort_key(self) -> tuple:
        return self._key

    def __str__(self) -> str:
        return to_text(self)


TRUE = Formula(Kind.TRUE)
FALSE = Formula(Kind.FALSE)


def atom(a: Atom) -> Formula:
    return Formula(Kind.ATOM, atom=a)


def neg_atom(a: Atom) -> Formula:
    return Formula(Kind.NEG_ATOM, atom=a)


def and_(*parts: Formula) -> Formula:
    """合取的规范形式: 展平、常量吸收、去重、排序"""
    flat: Dict[tuple, Formula] = {}
    for part in parts:
        if part.kind is Kind.FALSE:
            return FALSE
        if part.kind is Kind.TRUE:
            continue
        for item in (part.children if part.kind is Kind.AND else (part,)):
            flat[item.sort_key] = item
    if not flat:
        return TRUE
    if len(flat) == 1:
        return next(iter(flat.values()))
    return Formula(Kind.AND, tuple(flat[k] for k in sorted(flat)))


def or_(*parts: Formula) -> Formula:
    """析取的规范形式"""
    flat: Dict[tuple, Formula] = {}
    for part in parts:
        if part.kind is Kind.TRUE:
            return TRUE
        if part.kind is Kind.FALSE:
            continue
        for item in (part.children if part.kind is Kind.OR else (part,)):
            flat[item.sort_key] = item
    if not flat:
        return FALSE
    if len(flat) == 1:
        return next(iter(flat.values()))
    return Formula(Kind.OR, tuple(flat[k] for k in sorted(flat)))


def next_(child: Formula) -> Formula:
    if child.kind in (Kind.TRUE, Kind.FALSE):
        return child
    return Formula(Kind.NEXT, (child,))


def eventually(child: Formula) -> Formula:
    if child.kind in (Kind.TRUE, Kind.FALSE):
        return child
    return Formula(Kind.EVENTUALLY, (child,))


def until(left: Formula, right: Formula) -> Formula:
    if right.kind in (Kind.TRUE, Kind.FALSE):
        return right
    if left.kind is Kind.TRUE:
        return eventually(right)
    if left.kind is Kind.FALSE:
        return right
    return Formula(Kind.UNTIL, (left, right))


def canonical(phi: Formula) -> Formula:
    """把任意(否定范式)公式化为规范形式"""
    kind = phi.kind
    if kind in (Kind.TRUE, Kind.FALSE, Kind.ATOM, Kind.NEG_ATOM):
        return phi
    children = [canonical(child) for child in phi.children]
    if kind is Kind.AND:
        return and_(*children)
    if kind is Kind.OR:
        return or_(*children)
    if kind is Kind.NEXT:
        return next_(children[0])
    if kind is Kind.EVENTUALLY:
        return eventually(children[0])
    return until(children[0], children[1])


def atoms_of(phi: Formula) -> Tuple[Atom, ...]:
    """Λ(φ)，按名字字典序"""
    found: Dict[str, Atom] = {}
    stack = [phi]
    while stack:
        node = stack.pop()
        if node.atom is not None:
            previous = found.get(node.atom.name)
            if previous is not None and previous != node.atom:
                raise ValueError(f"原子名重复但定义不同: {node.atom.name}")
            found[node.atom.name] = node.atom
        stack.extend(node.children)
    return tuple(found[name] for name in sorted(found))


def to_text(phi: Formula) -> str:
    """打印为可被parse_formula解析的全括号文本"""
    kind = phi.kind
    if kind is Kind.TRUE:
        return 'true'
    if kind is Kind.FALSE:
        return 'false'
    if kind is Kind.ATOM:
        return phi.atom.name
    if kind is Kind.NEG_ATOM:
        return '!' + phi.atom.name
    if kind is Kind.AND:
        return '(' + ' & '.join(to_text(c) for c in phi.children) + ')'
    if kind is Kind.OR:
        return '(' + ' | '.join(to_text(c) for c in phi.children) + ')'
    if kind is Kind.NEXT:
        return f"(X {to_text(phi.children[0])})"
    if kind is Kind.EVENTUALLY:
        return f"(F {to_text(phi.children[0])})"
    return f"({to_text(phi.children[0])} U {to_text(phi.children[1])})"


@dataclass(frozen=True)
class LabelVector:
    """标签向量：第i位对应names[i]的原子是否成立"""
    names: Tuple[str, ...]
    bits: int

    @classmethod
    def from_truths(
        cls,
        names: Sequence[str],
        truths: Union[Mapping[str, bool], Sequence[bool]]
    ) -> 'LabelVector':
        names = tuple(names)
        if isinstance(truths, Mapping):
            values = [bool(truths.get(name, False)) for name in names]
        else:
            values = [bool(v) for v in truths]
            if len(values) != len(names):
                raise DimensionMismatchError(f"标签宽度 {len(values)} 与原子数 {len(names)} 不一致")
        bits = 0
        for i, value in enumerate(values):
            if value:
                bits |= 1 << i
        return cls(names, bits)

    @property
    def width(self) -> int:
        return len(self.names)

    def __getitem__(self, i: int) -> bool:
        return bool((self.bits >> i) & 1)

    def holds(self, name: str) -> bool:
        try:
            i = self.names.index(name)
        except ValueError:
            raise DimensionMismatchError(f"标签中不存在原子 {name}") from None
        return self[i]

    def true_names(self) -> frozenset:
        return frozenset(name for i, name in enumerate(self.names) if self[i])


def eval_atom(a: Atom, b: np.ndarray) -> bool:
    """原子在信念b上是否成立"""
    b = np.asarray(b, dtype=float)
    a.check_dimension(len(b))
    return a.holds(b)


def label_of(b: np.ndarray, atoms: Sequence[Atom]) -> LabelVector:
    """标签函数 L(b)"""
    b = np.asarray(b, dtype=float)
    total = _belief_total(b)
    bits = 0
    for i, a in enumerate(atoms):
        a.check_dimension(len(b))
        if a.holds(b, total):
            bits |= 1 << i
    return LabelVector(tuple(a.name for a in atoms), bits)


def _progress(phi: Formula, true_names: frozenset, known: frozenset) -> Formula:
    kind = phi.kind
    if kind in (Kind.TRUE, Kind.FALSE):
        return phi
    if kind in (Kind.ATOM, Kind.NEG_ATOM):
        name = phi.atom.name
        if name not in known:
            raise DimensionMismatchError(f"标签中不存在原子 {name}")
        value = name in true_names
        if kind is Kind.NEG_ATOM:
            value = not value
        return TRUE if value else FALSE
    if kind is Kind.AND:
        return and_(*(_progress(c, true_names, known) for c in phi.children))
    if kind is Kind.OR:
        return or_(*(_progress(c, true_names, known) for c in phi.children))
    if kind is Kind.NEXT:
        return canonical(phi.children[0])
    if kind is Kind.EVENTUALLY:
        return or_(_progress(phi.children[0], true_names, known), canonical(phi))
    left, right = phi.children
    return or_(
        _progress(right, true_names, known),
        and_(_progress(left, true_names, known), canonical(phi)),
    )


def progress(phi: Formula, label: LabelVector) -> Formula:
    """读入标签后剩余的公式 (规范形式)"""
    return _progress(phi, label.true_names(), frozenset(label.names))


class Verdict(Enum):
    SATISFIED = 'satisfied'
    VIOLATED = 'violated'
    UNDETERMINED = 'undetermined'


def trace_satisfies(phi: Formula, trace: Iterable[LabelVector]) -> Verdict:
    """有限标签序列上的三值判定"""
    current = canonical(phi)
    for label in trace:
        if current.kind is Kind.TRUE:
            break
        if current.kind is Kind.FALSE:
            break
        current = progress(current, label)
    if current.kind is Kind.TRUE:
        return Verdict.SATISFIED
    if current.kind is Kind.FALSE:
        return Verdict.VIOLATED
    return Verdict.UNDETERMINED


def negate(phi: Formula) -> Formula:
    """把否定推到原子上；遇到时序U/F的否定说明不是co-safe"""
    kind = phi.kind
    if kind is Kind.TRUE:
        return FALSE
    if kind is Kind.FALSE:
        return TRUE
    if kind is Kind.ATOM:
        return Formula(Kind.NEG_ATOM, atom=phi.atom)
    if kind is Kind.NEG_ATOM:
        return Formula(Kind.ATOM, atom=phi.atom)
    if kind is Kind.AND:
        return Formula(Kind.OR, tuple(negate(c) for c in phi.children))
    if kind is Kind.OR:
        return Formula(Kind.AND, tuple(negate(c) for c in phi.children))
    if kind is Kind.NEXT:
        return Formula(Kind.NEXT, (negate(phi.children[0]),))
    op = 'F' if kind is Kind.EVENTUALLY else 'U'
    raise NonCoSafeError(f"对时序算子 {op} 取反不是co-safe公式")


def formula_depth(phi: Formula) -> int:
    if not phi.children:
        return 0
    return 1 + max(formula_depth(c) for c in phi.children)


def all_labels(names: Sequence[str]) -> List[LabelVector]:
    """原子集合上的全部 2^|Λ| 个标签"""
    names = tuple(names)
    return [LabelVector(names, bits) for bits in range(1 << len(names))]
