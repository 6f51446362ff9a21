"""
co-safe 公式到 DFA 的编译

字母表是 Λ(φ) 上的标签位掩码 (第i位对应按名字排序的第i个原子)。
状态是公式前移闭包里的规范公式；True 是唯一接受态，False 是死状态，二者都吸收。
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

import numpy as np
from jinja2 import Template

from .formula import Atom, Formula, Kind, LabelVector, atoms_of, canonical, label_of, progress, to_text
from ..utils.errors import AutomatonTooLargeError, DimensionMismatchError
from ..utils.logger import get_logger


DEFAULT_MAX_STATES = 100000


@dataclass(frozen=True)
class Dfa:
    """确定、完全的有限自动机"""
    atoms: Tuple[Atom, ...]
    transitions: Tuple[Tuple[int, ...], ...]
    initial: int
    finals: FrozenSet[int]
    dead: Optional[int] = None
    state_formulas: Tuple[Optional[Formula], ...] = field(default=(), compare=False, repr=False)

    @property
    def atom_names(self) -> Tuple[str, ...]:
        return tuple(a.name for a in self.atoms)

    @property
    def state_count(self) -> int:
        return len(self.transitions)

    @property
    def alphabet_size(self) -> int:
        return 1 << len(self.atoms)

    def is_final(self, q: int) -> bool:
        return q in self.finals

    def is_dead(self, q: int) -> bool:
        return self.dead is not None and q == self.dead

    def step(self, q: int, label: Union[LabelVector, int]) -> int:
        return step(self, q, label)

    def label_bits(self, b: np.ndarray) -> int:
        """信念的标签位掩码"""
        return label_of(b, self.atoms).bits

    def check_dimension(self, state_count: int) -> None:
        for a in self.atoms:
            a.check_dimension(state_count)


def _label_bits(d: Dfa, label: Union[LabelVector, int]) -> int:
    if isinstance(label, LabelVector):
        if label.names != d.atom_names:
            raise DimensionMismatchError(f"标签原子 {label.names} 与自动机原子 {d.atom_names} 不一致")
        return label.bits
    bits = int(label)
    if bits < 0 or bits >= d.alphabet_size:
        raise DimensionMismatchError(f"标签位掩码 {bits} 超出字母表大小 {d.alphabet_size}")
    return bits


def compile_formula(phi: Formula, max_states: int = DEFAULT_MAX_STATES) -> Dfa:
    """对公式前移求闭包，得到 (未最小化的) DFA"""
    logger = get_logger('DfaCompiler')
    atoms = atoms_of(phi)
    names = tuple(a.name for a in atoms)
    labels = [LabelVector(names, bits) for bits in range(1 << len(atoms))]

    start = canonical(phi)
    index: Dict[Formula, int] = {start: 0}
    formulas: List[Formula] = [start]
    rows: List[Tuple[int, ...]] = []
    queue = deque([start])

    while queue:
        current = queue.popleft()
        row = []
        for label in labels:
            if current.kind in (Kind.TRUE, Kind.FALSE):
                successor = current
            else:
                successor = progress(current, label)
            if successor not in index:
                if len(formulas) >= max_states:
                    raise AutomatonTooLargeError(max_states)
                index[successor] = len(formulas)
                formulas.append(successor)
                queue.append(successor)
            row.append(index[successor])
        rows.append(tuple(row))

    finals = frozenset(i for i, f in enumerate(formulas) if f.kind is Kind.TRUE)
    dead = next((i for i, f in enumerate(formulas) if f.kind is Kind.FALSE), None)
    logger.debug(f"公式闭包 {len(formulas)} 个状态, 字母表 {len(labels)}")
    return Dfa(atoms, tuple(rows), 0, finals, dead, tuple(formulas))


def _reachable(d: Dfa) -> List[int]:
    seen = {d.initial}
    order = [d.initial]
    queue = deque([d.initial])
    while queue:
        q = queue.popleft()
        for target in d.transitions[q]:
            if target not in seen:
                seen.add(target)
                order.append(target)
                queue.append(target)
    return order


def minimize(d: Dfa) -> Dfa:
    """Hopcroft分区细化：去掉不可达状态并合并等价状态"""
    reachable = _reachable(d)
    alphabet = range(d.alphabet_size)

    # 逆转移: (符号, 目标) -> 源集合
    inverse: Dict[Tuple[int, int], Set[int]] = {}
    for q in reachable:
        for sym in alphabet:
            inverse.setdefault((sym, d.transitions[q][sym]), set()).add(q)

    finals = frozenset(q for q in reachable if q in d.finals)
    others = frozenset(q for q in reachable if q not in d.finals)
    partition: List[FrozenSet[int]] = [block for block in (finals, others) if block]
    worklist: List[FrozenSet[int]] = list(partition)

    while worklist:
        splitter = worklist.pop()
        for sym in alphabet:
            preimage: Set[int] = set()
            for target in splitter:
                preimage |= inverse.get((sym, target), set())
            if not preimage:
                continue
            refined: List[FrozenSet[int]] = []
            for block in partition:
                inside = block & preimage
                outside = block - preimage
                if inside and outside:
                    refined.extend([inside, outside])
                    if block in worklist:
                        worklist.remove(block)
                        worklist.extend([inside, outside])
                    else:
                        worklist.append(inside if len(inside) <= len(outside) else outside)
                else:
                    refined.append(block)
            partition = refined

    block_of = {q: i for i, block in enumerate(partition) for q in block}

    # 按BFS顺序重新编号，结果与输入的状态编号无关
    order: Dict[int, int] = {block_of[d.initial]: 0}
    queue = deque([block_of[d.initial]])
    while queue:
        block = queue.popleft()
        representative = min(partition[block])
        for sym in alphabet:
            target = block_of[d.transitions[representative][sym]]
            if target not in order:
                order[target] = len(order)
                queue.append(target)

    rows: List[Tuple[int, ...]] = [()] * len(order)
    formulas: List[Optional[Formula]] = [None] * len(order)
    for block, new in order.items():
        representative = min(partition[block])
        rows[new] = tuple(order[block_of[d.transitions[representative][sym]]] for sym in alphabet)
        if d.state_formulas:
            formulas[new] = d.state_formulas[representative]

    new_finals = frozenset(order[block_of[q]] for q in finals)
    dead = None
    for new, row in enumerate(rows):
        if new not in new_finals and all(target == new for target in row):
            dead = new
            break

    return Dfa(d.atoms, tuple(rows), 0, new_finals, dead, tuple(formulas))


def build_automaton(phi: Formula, max_states: int = DEFAULT_MAX_STATES) -> Dfa:
    """编译并最小化"""
    d = minimize(compile_formula(phi, max_states))
    get_logger('DfaCompiler').info(
        f"自动机编译完成: {d.state_count} 个状态 (活跃 {live_states(d)})"
    )
    return d


def step(d: Dfa, q: int, label: Union[LabelVector, int]) -> int:
    """δ(q, ℓ)"""
    return d.transitions[q][_label_bits(d, label)]


def accepts_prefix(d: Dfa, word: Iterable[Union[LabelVector, int]]) -> bool:
    """从初态读word的过程中是否到达过接受态"""
    q = d.initial
    if q in d.finals:
        return True
    for label in word:
        q = step(d, q, label)
        if q in d.finals:
            return True
    return False


def live_states(d: Dfa) -> int:
    return d.state_count - (1 if d.dead is not None else 0)


def _prime_implicants(minterms: Set[int], width: int) -> List[Tuple[int, int]]:
    """(value, care_mask) 形式的质蕴含项"""
    full = (1 << width) - 1
    current = {(m, full) for m in minterms}
    primes: Set[Tuple[int, int]] = set()
    while current:
        merged: Set[Tuple[int, int]] = set()
        used: Set[Tuple[int, int]] = set()
        items = sorted(current)
        for i, (v1, m1) in enumerate(items):
            for v2, m2 in items[i + 1:]:
                if m1 != m2:
                    continue
                diff = (v1 ^ v2) & m1
                if diff and not diff & (diff - 1):
                    merged.add((v1 & ~diff, m1 & ~diff))
                    used.add((v1, m1))
                    used.add((v2, m2))
        primes |= current - used
        current = merged
    # 约束位少的(覆盖大的)优先
    return sorted(primes, key=lambda t: (bin(t[1]).count('1'), t))


def _guard_text(minterms: Set[int], names: Sequence[str]) -> str:
    width = len(names)
    if len(minterms) == 1 << width:
        return 'true'
    remaining = set(minterms)
    cubes = []
    for value, care in _prime_implicants(minterms, width):
        covered = {m for m in remaining if (m & care) == (value & care)}
        if not covered:
            continue
        remaining -= covered
        literals = []
        for i, name in enumerate(names):
            if care >> i & 1:
                literals.append(name if value >> i & 1 else '!' + name)
        cubes.append(' & '.join(literals) if literals else 'true')
        if not remaining:
            break
    return ' | '.join(cubes)


_DOT_TEMPLATE = Template('''digraph dfa {
  rankdir=LR;
  node [shape=circle];
  __start [shape=point];
{% for node in nodes %}  q{{ node.index }} [{% if node.final %}shape=doublecircle, {% endif %}{% if node.dead %}style=dashed, {% endif %}label="q{{ node.index }}"{% if node.formula %}, tooltip="{{ node.formula }}"{% endif %}];
{% endfor %}  __start -> q{{ initial }};
{% for edge in edges %}  q{{ edge.source }} -> q{{ edge.target }} [label="{{ edge.guard }}"];
{% endfor %}}
''')


def export_dot(d: Dfa) -> str:
    """Graphviz DOT文本，同一对状态间的边合并成一个符号守卫"""
    names = d.atom_names
    nodes = []
    edges = []
    for q, row in enumerate(d.transitions):
        formula = d.state_formulas[q] if q < len(d.state_formulas) else None
        nodes.append({
            'index': q,
            'final': q in d.finals,
            'dead': d.is_dead(q),
            'formula': to_text(formula).replace('"', '\\"') if formula is not None else '',
        })
        grouped: Dict[int, Set[int]] = {}
        for bits, target in enumerate(row):
            grouped.setdefault(target, set()).add(bits)
        for target in sorted(grouped):
            edges.append({'source': q, 'target': target, 'guard': _guard_text(grouped[target], names)})
    return _DOT_TEMPLATE.render(nodes=nodes, edges=edges, initial=d.initial)


def to_json(d: Dfa) -> Dict[str, Any]:
    """结构化转储，用于golden文件测试"""
    return {
        'atoms': list(d.atom_names),
        'states': d.state_count,
        'initial': d.initial,
        'finals': sorted(d.finals),
        'dead': d.dead,
        'transitions': [
            {str(bits): target for bits, target in enumerate(row)}
            for row in d.transitions
        ],
        'formulas': [to_text(f) if f is not None else None for f in d.state_formulas],
    }


def from_json(data: Mapping[str, Any], atom_table: Mapping[str, Atom]) -> Dfa:
    """从to_json的结果重建自动机"""
    atoms = tuple(atom_table[name] for name in data['atoms'])
    width = 1 << len(atoms)
    rows = tuple(
        tuple(int(row[str(bits)]) for bits in range(width))
        for row in data['transitions']
    )
    return Dfa(atoms, rows, int(data['initial']), frozenset(data['finals']), data.get('dead'))
