"""
模型文件读写

文本格式，逐行一条声明：
    states N
    actions name...
    observations name...
    init s p
    T s a s' p
    O s o p
    atom name {i:coef,...} (>|>=) c
    anyof name = max_component (>|>=) c
    anyof name = [atom, atom, ...]
    objective <公式文本>
以 # 开头的行是注释。下标从0开始，动作和观测也可以写名字。
"""

import os
import re
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from .formula import AnyOfAtom, Atom, LinearAtom, MaxComponentAtom
from .pomdp import Pomdp
from ..utils.errors import ModelFormatError
from ..utils.logger import get_logger


class ModelBundle(NamedTuple):
    """模型、原子表和目标公式文本"""
    pomdp: Pomdp
    atoms: Dict[str, Atom]
    objective: Optional[str]


_ATOM_RE = re.compile(r'^atom\s+([A-Za-z_][A-Za-z0-9_]*)\s*\{([^}]*)\}\s*(>=|>)\s*(\S+)$')
_ANYOF_MAX_RE = re.compile(r'^anyof\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*max_component\s*(>=|>)\s*(\S+)$')
_ANYOF_LIST_RE = re.compile(r'^anyof\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*\[([^\]]*)\]$')


class _ModelReader:
    """逐行解析器，记录行号用于报错"""

    def __init__(self, source: str):
        self._source = source
        self.state_count: Optional[int] = None
        self.actions: List[str] = []
        self.observations: List[str] = []
        self.init: Dict[int, float] = {}
        self.transitions: Dict[Tuple[int, int, int], float] = {}
        self.sensor: Dict[Tuple[int, int], float] = {}
        self.atoms: Dict[str, Atom] = {}
        self.objective: Optional[str] = None
        self._line = 0

    def error(self, message: str) -> ModelFormatError:
        return ModelFormatError(f"{self._source}: {message}", self._line)

    def _probability(self, token: str) -> float:
        try:
            value = float(token)
        except ValueError:
            raise self.error(f"无法解析的概率 {token!r}")
        if not 0.0 <= value <= 1.0:
            raise self.error(f"概率 {value!r} 不在 [0,1] 内")
        return value

    def _real(self, token: str) -> float:
        try:
            return float(token)
        except ValueError:
            raise self.error(f"无法解析的数值 {token!r}")

    def _state(self, token: str) -> int:
        if self.state_count is None:
            raise self.error("必须先声明 states")
        if not token.isdigit():
            raise self.error(f"非法状态下标 {token!r}")
        index = int(token)
        if index >= self.state_count:
            raise self.error(f"状态下标 {index} 越界 (共 {self.state_count} 个状态)")
        return index

    def _named(self, token: str, names: List[str], what: str) -> int:
        if not names:
            raise self.error(f"必须先声明 {what}")
        if token in names:
            return names.index(token)
        if token.isdigit() and int(token) < len(names):
            return int(token)
        raise self.error(f"未知{what} {token!r}")

    def _entry(self, table: dict, key: tuple, value: float) -> None:
        if key in table:
            raise self.error(f"重复条目 {key}")
        table[key] = value

    def feed(self, number: int, raw: str) -> None:
        self._line = number
        line = raw.strip()
        if not line or line.startswith('#'):
            return
        keyword, *remainder = line.split(None, 1)
        rest = remainder[0] if remainder else ''
        tokens = rest.split()

        if keyword == 'states':
            if self.state_count is not None:
                raise self.error("重复声明 states")
            if len(tokens) != 1 or not tokens[0].isdigit() or int(tokens[0]) < 1:
                raise self.error("states 需要一个正整数")
            self.state_count = int(tokens[0])
        elif keyword in ('actions', 'observations'):
            target = self.actions if keyword == 'actions' else self.observations
            if target:
                raise self.error(f"重复声明 {keyword}")
            if not tokens or len(set(tokens)) != len(tokens):
                raise self.error(f"{keyword} 需要一组互不相同的名字")
            target.extend(tokens)
        elif keyword == 'init':
            if len(tokens) != 2:
                raise self.error("init 格式: init s p")
            self._entry(self.init, (self._state(tokens[0]),), self._probability(tokens[1]))
        elif keyword == 'T':
            if len(tokens) != 4:
                raise self.error("T 格式: T s a s' p")
            key = (
                self._state(tokens[0]),
                self._named(tokens[1], self.actions, '动作'),
                self._state(tokens[2]),
            )
            self._entry(self.transitions, key, self._probability(tokens[3]))
        elif keyword == 'O':
            if len(tokens) != 3:
                raise self.error("O 格式: O s o p")
            key = (self._state(tokens[0]), self._named(tokens[1], self.observations, '观测'))
            self._entry(self.sensor, key, self._probability(tokens[2]))
        elif keyword == 'atom':
            self._atom(line)
        elif keyword == 'anyof':
            self._anyof(line)
        elif keyword == 'objective':
            if self.objective is not None:
                raise self.error("重复声明 objective")
            if not rest.strip():
                raise self.error("objective 不能为空")
            self.objective = rest.strip()
        else:
            raise self.error(f"未知声明 {keyword!r}")

    def _declare(self, name: str, value: Atom) -> None:
        if name in self.atoms:
            raise self.error(f"原子 {name} 重复声明")
        self.atoms[name] = value

    def _atom(self, line: str) -> None:
        match = _ATOM_RE.match(line)
        if not match:
            raise self.error("atom 格式: atom name {i:coef,...} (>|>=) c")
        name, body, op, threshold = match.groups()
        coeffs: Dict[int, float] = {}
        for item in filter(None, (part.strip() for part in body.split(','))):
            index, sep, coef = item.partition(':')
            if not sep:
                raise self.error(f"系数项 {item!r} 缺少冒号")
            state = self._state(index.strip())
            if state in coeffs:
                raise self.error(f"原子 {name} 的系数下标 {state} 重复")
            coeffs[state] = self._real(coef.strip())
        self._declare(name, LinearAtom(name, coeffs, self._real(threshold), strict=(op == '>')))

    def _anyof(self, line: str) -> None:
        match = _ANYOF_MAX_RE.match(line)
        if match:
            name, op, threshold = match.groups()
            self._declare(name, MaxComponentAtom(name, self._real(threshold), strict=(op == '>')))
            return
        match = _ANYOF_LIST_RE.match(line)
        if not match:
            raise self.error("anyof 格式: anyof name = max_component (>|>=) c 或 anyof name = [a, b]")
        name, body = match.groups()
        members = []
        for member in filter(None, (part.strip() for part in body.split(','))):
            declared = self.atoms.get(member)
            if not isinstance(declared, LinearAtom):
                raise self.error(f"anyof 成员 {member!r} 必须是先前声明的线性原子")
            members.append(declared)
        if not members:
            raise self.error("anyof 成员列表为空")
        self._declare(name, AnyOfAtom(name, tuple(members)))

    def build(self) -> ModelBundle:
        self._line = None
        if self.state_count is None:
            raise self.error("缺少 states 声明")
        if not self.actions:
            raise self.error("缺少 actions 声明")
        if not self.observations:
            raise self.error("缺少 observations 声明")

        S, A, W = self.state_count, len(self.actions), len(self.observations)
        transitions = np.zeros((A, S, S))
        for (s, a, s_next), p in self.transitions.items():
            transitions[a, s, s_next] = p
        observations = np.zeros((S, W))
        for (s, o), p in self.sensor.items():
            observations[s, o] = p
        init = np.zeros(S)
        for (s,), p in self.init.items():
            init[s] = p

        pomdp = Pomdp(transitions, observations, init, tuple(self.actions), tuple(self.observations))
        return ModelBundle(pomdp, dict(self.atoms), self.objective)


def parse_model(text: str, source: str = '<string>') -> ModelBundle:
    """解析模型文本"""
    reader = _ModelReader(source)
    for number, raw in enumerate(text.splitlines(), start=1):
        reader.feed(number, raw)
    return reader.build()


def load_model(path: str) -> ModelBundle:
    """读取并校验模型文件"""
    logger = get_logger('ModelLoader')
    with open(path, 'r', encoding='utf-8') as f:
        text = f.read()
    bundle = parse_model(text, os.path.basename(path))
    m = bundle.pomdp
    logger.info(
        f"模型加载完成: {path} ({m.state_count} 个状态, {m.action_count} 个动作, "
        f"{m.observation_count} 个观测, {len(bundle.atoms)} 个原子)"
    )
    return bundle


def dump_model(bundle: ModelBundle) -> str:
    """序列化为模型文本，浮点数用repr保证往返精确"""
    m = bundle.pomdp
    lines = [
        f"states {m.state_count}",
        f"actions {' '.join(m.action_names)}",
        f"observations {' '.join(m.observation_names)}",
    ]
    for s in np.flatnonzero(m.init):
        lines.append(f"init {s} {float(m.init[s])!r}")
    for a in range(m.action_count):
        rows, cols = np.nonzero(m.transitions[a])
        for s, s_next in zip(rows, cols):
            lines.append(f"T {s} {m.action_names[a]} {s_next} {float(m.transitions[a, s, s_next])!r}")
    rows, cols = np.nonzero(m.observations)
    for s, o in zip(rows, cols):
        lines.append(f"O {s} {m.observation_names[o]} {float(m.observations[s, o])!r}")

    # 线性原子先写，anyof 列表才能引用到
    linear = [a for a in bundle.atoms.values() if isinstance(a, LinearAtom)]
    grouped = [a for a in bundle.atoms.values() if not isinstance(a, LinearAtom)]
    for a in linear:
        lines.append(f"atom {a.name} {a.describe()}")
    for a in grouped:
        lines.append(f"anyof {a.name} = {a.describe()}")
    if bundle.objective:
        lines.append(f"objective {bundle.objective}")
    return '\n'.join(lines) + '\n'


def save_model(bundle: ModelBundle, path: str) -> None:
    """写出模型文件"""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(dump_model(bundle))
    get_logger('ModelLoader').info(f"模型已保存: {path}")
