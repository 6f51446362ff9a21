"""
sc-iLTL 公式解析器

优先级从低到高: U < | < & < 一元 (! X F)。U 右结合。
G / R / W 会被识别出来，用于给出“不是co-safe”的错误而不是语法错误。
"""

from typing import Mapping, Optional

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, VisitError

from .formula import Atom, Formula, Kind, negate
from ..utils.errors import FormulaSyntaxError, NonCoSafeError, UnknownAtomError
from ..utils.logger import get_logger


GRAMMAR = r'''
?start: until

?until: disj
    | disj "U" until    -> until
    | disj "R" until    -> release
    | disj "W" until    -> weak_until

?disj: conj
    | disj "|" conj     -> or_
    | disj "||" conj    -> or_

?conj: unary
    | conj "&" unary    -> and_
    | conj "&&" unary   -> and_

?unary: primary
    | "!" unary         -> neg
    | "X" unary         -> next_
    | "F" unary         -> eventually
    | "G" unary         -> always

?primary: "true"        -> true
    | "false"           -> false
    | NAME              -> atom
    | "(" until ")"

NAME: /(?!(?:true|false|X|F|G|U|R|W)\b)[A-Za-z_][A-Za-z0-9_]*/

%import common.WS
%ignore WS
'''


@v_args(inline=True)
class _FormulaBuilder(Transformer):
    """把lark语法树转成否定范式的Formula"""

    def __init__(self, atom_table: Mapping[str, Atom]):
        super().__init__()
        self._atom_table = atom_table

    def true(self):
        return Formula(Kind.TRUE)

    def false(self):
        return Formula(Kind.FALSE)

    def atom(self, token):
        name = str(token)
        if name not in self._atom_table:
            raise UnknownAtomError(name)
        return Formula(Kind.ATOM, atom=self._atom_table[name])

    def neg(self, child):
        return negate(child)

    def next_(self, child):
        return Formula(Kind.NEXT, (child,))

    def eventually(self, child):
        return Formula(Kind.EVENTUALLY, (child,))

    def until(self, left, right):
        return Formula(Kind.UNTIL, (left, right))

    def and_(self, left, right):
        return Formula(Kind.AND, (left, right))

    def or_(self, left, right):
        return Formula(Kind.OR, (left, right))

    def always(self, child):
        raise NonCoSafeError("算子 G (always) 不是co-safe的")

    def release(self, left, right):
        raise NonCoSafeError("算子 R (release) 不是co-safe的")

    def weak_until(self, left, right):
        raise NonCoSafeError("算子 W (weak until) 不是co-safe的")


class FormulaParser:
    """sc-iLTL 公式解析器"""

    def __init__(self):
        self._parser = Lark(GRAMMAR, parser='lalr')
        self._logger = get_logger('FormulaParser')

    def parse(self, text: str, atom_table: Mapping[str, Atom]) -> Formula:
        """解析公式文本，返回否定范式语法树"""
        try:
            tree = self._parser.parse(text)
        except UnexpectedEOF as e:
            raise FormulaSyntaxError("公式意外结束", len(text)) from e
        except UnexpectedCharacters as e:
            raise FormulaSyntaxError(f"无法识别的字符 {text[e.pos_in_stream]!r}", e.pos_in_stream) from e
        except UnexpectedInput as e:
            position = getattr(e, 'pos_in_stream', None)
            token = getattr(e, 'token', None)
            raise FormulaSyntaxError(f"意外的符号 {token!s}", position) from e

        try:
            phi = _FormulaBuilder(atom_table).transform(tree)
        except VisitError as e:
            # Transformer里抛出的异常会被lark包一层
            raise e.orig_exc from None

        self._logger.debug(f"公式解析完成: {text}")
        return phi


_default_parser: Optional[FormulaParser] = None


def parse_formula(text: str, atom_table: Mapping[str, Atom]) -> Formula:
    """便捷函数：用共享解析器解析公式"""
    global _default_parser
    if _default_parser is None:
        _default_parser = FormulaParser()
    return _default_parser.parse(text, atom_table)
