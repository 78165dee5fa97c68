"""Equilibrium conditions: boolean formulas over H and dH.

Grammar::

    cond := disj
    disj := conj ('or' conj)*
    conj := unary ('and' unary)*
    unary := 'not' unary | '(' cond ')' | pred
    pred := ('H' | 'dH') op number
    op   := '=' | '==' | '!=' | '<' | '<=' | '>' | '>='
"""

from __future__ import annotations

import re
from dataclasses import dataclass

DEFAULT_EPS_EQ = 1e-6

_TOKEN = re.compile(
    r"\s*(?:(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
    r"|(?P<op><=|>=|==|!=|=|<|>|≤|≥|≠)"
    r"|(?P<word>[A-Za-z_]\w*)"
    r"|(?P<paren>[()]))"
)
_OPS = {"==": "=", "≤": "<=", "≥": ">=", "≠": "!="}


class ConditionSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


@dataclass(frozen=True)
class Pred:
    var: str  # "H" or "dH"
    op: str
    value: float

    def __str__(self):
        return f"{self.var} {self.op} {self.value!r}"


@dataclass(frozen=True)
class Not:
    arg: object

    def __str__(self):
        return f"not ({self.arg})"


@dataclass(frozen=True)
class And:
    left: object
    right: object

    def __str__(self):
        return f"{_wrap(self.left, Or)} and {_wrap(self.right, Or)}"


@dataclass(frozen=True)
class Or:
    left: object
    right: object

    def __str__(self):
        return f"{self.left} or {self.right}"


def _wrap(node, kind):
    return f"({node})" if isinstance(node, kind) else str(node)


@dataclass(frozen=True)
class EquilibriumCondition:
    """Parsed condition plus the tolerance used by ``=`` and the inequalities."""

    tree: object
    eps_eq: float = DEFAULT_EPS_EQ

    def __call__(self, h: float, hdot: float) -> bool:
        return eval_condition(self, h, hdot)

    def __str__(self):
        return str(self.tree)


def _tokenize(text: str):
    pos, out = 0, []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ConditionSyntaxError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def pos(self):
        tok = self.peek()
        return tok[2] if tok else len(self.text)

    def take(self):
        tok = self.peek()
        if tok is None:
            raise ConditionSyntaxError("unexpected end of input", len(self.text))
        self.i += 1
        return tok

    def parse(self):
        node = self.disj()
        if self.peek() is not None:
            raise ConditionSyntaxError(f"unexpected token {self.peek()[1]!r}", self.pos())
        return node

    def disj(self):
        node = self.conj()
        while self._is_word("or"):
            self.take()
            node = Or(node, self.conj())
        return node

    def conj(self):
        node = self.unary()
        while self._is_word("and"):
            self.take()
            node = And(node, self.unary())
        return node

    def unary(self):
        if self._is_word("not"):
            self.take()
            return Not(self.unary())
        tok = self.peek()
        if tok and tok[1] == "(":
            self.take()
            node = self.disj()
            tok = self.peek()
            if not tok or tok[1] != ")":
                raise ConditionSyntaxError("expected ')'", self.pos())
            self.take()
            return node
        return self.pred()

    def pred(self):
        at = self.pos()
        kind, var, _ = self.take()
        if kind != "word" or var not in ("H", "dH"):
            raise ConditionSyntaxError(f"expected 'H' or 'dH', got {var!r}", at)
        at = self.pos()
        kind, op, _ = self.take()
        if kind != "op":
            raise ConditionSyntaxError(f"expected comparison operator, got {op!r}", at)
        at = self.pos()
        kind, num, _ = self.take()
        if kind != "num":
            raise ConditionSyntaxError(f"expected number, got {num!r}", at)
        return Pred(var, _OPS.get(op, op), float(num))

    def _is_word(self, w):
        tok = self.peek()
        return tok is not None and tok[0] == "word" and tok[1] == w


def parse_condition(text: str, eps_eq: float = DEFAULT_EPS_EQ) -> EquilibriumCondition:
    return EquilibriumCondition(_Parser(text).parse(), eps_eq)


def _compare(lhs: float, op: str, c: float, eps: float) -> bool:
    # Inequalities are tolerance-aware so that exactly one of <, =, > holds.
    if op == "=":
        return abs(lhs - c) <= eps
    if op == "!=":
        return abs(lhs - c) > eps
    if op == "<":
        return lhs < c - eps
    if op == "<=":
        return lhs <= c + eps
    if op == ">":
        return lhs > c + eps
    if op == ">=":
        return lhs >= c - eps
    raise ValueError(f"unknown operator {op!r}")


def _eval(node, h, hdot, eps):
    if isinstance(node, Pred):
        return _compare(h if node.var == "H" else hdot, node.op, node.value, eps)
    if isinstance(node, Not):
        return not _eval(node.arg, h, hdot, eps)
    if isinstance(node, And):
        return _eval(node.left, h, hdot, eps) and _eval(node.right, h, hdot, eps)
    if isinstance(node, Or):
        return _eval(node.left, h, hdot, eps) or _eval(node.right, h, hdot, eps)
    raise TypeError(f"not a condition node: {node!r}")


def eval_condition(cond: EquilibriumCondition, h: float, hdot: float) -> bool:
    return _eval(cond.tree, h, hdot, cond.eps_eq)
