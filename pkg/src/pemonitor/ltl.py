"""Bounded LTL over finite MPEA traces with a three-valued verdict.

Formulas are parsed from::

    f := atom | 'true' | 'false' | '!' f | f '&' f | f '|' f | f '->' f
       | 'X' f | 'G<=' k f | 'F<=' k f | '(' f ')'

Unary operators bind tightest, then ``&``, ``|`` and finally ``->`` which
associates to the right. The atom ``w`` holds exactly at mid-transition
positions.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

OMEGA = "w"


class Verdict(enum.Enum):
    TRUE = 1
    FALSE = -1
    UNKNOWN = 0

    def __invert__(self):
        return Verdict(-self.value)

    def __str__(self):
        return self.name


class LTLSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Not:
    arg: object

    def __str__(self):
        return f"!{_p(self.arg)}"


@dataclass(frozen=True)
class Next:
    arg: object

    def __str__(self):
        return f"X {_p(self.arg)}"


@dataclass(frozen=True)
class Always:
    bound: int
    arg: object

    def __str__(self):
        return f"G<={self.bound} {_p(self.arg)}"


@dataclass(frozen=True)
class Eventually:
    bound: int
    arg: object

    def __str__(self):
        return f"F<={self.bound} {_p(self.arg)}"


@dataclass(frozen=True)
class And:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class Or:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} | {self.right})"


@dataclass(frozen=True)
class Implies:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} -> {self.right})"


def _p(node):
    s = str(node)
    if isinstance(node, (Atom, Const, Not, Next)) or s.startswith("("):
        return s
    return f"({s})"


# -- parsing ---------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<bound>[GF]\s*<=\s*)"
    r"|(?P<imp>->)"
    r"|(?P<sym>[!&|()])"
    r"|(?P<int>\d+)"
    r"|(?P<word>[A-Za-z_]\w*))"
)


def _tokenize(text):
    pos, out = 0, []
    while True:
        rest = text[pos:]
        if not rest.strip():
            return out
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            at = pos + len(rest) - len(rest.lstrip())
            raise LTLSyntaxError(f"unexpected character {text[at]!r}", at)
        kind = m.lastgroup
        out.append((kind, m.group(kind).replace(" ", ""), m.start(kind)))
        pos = m.end()


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def take(self):
        tok = self.peek()
        if tok[0] is None:
            raise LTLSyntaxError("unexpected end of input", len(self.text))
        self.i += 1
        return tok

    def parse(self):
        node = self.implication()
        kind, val, at = self.peek()
        if kind is not None:
            raise LTLSyntaxError(f"unexpected token {val!r}", at)
        return node

    def implication(self):
        left = self.disjunction()
        if self.peek()[0] == "imp":
            self.take()
            return Implies(left, self.implication())
        return left

    def disjunction(self):
        node = self.conjunction()
        while self.peek()[1] == "|":
            self.take()
            node = Or(node, self.conjunction())
        return node

    def conjunction(self):
        node = self.unary()
        while self.peek()[1] == "&":
            self.take()
            node = And(node, self.unary())
        return node

    def unary(self):
        kind, val, at = self.take()
        if val == "!":
            return Not(self.unary())
        if kind == "bound":
            k_kind, k, k_at = self.take()
            if k_kind != "int":
                raise LTLSyntaxError("expected a non-negative integer bound", k_at)
            op = Always if val.startswith("G") else Eventually
            return op(int(k), self.unary())
        if val == "(":
            node = self.implication()
            kind, val, at = self.peek()
            if val != ")":
                raise LTLSyntaxError("expected ')'", at)
            self.take()
            return node
        if kind == "word":
            if val == "X":
                return Next(self.unary())
            if val in ("true", "false"):
                return Const(val == "true")
            return Atom(val)
        raise LTLSyntaxError(f"unexpected token {val!r}", at)


def parse_ltl(text: str):
    return _Parser(text).parse()


# -- evaluation ------------------------------------------------------------

T, F, U = 1, -1, 0


def _holds(name: str, letter) -> int:
    if name == OMEGA:
        return T if letter == {OMEGA} else F
    return T if name in letter else F


def _window(vals, k, conj):
    """Bounded always (``conj``) or eventually over ``vals[i..i+k]``."""
    n = len(vals)
    # Suffix scans: next index holding the decisive value.
    decisive = F if conj else T
    out = [U] * n
    nxt = n
    nearest = [n] * (n + 1)
    for i in range(n - 1, -1, -1):
        if vals[i] == decisive:
            nxt = i
        nearest[i] = nxt
    # count of UNKNOWN in prefix, to decide the all-non-decisive case
    unk = [0] * (n + 1)
    for i, v in enumerate(vals):
        unk[i + 1] = unk[i] + (v == U)
    for i in range(n):
        hi = min(i + k, n - 1)
        if nearest[i] <= hi:
            out[i] = decisive
        elif i + k <= n - 1 and unk[hi + 1] - unk[i] == 0:
            out[i] = -decisive
        else:
            out[i] = U
    return out


def _eval_all(node, trace, memo):
    key = id(node)
    if key in memo:
        return memo[key]
    n = len(trace)
    if isinstance(node, Atom):
        res = [_holds(node.name, a) for a in trace]
    elif isinstance(node, Const):
        res = [T if node.value else F] * n
    elif isinstance(node, Not):
        res = [-v for v in _eval_all(node.arg, trace, memo)]
    elif isinstance(node, And):
        res = [min(a, b) for a, b in zip(_eval_all(node.left, trace, memo), _eval_all(node.right, trace, memo))]
    elif isinstance(node, Or):
        res = [max(a, b) for a, b in zip(_eval_all(node.left, trace, memo), _eval_all(node.right, trace, memo))]
    elif isinstance(node, Implies):
        res = [max(-a, b) for a, b in zip(_eval_all(node.left, trace, memo), _eval_all(node.right, trace, memo))]
    elif isinstance(node, Next):
        sub = _eval_all(node.arg, trace, memo)
        res = sub[1:] + [U] if n else []
    elif isinstance(node, Always):
        res = _window(_eval_all(node.arg, trace, memo), node.bound, conj=True)
    elif isinstance(node, Eventually):
        res = _window(_eval_all(node.arg, trace, memo), node.bound, conj=False)
    else:
        raise TypeError(f"not a formula: {node!r}")
    memo[key] = res
    return res


def _letters(trace):
    return [frozenset(a) for a in getattr(trace, "sets", trace)]


def evaluate_all(formula, trace) -> list:
    """Verdicts of ``formula`` at every position of ``trace``."""
    if isinstance(formula, str):
        formula = parse_ltl(formula)
    return [Verdict(v) for v in _eval_all(formula, _letters(trace), {})]


def evaluate(formula, trace, i: int = 0) -> Verdict:
    """Three-valued verdict of ``formula`` at position ``i`` of ``trace``.

    Positions past the end of the trace are unknown, so ``X`` at the last
    position and bounds that reach past the end yield ``UNKNOWN`` unless a
    witness already decides them.
    """
    letters = _letters(trace)
    if not 0 <= i < len(letters):
        raise IndexError(f"position {i} outside trace of length {len(letters)}")
    if isinstance(formula, str):
        formula = parse_ltl(formula)
    return Verdict(_eval_all(formula, letters, {})[i])
