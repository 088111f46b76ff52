"""Recursive-descent parser for the smooth-expression grammar.

    expr   := ["-"] term { ("+" | "-") term }
    term   := factor { "*" factor }
    factor := "-" factor | base [ "^" nat ]
    base   := number ["/" number] | "x" nat | func "(" expr ")" | "(" expr ")"
    func   := "exp" | "sin" | "cos" | "atan" | "tanh"

Unary minus binds looser than "^", so "-x1^2" is -(x1^2).  A literal
"p/q" between two numbers is a rational constant; every other "/" is
rejected as non-smooth.
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..errors import ExprSyntaxError, NonSmoothConstruct, VariableOutOfRange
from .tree import PRIMITIVES, Node, SmoothExpr, Var, add, const, mul, neg, power, prim

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*^/()])"
    r")"
)

_NON_SMOOTH = {"log", "ln", "sqrt", "abs", "tan", "pow", "exp2", "log10", "asin", "acos"}


def _tokenize(text: str):
    pos = 0
    tokens = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r} at {pos}")
        kind = m.lastgroup
        if kind is None:
            raise ExprSyntaxError(f"unexpected character at {pos}")
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, arity: int):
        self.text = text
        self.arity = arity
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value:
            raise ExprSyntaxError(f"expected {value!r} at {pos}, found {val or 'end of input'!r}")

    def parse(self) -> Node:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            if val == "/":
                raise NonSmoothConstruct(f"division at {pos} is not a smooth construct")
            raise ExprSyntaxError(f"unexpected {val!r} at {pos}")
        return node

    def expr(self) -> Node:
        negate = False
        if self.peek()[1] == "-":
            self.take()
            negate = True
        first = self.term()
        terms = [neg(first) if negate else first]
        while self.peek()[1] in ("+", "-"):
            _, op, _ = self.take()
            t = self.term()
            terms.append(t if op == "+" else neg(t))
        return add(*terms)

    def term(self) -> Node:
        factors = [self.factor()]
        while self.peek()[1] == "*":
            self.take()
            factors.append(self.factor())
        return mul(*factors) if len(factors) > 1 else factors[0]

    def factor(self) -> Node:
        if self.peek()[1] == "-":
            self.take()
            return neg(self.factor())
        base = self.base()
        kind, val, pos = self.peek()
        if val in ("^", "**"):
            self.take()
            kind, val, pos = self.take()
            if kind == "num" and val.isdigit():
                return power(base, int(val))
            raise NonSmoothConstruct(f"exponent at {pos} must be a natural number literal")
        return base

    def base(self) -> Node:
        kind, val, pos = self.take()
        if kind == "num":
            value = Fraction(val)
            if self.peek()[1] == "/":
                nxt = self.tokens[self.i + 1]
                if nxt[0] == "num":
                    self.i += 2
                    den = Fraction(nxt[1])
                    if den == 0:
                        raise ExprSyntaxError(f"zero denominator at {nxt[2]}")
                    return const(value / den)
                raise NonSmoothConstruct(f"division at {self.peek()[2]} is not a smooth construct")
            return const(value)
        if kind == "name":
            if re.fullmatch(r"x\d+", val):
                idx = int(val[1:])
                if not 1 <= idx <= self.arity:
                    raise VariableOutOfRange(f"{val} not in x1..x{self.arity}")
                self._no_division()
                return Var(idx)
            if val in PRIMITIVES:
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                self._no_division()
                return prim(val, inner)
            if val in _NON_SMOOTH:
                raise NonSmoothConstruct(f"{val} is not a globally smooth primitive")
            raise ExprSyntaxError(f"unknown identifier {val!r} at {pos}")
        if val == "(":
            inner = self.expr()
            self.expect(")")
            self._no_division()
            return inner
        if val == "/":
            raise NonSmoothConstruct(f"division at {pos} is not a smooth construct")
        raise ExprSyntaxError(f"unexpected {val or 'end of input'!r} at {pos}")

    def _no_division(self):
        kind, val, pos = self.peek()
        if val == "/":
            raise NonSmoothConstruct(f"division at {pos} is not a smooth construct")


def parse(text: str, arity: int) -> SmoothExpr:
    """Parse `text` into a SmoothExpr in the variables x1..x<arity>."""
    if not isinstance(text, str):
        raise TypeError("expression text must be a string")
    return SmoothExpr(arity, _Parser(text, arity).parse())
