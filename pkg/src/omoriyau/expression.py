"""Expression strings in one variable ``t``.

A small recursive-descent parser builds a tree; the tree is evaluated on
second-order jets (value, first, second derivative) so derivatives come from
forward-mode propagation rather than finite differences. Jets hold numpy
arrays, so a whole grid is evaluated in one tree walk.

Grammar (``^`` binds tighter than unary minus and is right associative)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('+' | '-') unary | power
    power   := primary ('^' unary)?
    primary := NUMBER | 't' | NAME '(' expr (',' expr)* ')' | '(' expr ')'
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError, ExpressionSyntaxError, UnknownIdentifierError

FUNCTIONS = {"exp": 1, "log": 1, "sqrt": 1, "sinh": 1, "cosh": 1, "tanh": 1, "pow": 2}


class Jet:
    """Truncated Taylor jet ``(v, v', v'')`` with arithmetic by the chain rule."""

    __slots__ = ("v", "d1", "d2", "const")

    def __init__(self, v, d1=0.0, d2=0.0, const=False):
        self.v = v
        self.d1 = d1
        self.d2 = d2
        self.const = const

    @classmethod
    def constant(cls, c, like):
        z = np.zeros_like(like, dtype=float)
        return cls(z + c, z, z, const=True)

    @classmethod
    def variable(cls, t):
        t = np.asarray(t, dtype=float)
        return cls(t, np.ones_like(t), np.zeros_like(t))

    def __add__(self, o):
        return Jet(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2, self.const and o.const)

    def __sub__(self, o):
        return Jet(self.v - o.v, self.d1 - o.d1, self.d2 - o.d2, self.const and o.const)

    def __neg__(self):
        return Jet(-self.v, -self.d1, -self.d2, self.const)

    def __mul__(self, o):
        return Jet(
            self.v * o.v,
            self.d1 * o.v + self.v * o.d1,
            self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
            self.const and o.const,
        )

    def __truediv__(self, o):
        if np.any(o.v == 0):
            raise EvaluationError("division by zero")
        q = self.v / o.v
        q1 = (self.d1 - q * o.d1) / o.v
        q2 = (self.d2 - 2.0 * q1 * o.d1 - q * o.d2) / o.v
        return Jet(q, q1, q2, self.const and o.const)

    def __pow__(self, o):
        if o.const:
            b = o.v
            base = self.v
            if np.any((base < 0) & (b != np.round(b))):
                raise EvaluationError("non-integer power of a negative number")
            if np.any((base == 0) & (b < 0)):
                raise EvaluationError("negative power of zero")
            with np.errstate(divide="ignore", invalid="ignore"):
                p0 = base**b
                p1 = np.where(b == 0, 0.0, b * base ** (b - 1.0))
                p2 = np.where((b == 0) | (b == 1), 0.0, b * (b - 1.0) * base ** (b - 2.0))
            return Jet(p0, p1 * self.d1, p2 * self.d1**2 + p1 * self.d2, self.const)
        return exp(o * log(self))


def _lift(v, d1f, d2f, a: Jet) -> Jet:
    # composition f(a): (f(a), f'(a) a', f''(a) a'^2 + f'(a) a'')
    return Jet(v, d1f * a.d1, d2f * a.d1**2 + d1f * a.d2, a.const)


def exp(a: Jet) -> Jet:
    with np.errstate(over="ignore"):
        e = np.exp(a.v)
    return _lift(e, e, e, a)


def log(a: Jet) -> Jet:
    if np.any(a.v <= 0):
        raise EvaluationError("log of a nonpositive number")
    return _lift(np.log(a.v), 1.0 / a.v, -1.0 / a.v**2, a)


def sqrt(a: Jet) -> Jet:
    if np.any(a.v < 0):
        raise EvaluationError("sqrt of a negative number")
    s = np.sqrt(a.v)
    with np.errstate(divide="ignore"):
        return _lift(s, 0.5 / s, -0.25 / s**3, a)


def sinh(a: Jet) -> Jet:
    sh, ch = np.sinh(a.v), np.cosh(a.v)
    return _lift(sh, ch, sh, a)


def cosh(a: Jet) -> Jet:
    sh, ch = np.sinh(a.v), np.cosh(a.v)
    return _lift(ch, sh, ch, a)


def tanh(a: Jet) -> Jet:
    th = np.tanh(a.v)
    sech2 = 1.0 - th**2
    return _lift(th, sech2, -2.0 * th * sech2, a)


_JET_FUNCS = {"exp": exp, "log": log, "sqrt": sqrt, "sinh": sinh, "cosh": cosh, "tanh": tanh}


# ---------------------------------------------------------------- tree nodes


@dataclass(frozen=True)
class Num:
    value: float

    def jet(self, t):
        return Jet.constant(self.value, t)

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True)
class Var:
    def jet(self, t):
        return Jet.variable(t)

    def __str__(self):
        return "t"


@dataclass(frozen=True)
class Neg:
    arg: object

    def jet(self, t):
        return -self.arg.jet(t)

    def __str__(self):
        return f"(-{self.arg})"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object

    def jet(self, t):
        a, b = self.left.jet(t), self.right.jet(t)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            return a / b
        return a**b

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple

    def jet(self, t):
        jets = [a.jet(t) for a in self.args]
        if self.name == "pow":
            return jets[0] ** jets[1]
        return _JET_FUNCS[self.name](jets[0])

    def __str__(self):
        return f"{self.name}({', '.join(map(str, self.args))})"


# ------------------------------------------------------------------- parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)


@dataclass(frozen=True)
class Token:
    kind: str  # 'num', 'name', 'op', 'end'
    text: str
    offset: int


def _byte_offset(src: str, index: int) -> int:
    return len(src[:index].encode("utf-8"))


def tokenize(src: str) -> list[Token]:
    tokens = []
    pos = 0
    while True:
        while pos < len(src) and src[pos].isspace():
            pos += 1
        if pos >= len(src):
            break
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            off = _byte_offset(src, pos)
            raise ExpressionSyntaxError(
                f"syntax error at offset {off}: unexpected character {src[pos]!r}", offset=off
            )
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(kind), _byte_offset(src, m.start(kind))))
        pos = m.end()
    tokens.append(Token("end", "", _byte_offset(src, len(src))))
    return tokens


class Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = tokenize(src)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def _fail(self, expected):
        tok = self.tok
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExpressionSyntaxError(
            f"syntax error at offset {tok.offset}: expected {' or '.join(expected)}, found {found}",
            offset=tok.offset,
            expected=list(expected),
        )

    def _accept(self, *ops):
        if self.tok.kind == "op" and self.tok.text in ops:
            tok = self.tok
            self.i += 1
            return tok
        return None

    def _expect(self, op):
        if self._accept(op) is None:
            self._fail([repr(op)])

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            self._fail(["operator", "end of input"])
        return node

    def expr(self):
        node = self.term()
        while (tok := self._accept("+", "-")) is not None:
            node = BinOp(tok.text, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while (tok := self._accept("*", "/")) is not None:
            node = BinOp(tok.text, node, self.unary())
        return node

    def unary(self):
        if (tok := self._accept("+", "-")) is not None:
            arg = self.unary()
            return Neg(arg) if tok.text == "-" else arg
        return self.power()

    def power(self):
        base = self.primary()
        if self._accept("^") is not None:
            return BinOp("^", base, self.unary())
        return base

    def primary(self):
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Num(float(tok.text))
        if tok.kind == "name":
            self.i += 1
            if tok.text == "t":
                return Var()
            if tok.text not in FUNCTIONS:
                raise UnknownIdentifierError(
                    f"unknown identifier {tok.text!r} at offset {tok.offset}",
                    offset=tok.offset,
                    identifier=tok.text,
                )
            self._expect("(")
            args = [self.expr()]
            while self._accept(",") is not None:
                args.append(self.expr())
            self._expect(")")
            if len(args) != FUNCTIONS[tok.text]:
                raise ExpressionSyntaxError(
                    f"{tok.text} takes {FUNCTIONS[tok.text]} argument(s), got {len(args)}"
                    f" at offset {tok.offset}",
                    offset=tok.offset,
                )
            return Call(tok.text, tuple(args))
        if self._accept("(") is not None:
            node = self.expr()
            self._expect(")")
            return node
        self._fail(["number", "'t'", "function name", "'('"])


def parse(src: str):
    """Parse ``src`` into an expression tree, raising ExpressionSyntaxError on failure."""
    return Parser(src).parse()


def evaluate(tree, t):
    """Return ``(value, first derivative, second derivative)`` of ``tree`` at ``t``."""
    arr = np.asarray(t, dtype=float)
    j = tree.jet(arr)
    out = []
    for c in (j.v, j.d1, j.d2):
        c = np.broadcast_to(np.asarray(c, dtype=float), arr.shape)
        out.append(float(c) if arr.ndim == 0 else np.array(c))
    return tuple(out)
