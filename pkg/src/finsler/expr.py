"""A small expression language for energy functions.

Grammar (whitespace and newlines are insignificant)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" unary)?          right associative
    atom   := NUMBER | COORD | "sqrt" "(" expr ")" | "(" expr ")"
    COORD  := "x" INDEX | "y" INDEX      1-based, INDEX <= n

``^`` binds tighter than unary minus, so ``-y1^2`` is ``-(y1^2)``.
Exponents must be constant.  Evaluation runs over the generic arithmetic of
:mod:`finsler.jets`, so the same AST serves floats and Taylor jets.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from . import jets
from .errors import DimensionMismatch, ParseError, UnknownIdentifier
from .jets import ScalarField


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Coord:
    kind: str  # "x" or "y"
    index: int  # 1-based


@dataclass(frozen=True)
class Neg:
    arg: Node


@dataclass(frozen=True)
class BinOp:
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Pow:
    base: Node
    exponent: Node


@dataclass(frozen=True)
class Sqrt:
    arg: Node


Node = Union[Num, Coord, Neg, BinOp, Pow, Sqrt]
ExprAST = Node

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # num, name, op, end
    text: str
    line: int
    column: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1,
                             {"number", "identifier", "operator"})
        kind = m.lastgroup
        text = m.group()
        if kind == "ws":
            for k, ch in enumerate(text):
                if ch == "\n":
                    line += 1
                    line_start = pos + k + 1
        else:
            tokens.append(Token(kind, text, line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("end", "", line, pos - line_start + 1))
    return tokens


_ATOM_START = {"number", "coordinate", "sqrt", "(", "-", "+"}


class _Parser:
    def __init__(self, source: str, n: int | None):
        self.tokens = tokenize(source)
        self.pos = 0
        self.n = n

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def fail(self, message: str, expected) -> ParseError:
        t = self.tok
        return ParseError(message, t.line, t.column, expected)

    def expect(self, text: str, expected=None) -> Token:
        if self.tok.text != text or self.tok.kind == "end":
            found = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
            raise self.fail(f"expected {text!r}, found {found}", expected or {text})
        t = self.tok
        self.pos += 1
        return t

    def parse(self) -> Node:
        if self.tok.kind == "end":
            raise self.fail("empty expression", _ATOM_START)
        node = self.expr()
        if self.tok.kind != "end":
            raise self.fail(f"unexpected {self.tok.text!r}", {"+", "-", "*", "/", "^", "end of input"})
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.pos += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.pos += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.pos += 1
            return Neg(self.unary())
        if self.tok.kind == "op" and self.tok.text == "+":
            self.pos += 1
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            t = self.tok
            self.pos += 1
            exponent = self.unary()
            if not is_constant(exponent):
                raise ParseError("exponent must be constant", t.line, t.column + 1, {"number"})
            return Pow(base, exponent)
        return base

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self.pos += 1
            return Num(float(t.text))
        if t.kind == "name":
            self.pos += 1
            if t.text == "sqrt":
                self.expect("(")
                arg = self.expr()
                self.expect(")", {")", "+", "-", "*", "/", "^"})
                return Sqrt(arg)
            m = re.fullmatch(r"([xy])([1-9]\d*)", t.text)
            if m is None:
                raise UnknownIdentifier(f"unknown identifier {t.text!r}", t.line, t.column,
                                        {"x<i>", "y<i>", "sqrt"})
            index = int(m.group(2))
            if self.n is not None and index > self.n:
                raise DimensionMismatch(f"{t.text} exceeds dimension {self.n}", t.line, t.column,
                                        {f"{m.group(1)}1..{m.group(1)}{self.n}"})
            return Coord(m.group(1), index)
        if t.kind == "op" and t.text == "(":
            self.pos += 1
            node = self.expr()
            self.expect(")", {")", "+", "-", "*", "/", "^"})
            return node
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise self.fail(f"unexpected {found}", _ATOM_START)


def is_constant(node: Node) -> bool:
    if isinstance(node, Num):
        return True
    if isinstance(node, Coord):
        return False
    if isinstance(node, (Neg, Sqrt)):
        return is_constant(node.arg)
    if isinstance(node, BinOp):
        return is_constant(node.left) and is_constant(node.right)
    return is_constant(node.base) and is_constant(node.exponent)


def max_index(node: Node) -> int:
    if isinstance(node, Coord):
        return node.index
    if isinstance(node, Num):
        return 0
    if isinstance(node, (Neg, Sqrt)):
        return max_index(node.arg)
    if isinstance(node, BinOp):
        return max(max_index(node.left), max_index(node.right))
    return max(max_index(node.base), max_index(node.exponent))


def parse_energy(source: str, n: int | None = None) -> ExprAST:
    """Parse ``source``; with ``n`` given, coordinate indices above n are rejected."""
    if not source or not source.strip():
        raise ParseError("empty expression", 1, 1, _ATOM_START)
    return _Parser(source, n).parse()


def infer_dimension(node: Node) -> int:
    return max(2, max_index(node))


def evaluate(node: Node, xs, ys):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Coord):
        return (xs if node.kind == "x" else ys)[node.index - 1]
    if isinstance(node, Neg):
        return -evaluate(node.arg, xs, ys)
    if isinstance(node, Sqrt):
        return jets.sqrt(evaluate(node.arg, xs, ys))
    if isinstance(node, Pow):
        exponent = evaluate(node.exponent, xs, ys)
        return jets.power(evaluate(node.base, xs, ys), exponent)
    left, right = evaluate(node.left, xs, ys), evaluate(node.right, xs, ys)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    return left / right


def energy_field(node: Node, n: int | None = None, name: str | None = None) -> ScalarField:
    dim = n if n is not None else infer_dimension(node)
    if max_index(node) > dim:
        raise DimensionMismatch(f"expression uses index {max_index(node)} > dimension {dim}")
    label = name or f"expr:{pretty(node)}"
    return ScalarField(lambda xs, ys: evaluate(node, xs, ys), dim, label)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def pretty(node: Node) -> str:
    """Source text that parses back to an identical tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Coord):
        return f"{node.kind}{node.index}"
    if isinstance(node, Sqrt):
        return f"sqrt({pretty(node.arg)})"
    if isinstance(node, Neg):
        inner = pretty(node.arg)
        if isinstance(node.arg, BinOp):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Pow):
        base = pretty(node.base)
        if not isinstance(node.base, (Num, Coord, Sqrt)):
            base = f"({base})"
        exponent = pretty(node.exponent)
        if isinstance(node.exponent, (BinOp, Pow)):
            exponent = f"({exponent})"
        return f"{base}^{exponent}"
    prec = _PREC[node.op]
    left = pretty(node.left)
    if isinstance(node.left, BinOp) and _PREC[node.left.op] < prec:
        left = f"({left})"
    right = pretty(node.right)
    if isinstance(node.right, BinOp) and _PREC[node.right.op] <= prec:
        right = f"({right})"
    return f"{left} {node.op} {right}"
