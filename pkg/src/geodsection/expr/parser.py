"""Recursive-descent parser for defining functions.

Grammar (EBNF)::

    expression = term { ("+" | "-") term } ;
    term       = unary { ("*" | "/") unary } ;
    unary      = ("-" | "+") unary | power ;
    power      = primary [ ("^" | "**") exponent ] ;
    exponent   = ("-" | "+") exponent | primary [ ("^" | "**") exponent ] ;
    primary    = number | constant | variable
               | function "(" expression ")" | "(" expression ")" ;
    function   = "sin" | "cos" | "exp" | "log" | "sqrt" ;
    constant   = "pi" | "e" ;
    number     = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
               | "." digits [ ("e" | "E") [ "+" | "-" ] digits ] ;

Binary operators are left-associative, ``^`` is right-associative and binds
tighter than unary minus, so ``-x0^2`` is ``-(x0^2)``.  Exponents must be
constant expressions.
"""

from __future__ import annotations

import math
import re
from typing import Sequence

from ..errors import DimensionMismatch, ExpressionSyntaxError, NonSmoothFunction, UnknownIdentifier
from .nodes import UNARY_FUNCTIONS, Binary, Const, ExpressionAst, Node, Pow, Unary, Var, iter_nodes

MAX_DIMENSION = 16

NON_SMOOTH = frozenset(
    {"abs", "sign", "sgn", "floor", "ceil", "round", "min", "max", "mod", "heaviside", "step", "frac"}
)
CONSTANTS = {"pi": math.pi, "e": math.e}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),])
    """,
    re.VERBOSE,
)
_XVAR = re.compile(r"x(\d+)\Z")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group(kind)
            tokens.append((kind, "^" if value == "**" else value, pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, dimension: int, variables: Sequence[str] | None):
        self.text = text
        self.dimension = dimension
        self.named = {name: i for i, name in enumerate(variables)} if variables else None
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        kind, v, pos = self.tok
        if v != value or kind != "op":
            found = "end of input" if kind == "end" else repr(v)
            raise ExpressionSyntaxError(f"expected {value!r}, found {found}", self.text, pos)
        self.advance()

    def parse(self) -> Node:
        node = self.expression()
        kind, v, pos = self.tok
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {v!r}", self.text, pos)
        return node

    def expression(self) -> Node:
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.advance()[1]
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            arg = self.unary()
            return Unary("neg", arg) if op == "-" else arg
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.advance()
            pos = self.tok[2]
            return Pow(base, self._constant_exponent(self.exponent(), pos))
        return base

    def exponent(self) -> Node:
        if self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            arg = self.exponent()
            return Unary("neg", arg) if op == "-" else arg
        return self.power()

    def _constant_exponent(self, node: Node, pos: int) -> float:
        if any(isinstance(n, Var) for n in iter_nodes(node)):
            raise ExpressionSyntaxError("exponent must be a constant", self.text, pos)
        from .jet import evaluate_constant

        return evaluate_constant(node)

    def primary(self) -> Node:
        kind, value, pos = self.tok
        if kind == "number":
            self.advance()
            return Const(float(value))
        if kind == "op" and value == "(":
            self.advance()
            node = self.expression()
            self.expect(")")
            return node
        if kind == "name":
            self.advance()
            return self._name(value, pos)
        found = "end of input" if kind == "end" else repr(value)
        raise ExpressionSyntaxError(f"expected a number, name or '(', found {found}", self.text, pos)

    def _name(self, name: str, pos: int) -> Node:
        lname = name.lower()
        if lname in NON_SMOOTH:
            raise NonSmoothFunction(f"{name!r} at column {pos + 1} is not C2; defining functions must be smooth")
        if name in UNARY_FUNCTIONS:
            self.expect("(")
            arg = self.expression()
            self.expect(")")
            return Unary(name, arg)
        if self.tok[1] == "(" and self.tok[0] == "op":
            raise UnknownIdentifier(f"unknown function {name!r} at column {pos + 1}")
        if self.named is not None:
            if name in self.named:
                return Var(self.named[name])
        else:
            m = _XVAR.match(name)
            if m:
                index = int(m.group(1))
                if index >= self.dimension:
                    raise DimensionMismatch(
                        f"variable {name!r} at column {pos + 1} needs dimension > {index}, "
                        f"declared {self.dimension}"
                    )
                return Var(index)
        if name in CONSTANTS:
            return Const(CONSTANTS[name])
        raise UnknownIdentifier(f"unknown identifier {name!r} at column {pos + 1}")


def parse_expression(text: str, dimension: int, variables: Sequence[str] | None = None) -> ExpressionAst:
    """Parse ``text`` into an :class:`ExpressionAst`.

    Variables are ``x0 .. x{dimension-1}`` unless ``variables`` names them
    explicitly (the profile of a surface of revolution uses ``("phi",)``).
    """
    if variables is not None:
        variables = tuple(variables)
        dimension = len(variables)
    if not 1 <= dimension <= MAX_DIMENSION:
        raise DimensionMismatch(f"dimension must be in 1..{MAX_DIMENSION}, got {dimension}")
    root = _Parser(text, dimension, variables).parse()
    names = variables or tuple(f"x{i}" for i in range(dimension))
    return ExpressionAst(root, dimension, names, text)
