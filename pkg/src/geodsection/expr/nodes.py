"""Immutable expression tree for smooth defining functions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

UNARY_FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")
BINARY_OPS = ("+", "-", "*", "/")


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Unary:
    """``op`` is ``"neg"`` or one of :data:`UNARY_FUNCTIONS`."""

    op: str
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    """Power with a constant real exponent."""

    base: "Node"
    exponent: float


Node = Union[Const, Var, Unary, Binary, Pow]


@dataclass(frozen=True)
class ExpressionAst:
    """A parsed defining function of ``dimension`` real variables."""

    root: Node
    dimension: int
    variables: tuple[str, ...]
    text: str = ""

    def __post_init__(self):
        for v in iter_nodes(self.root):
            if isinstance(v, Var) and not 0 <= v.index < self.dimension:
                raise ValueError(f"variable index {v.index} outside dimension {self.dimension}")

    def __str__(self) -> str:
        return to_text(self.root, self.variables)

    def used_variables(self) -> set[int]:
        return {v.index for v in iter_nodes(self.root) if isinstance(v, Var)}


def iter_nodes(node: Node):
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        if isinstance(n, Unary):
            stack.append(n.arg)
        elif isinstance(n, Binary):
            stack.extend((n.left, n.right))
        elif isinstance(n, Pow):
            stack.append(n.base)


# binding strength used by the printer; mirrors the parser's precedence
_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(node: Node) -> int:
    if isinstance(node, Binary):
        return _PREC_ADD if node.op in "+-" else _PREC_MUL
    if isinstance(node, Unary) and node.op == "neg":
        return _PREC_NEG
    if isinstance(node, Pow):
        return _PREC_POW
    if isinstance(node, Const) and (node.value < 0 or _number(node.value).startswith("-")):
        return _PREC_NEG
    return _PREC_ATOM


def _number(value: float) -> str:
    text = repr(float(value))
    if text in ("inf", "-inf", "nan"):
        raise ValueError(f"cannot print non-finite constant {text}")
    return text


def to_text(node: Node, variables: Sequence[str]) -> str:
    """Print ``node`` so that parsing the result gives back the same function.

    Constants are printed with ``repr`` so round trips are exact.
    """

    def wrap(child: Node, min_prec: int) -> str:
        s = to_text(child, variables)
        return f"({s})" if _prec(child) < min_prec else s

    if isinstance(node, Const):
        return _number(node.value)
    if isinstance(node, Var):
        return variables[node.index]
    if isinstance(node, Unary):
        if node.op == "neg":
            return "-" + wrap(node.arg, _PREC_NEG)
        return f"{node.op}({to_text(node.arg, variables)})"
    if isinstance(node, Pow):
        exp = _number(node.exponent)
        if exp.startswith("-"):
            exp = f"({exp})"
        return f"{wrap(node.base, _PREC_ATOM)}^{exp}"
    # left-associative: the right operand needs strictly higher binding
    prec = _prec(node)
    return f"{wrap(node.left, prec)} {node.op} {wrap(node.right, prec + 1)}"
