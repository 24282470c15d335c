"""Defining-function expressions: parsing and exact second-order jets."""

from .jet import JetValue, evaluate, jet_eval, jet_eval_batch
from .nodes import Binary, Const, ExpressionAst, Pow, Unary, Var, to_text
from .parser import MAX_DIMENSION, parse_expression

__all__ = [
    "Binary",
    "Const",
    "ExpressionAst",
    "JetValue",
    "MAX_DIMENSION",
    "Pow",
    "Unary",
    "Var",
    "evaluate",
    "jet_eval",
    "jet_eval_batch",
    "parse_expression",
    "to_text",
]
