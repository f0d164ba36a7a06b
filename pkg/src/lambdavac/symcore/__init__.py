"""Symbolic core: expression trees, calculus, evaluation and identity tests."""

from .calculus import differentiate, substitute, substitute_many
from .evaluate import (
    ArrayResult,
    DomainPointError,
    UnboundSymbolError,
    evaluate,
    evaluate_array,
)
from .expr import (
    Add,
    Cos,
    Expr,
    ExpressionError,
    Mul,
    Num,
    Pow,
    Sin,
    Sym,
    add,
    as_expr,
    cos,
    mul,
    power,
    rebuild,
    sin,
    sqrt,
    symbols,
)
from .printer import serialize
from .rational import Rat, canonical, simplify, to_rat
from .zerotest import InconclusiveError, prob_zero_test, sample_points

__all__ = [
    "Add",
    "ArrayResult",
    "Cos",
    "DomainPointError",
    "Expr",
    "ExpressionError",
    "InconclusiveError",
    "Mul",
    "Num",
    "Pow",
    "Rat",
    "Sin",
    "Sym",
    "UnboundSymbolError",
    "add",
    "as_expr",
    "canonical",
    "cos",
    "differentiate",
    "evaluate",
    "evaluate_array",
    "mul",
    "power",
    "prob_zero_test",
    "rebuild",
    "sample_points",
    "serialize",
    "simplify",
    "sin",
    "sqrt",
    "substitute",
    "substitute_many",
    "symbols",
    "to_rat",
]
