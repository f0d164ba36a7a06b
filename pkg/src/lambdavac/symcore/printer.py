"""Canonical text form of expressions.

The output is accepted by :func:`lambdavac.metriclang.parse_expression` and
parses back to the same tree (numbers, chains and parentheses are emitted
so that no re-association happens on the way in).
"""

from __future__ import annotations

import math
from fractions import Fraction

from .expr import Add, Cos, Expr, Mul, Num, Pow, Sin, Sym

_PREC = {Add: 1, Mul: 2, Pow: 3}


def _num(v, wrap_negative: bool) -> str:
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        return f"({v.numerator}/{v.denominator})"
    if v == math.pi:
        return "pi"
    if not math.isfinite(v):
        raise ValueError(f"cannot serialize non-finite constant {v!r}")
    text = repr(v)
    return f"({text})" if wrap_negative and v < 0 else text


def serialize(e: Expr) -> str:
    out: dict = {}

    def go(n: Expr) -> str:
        s = out.get(n)
        if s is not None:
            return s
        if isinstance(n, Num):
            s = _num(n.value, wrap_negative=False)
        elif isinstance(n, Sym):
            s = n.name
        elif isinstance(n, Sin):
            s = f"sin({go(n.arg)})"
        elif isinstance(n, Cos):
            s = f"cos({go(n.arg)})"
        elif isinstance(n, Add):
            s = " + ".join(child(c, Add) for c in n.args)
        elif isinstance(n, Mul):
            s = "*".join(child(c, Mul) for c in n.args)
        else:
            base = n.base
            b = go(base)
            if isinstance(base, (Add, Mul, Pow)) or (isinstance(base, Num) and not b.startswith("(") and base.value < 0):
                b = f"({b})"
            x = _num(n.exponent.value, wrap_negative=True)
            if not x.startswith("(") and n.exponent.value < 0:
                x = f"({x})"
            s = f"{b}^{x}"
        out[n] = s
        return s

    def child(c: Expr, parent) -> str:
        # same-kind and lower-precedence children are grouped explicitly
        if isinstance(c, (Add, Mul)) and _PREC[type(c)] <= _PREC[parent]:
            return f"({go(c)})"
        return go(c)

    return go(e)
