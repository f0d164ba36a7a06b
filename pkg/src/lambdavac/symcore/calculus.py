"""Exact differentiation and substitution on expression trees."""

from __future__ import annotations

from typing import Mapping

from .expr import (
    NEG_ONE,
    ONE,
    ZERO,
    Add,
    Cos,
    Expr,
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
    sin,
)


def _name(v) -> str:
    return v.name if isinstance(v, Sym) else v


def differentiate(e: Expr, v) -> Expr:
    """Partial derivative of ``e`` with respect to the symbol ``v``."""
    var = _name(v)
    memo: dict = {}

    def d(n: Expr) -> Expr:
        if var not in n.free_symbols:
            return ZERO
        r = memo.get(n)
        if r is not None:
            return r
        if isinstance(n, Sym):
            r = ONE
        elif isinstance(n, Add):
            r = add(*(d(a) for a in n.args))
        elif isinstance(n, Mul):
            terms = []
            fs = n.args
            for i, f in enumerate(fs):
                df = d(f)
                if df is ZERO:
                    continue
                terms.append(mul(*fs[:i], df, *fs[i + 1 :]))
            r = add(*terms)
        elif isinstance(n, Pow):
            ev = n.exponent.value
            r = mul(Num(ev), power(n.base, Num(ev - 1)), d(n.base))
        elif isinstance(n, Sin):
            r = mul(cos(n.arg), d(n.arg))
        elif isinstance(n, Cos):
            r = mul(NEG_ONE, sin(n.arg), d(n.arg))
        else:  # pragma: no cover - Num has no free symbols
            r = ZERO
        memo[n] = r
        return r

    return d(e)


def substitute(e: Expr, v, replacement) -> Expr:
    """Replace every occurrence of symbol ``v`` by ``replacement``."""
    return substitute_many(e, {_name(v): as_expr(replacement)})


def substitute_many(e: Expr, mapping: Mapping) -> Expr:
    """Simultaneous substitution ``{name: expression}``."""
    table = {_name(k): as_expr(r) for k, r in mapping.items()}
    if not table:
        return e
    keys = frozenset(table)
    memo: dict = {}

    def go(n: Expr) -> Expr:
        if not (n.free_symbols & keys):
            return n
        r = memo.get(n)
        if r is not None:
            return r
        if isinstance(n, Sym):
            r = table[n.name]
        elif isinstance(n, Add):
            r = add(*(go(a) for a in n.args))
        elif isinstance(n, Mul):
            r = mul(*(go(a) for a in n.args))
        elif isinstance(n, Pow):
            r = power(go(n.base), n.exponent)
        elif isinstance(n, Sin):
            r = sin(go(n.arg))
        else:
            r = cos(go(n.arg))
        memo[n] = r
        return r

    return go(e)
