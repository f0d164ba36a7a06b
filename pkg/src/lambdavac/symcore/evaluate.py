"""Double-precision evaluation of expression DAGs.

Expressions are compiled once into a flat instruction list (children
before parents, shared subtrees evaluated once) and then run over numpy
arrays.  A point is *undefined* exactly when some node of the DAG produces
a non-finite value there; scalar evaluation turns that into a
:class:`DomainPointError` naming the first offending node.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .expr import Add, Cos, Expr, Mul, Num, Pow, Sin, Sym


class UnboundSymbolError(KeyError):
    """A free symbol of the expression has no value in the binding."""

    def __init__(self, names):
        self.names = tuple(sorted(names))
        super().__init__(f"unbound symbol(s): {', '.join(self.names)}")


class DomainPointError(ArithmeticError):
    """Evaluation hit a pole or left the real domain."""

    def __init__(self, expr: Expr, binding: Mapping | None = None):
        from .printer import serialize

        self.expr = expr
        self.binding = dict(binding or {})
        super().__init__(f"non-finite value at subexpression {serialize(expr)}")


_NUM, _SYM, _ADD, _MUL, _POW, _SIN, _COS = range(7)
_QUADRANT = np.array([0.0, 1.0, 0.0, -1.0])
_EPS4 = 4 * np.finfo(float).eps


def _trig(u: np.ndarray, shift: int) -> np.ndarray:
    """sin (shift 0) or cos (shift 1), exact at multiples of pi/2 up to
    rounding so that poles such as ``1/cos(pi/2)`` are seen as poles."""
    v = np.cos(u) if shift else np.sin(u)
    with np.errstate(invalid="ignore"):
        q = u / (np.pi / 2)
        k = np.rint(q)
        near = np.abs(q - k) <= _EPS4 * np.maximum(1.0, np.abs(q))
    if near.any():
        idx = (k[near].astype(np.int64) + shift) % 4
        v = np.array(v, dtype=float, copy=True)
        v[near] = _QUADRANT[idx]
    return v

CHUNK = 8192


class Program:
    """Flat, reusable evaluation plan for one expression."""

    def __init__(self, root: Expr):
        order: list = []
        index: dict = {}
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if node in index:
                continue
            if expanded or isinstance(node, (Num, Sym)):
                index[node] = len(order)
                order.append(node)
                continue
            stack.append((node, True))
            for c in reversed(node.args):
                if c not in index:
                    stack.append((c, False))
        ops = []
        for node in order:
            if isinstance(node, Num):
                ops.append((_NUM, float(node.value), ()))
            elif isinstance(node, Sym):
                ops.append((_SYM, node.name, ()))
            elif isinstance(node, Add):
                ops.append((_ADD, None, tuple(index[c] for c in node.args)))
            elif isinstance(node, Mul):
                ops.append((_MUL, None, tuple(index[c] for c in node.args)))
            elif isinstance(node, Pow):
                ops.append((_POW, float(node.exponent.value), (index[node.base],)))
            elif isinstance(node, Sin):
                ops.append((_SIN, None, (index[node.arg],)))
            elif isinstance(node, Cos):
                ops.append((_COS, None, (index[node.arg],)))
            else:  # pragma: no cover
                raise TypeError(type(node))
        last_use = list(range(len(ops)))
        for i, (_, _, ch) in enumerate(ops):
            for c in ch:
                last_use[c] = i
        self.nodes = order
        self.ops = ops
        self.last_use = last_use
        self.symbols = frozenset(root.free_symbols)

    def run(self, env: Mapping[str, np.ndarray], n: int, magnitude: bool = False):
        """Evaluate over ``n`` points; returns (values, first_bad_op, magnitude)."""
        vals: list = [None] * len(self.ops)
        first_bad = np.full(n, -1, dtype=np.int64)
        mag = np.zeros(n) if magnitude else None
        last_use = self.last_use
        with np.errstate(all="ignore"):
            for i, (kind, p, ch) in enumerate(self.ops):
                if kind == _NUM:
                    v = np.full(n, p)
                elif kind == _SYM:
                    v = env[p]
                elif kind == _ADD:
                    v = vals[ch[0]] + vals[ch[1]]
                    for c in ch[2:]:
                        v = v + vals[c]
                    if magnitude:
                        for c in ch:
                            np.maximum(mag, np.abs(vals[c]), out=mag)
                elif kind == _MUL:
                    v = vals[ch[0]] * vals[ch[1]]
                    for c in ch[2:]:
                        v = v * vals[c]
                elif kind == _POW:
                    b = vals[ch[0]]
                    if p == 2.0:
                        v = b * b
                    elif p == -1.0:
                        v = 1.0 / b
                    else:
                        v = np.power(b, p)
                elif kind == _SIN:
                    v = _trig(vals[ch[0]], 0)
                else:
                    v = _trig(vals[ch[0]], 1)
                if kind > _SYM:
                    bad = ~np.isfinite(v)
                    if bad.any():
                        first_bad[bad & (first_bad < 0)] = i
                vals[i] = v
                for c in ch:
                    if last_use[c] == i:
                        vals[c] = None
        out = vals[-1]
        if magnitude:
            np.maximum(mag, np.abs(out), out=mag)
        return out, first_bad, mag


_PROGRAMS: "weakref.WeakKeyDictionary[Expr, Program]" = weakref.WeakKeyDictionary()


def compile_expr(e: Expr) -> Program:
    prog = _PROGRAMS.get(e)
    if prog is None:
        prog = Program(e)
        _PROGRAMS[e] = prog
    return prog


@dataclass
class ArrayResult:
    values: np.ndarray  # nan where undefined
    valid: np.ndarray  # bool
    magnitude: np.ndarray | None = None


def evaluate_array(e: Expr, binding: Mapping[str, object], magnitude: bool = False) -> ArrayResult:
    """Evaluate at many points at once.

    Values in ``binding`` may be scalars or arrays of a common shape; the
    result has that shape.  Undefined points hold ``nan`` and are ``False``
    in ``valid``.
    """
    prog = compile_expr(e)
    missing = prog.symbols - set(binding)
    if missing:
        raise UnboundSymbolError(missing)
    arrays = {k: np.asarray(binding[k], dtype=float) for k in prog.symbols}
    shape = np.broadcast_shapes(*(a.shape for a in arrays.values())) if arrays else ()
    flat = {k: np.broadcast_to(a, shape).reshape(-1) for k, a in arrays.items()}
    total = int(np.prod(shape)) if shape else 1
    values = np.empty(total)
    valid = np.empty(total, dtype=bool)
    mags = np.empty(total) if magnitude else None
    for lo in range(0, total, CHUNK):
        hi = min(total, lo + CHUNK)
        env = {k: a[lo:hi] for k, a in flat.items()}
        out, first_bad, mag = prog.run(env, hi - lo, magnitude)
        ok = first_bad < 0
        values[lo:hi] = np.where(ok, out, np.nan)
        valid[lo:hi] = ok
        if magnitude:
            mags[lo:hi] = mag
    result = ArrayResult(values.reshape(shape), valid.reshape(shape))
    if magnitude:
        result.magnitude = mags.reshape(shape)
    return result


def evaluate(e: Expr, binding: Mapping[str, float]) -> float:
    """Evaluate at one point; raises on unbound symbols and domain points."""
    prog = compile_expr(e)
    missing = prog.symbols - set(binding)
    if missing:
        raise UnboundSymbolError(missing)
    env = {k: np.asarray([float(binding[k])]) for k in prog.symbols}
    out, first_bad, _ = prog.run(env, 1)
    if first_bad[0] >= 0:
        raise DomainPointError(prog.nodes[first_bad[0]], binding)
    return float(out[0])
