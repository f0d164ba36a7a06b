"""Immutable, interned expression trees over named real variables.

Every node is hash-consed: two structurally equal trees are the same
Python object, so ``==`` is an identity check and trees can be used as
dictionary keys at no cost.  Nodes never change after construction.

The node classes (``Num``, ``Sym``, ``Add``, ``Mul``, ``Pow``, ``Sin``,
``Cos``) build trees *verbatim*.  The lower-case builders ``add``, ``mul``,
``power``, ``sin`` and ``cos`` apply cheap local rewrites (flattening,
constant folding, 0/1 identities, collection of like terms and like
bases) and are what the arithmetic operators use.
"""

from __future__ import annotations

import math
import sys
import threading
import weakref
from fractions import Fraction
from typing import Iterable, Union

Number = Union[Fraction, float]

_INT64 = 2**63


class ExpressionError(ValueError):
    """Raised for malformed trees (wrong arity, non-constant exponents)."""


def _normalize_number(value) -> Number:
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, int):
        value = Fraction(value)
    if isinstance(value, Fraction):
        # exact only while both parts fit in 64 bits
        if abs(value.numerator) >= _INT64 or value.denominator >= _INT64:
            return float(value)
        return value
    if isinstance(value, float):
        return value
    raise TypeError(f"not a number: {value!r}")


def is_integral(v: Number) -> bool:
    if isinstance(v, Fraction):
        return v.denominator == 1
    return math.isfinite(v) and float(v).is_integer()


_TABLE: "weakref.WeakValueDictionary[tuple, Expr]" = weakref.WeakValueDictionary()
_LOCK = threading.Lock()


def _intern(cls, args: tuple, key: tuple | None = None):
    if key is None:
        key = (cls, args)
    with _LOCK:
        node = _TABLE.get(key)
        if node is None:
            node = object.__new__(cls)
            node.args = args
            node._hash = hash(key)
            node._key = None
            node._free = None
            _TABLE[key] = node
    return node


class Expr:
    __slots__ = ("args", "_hash", "_key", "_free", "__weakref__")

    def __eq__(self, other):
        return self is other

    def __ne__(self, other):
        return self is not other

    def __hash__(self):
        return self._hash

    def __reduce__(self):
        return (type(self), self.args)

    # -- structure ---------------------------------------------------------

    @property
    def free_symbols(self) -> frozenset:
        if self._free is None:
            out = frozenset()
            for a in self.args:
                out |= a.free_symbols
            self._free = out
        return self._free

    @property
    def sort_key(self) -> tuple:
        if self._key is None:
            self._key = self._make_key()
        return self._key

    def _make_key(self) -> tuple:  # pragma: no cover - overridden
        raise NotImplementedError

    def count_nodes(self) -> int:
        """Number of distinct nodes in the DAG rooted here."""
        seen = set()
        stack = [self]
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            if not isinstance(n, (Num, Sym)):
                stack.extend(n.args)
        return len(seen)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, mul(NEG_ONE, as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), mul(NEG_ONE, self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), NEG_ONE))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, NEG_ONE))

    def __neg__(self):
        return mul(NEG_ONE, self)

    def __pos__(self):
        return self

    def __pow__(self, exponent):
        return power(self, as_expr(exponent))

    def __repr__(self):
        from .printer import serialize

        return f"<{type(self).__name__} {serialize(self)}>"

    def __str__(self):
        from .printer import serialize

        return serialize(self)


class Num(Expr):
    """A rational constant, or a double when it cannot be held exactly."""

    __slots__ = ()

    def __new__(cls, value):
        v = _normalize_number(value)
        return _intern(cls, (v,), (cls, type(v), v))

    @property
    def value(self) -> Number:
        return self.args[0]

    @property
    def free_symbols(self) -> frozenset:
        return frozenset()

    def _make_key(self):
        v = self.args[0]
        return (0, float(v), 0 if isinstance(v, Fraction) else 1)


class Sym(Expr):
    __slots__ = ()

    def __new__(cls, name: str):
        if not isinstance(name, str) or not name:
            raise ExpressionError(f"bad symbol name {name!r}")
        return _intern(cls, (name,))

    @property
    def name(self) -> str:
        return self.args[0]

    @property
    def free_symbols(self) -> frozenset:
        if self._free is None:
            self._free = frozenset((self.args[0],))
        return self._free

    def _make_key(self):
        return (1, self.args[0])


class Add(Expr):
    __slots__ = ()

    def __new__(cls, *terms):
        terms = tuple(as_expr(t) for t in terms)
        if len(terms) < 2:
            raise ExpressionError("a sum needs at least two terms")
        return _intern(cls, terms)

    def _make_key(self):
        return (7, tuple(a.sort_key for a in self.args))


class Mul(Expr):
    __slots__ = ()

    def __new__(cls, *factors):
        factors = tuple(as_expr(f) for f in factors)
        if len(factors) < 2:
            raise ExpressionError("a product needs at least two factors")
        return _intern(cls, factors)

    def _make_key(self):
        return (6, tuple(a.sort_key for a in self.args))


class Pow(Expr):
    __slots__ = ()

    def __new__(cls, base, exponent):
        base = as_expr(base)
        exponent = as_expr(exponent)
        if not isinstance(exponent, Num):
            raise ExpressionError("exponents must be numeric constants")
        return _intern(cls, (base, exponent))

    @property
    def base(self) -> Expr:
        return self.args[0]

    @property
    def exponent(self) -> Num:
        return self.args[1]

    def _make_key(self):
        return (5, self.args[0].sort_key, self.args[1].sort_key)


class Sin(Expr):
    __slots__ = ()

    def __new__(cls, arg):
        return _intern(cls, (as_expr(arg),))

    @property
    def arg(self) -> Expr:
        return self.args[0]

    def _make_key(self):
        return (3, self.args[0].sort_key)


class Cos(Expr):
    __slots__ = ()

    def __new__(cls, arg):
        return _intern(cls, (as_expr(arg),))

    @property
    def arg(self) -> Expr:
        return self.args[0]

    def _make_key(self):
        return (4, self.args[0].sort_key)


ZERO = Num(0)
ONE = Num(1)
NEG_ONE = Num(-1)
TWO = Num(2)
HALF = Num(Fraction(1, 2))


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction, float)) and not isinstance(value, bool):
        return Num(value)
    raise TypeError(f"cannot convert {value!r} to an expression")


def symbols(names: str) -> tuple:
    """``symbols("t x y z")`` -> tuple of ``Sym``."""
    return tuple(Sym(n) for n in names.replace(",", " ").split())


# ---------------------------------------------------------------------------
# light-weight canonicalizing builders
# ---------------------------------------------------------------------------


def _split_coeff(term: Expr):
    if isinstance(term, Mul) and isinstance(term.args[0], Num):
        rest = term.args[1:]
        return term.args[0].value, rest[0] if len(rest) == 1 else Mul(*rest)
    return Fraction(1), term


def _with_coeff(c: Number, rest: Expr) -> Expr:
    if c == 1:
        return rest
    if isinstance(rest, Mul):
        return Mul(Num(c), *rest.args)
    return Mul(Num(c), rest)


def _flatten(items: Iterable[Expr], cls) -> list:
    out = []
    for it in items:
        it = as_expr(it)
        if isinstance(it, cls):
            out.extend(it.args)
        else:
            out.append(it)
    return out


def add(*terms) -> Expr:
    const: Number = Fraction(0)
    coeffs: dict = {}
    for term in _flatten(terms, Add):
        if isinstance(term, Num):
            const = const + term.value
            continue
        c, rest = _split_coeff(term)
        coeffs[rest] = coeffs.get(rest, 0) + c
    out = [_with_coeff(c, rest) for rest, c in coeffs.items() if c != 0]
    out.sort(key=lambda e: e.sort_key)
    if const != 0:
        out.insert(0, Num(const))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return Add(*out)


def mul(*factors) -> Expr:
    coeff: Number = Fraction(1)
    bases: dict = {}
    for f in _flatten(factors, Mul):
        if isinstance(f, Num):
            coeff = coeff * f.value
            continue
        if isinstance(f, Pow):
            b, e = f.base, f.exponent.value
        else:
            b, e = f, Fraction(1)
        bases[b] = bases.get(b, 0) + e
    if coeff == 0:
        return ZERO
    out = []
    regroup = False
    for b, e in bases.items():
        if e == 0:
            continue
        p = power(b, Num(e))
        if isinstance(p, Num):
            coeff = coeff * p.value
        elif isinstance(p, Mul):
            out.extend(p.args)
            regroup = True
        else:
            out.append(p)
    if regroup:
        return mul(Num(coeff), *out)
    if coeff == 0:
        return ZERO
    out.sort(key=lambda e: e.sort_key)
    if coeff != 1:
        out.insert(0, Num(coeff))
    if not out:
        return Num(coeff)
    if len(out) == 1:
        return out[0]
    return Mul(*out)


def _exact_root(q: Fraction, n: int):
    """Exact n-th root of a non-negative rational, or None."""
    if q < 0:
        return None

    def iroot(k: int):
        r = round(k ** (1.0 / n))
        for c in (r - 1, r, r + 1):
            if c >= 0 and c**n == k:
                return c
        return None

    a, b = iroot(q.numerator), iroot(q.denominator)
    if a is None or b is None:
        return None
    return Fraction(a, b)


def power(base, exponent) -> Expr:
    base = as_expr(base)
    exponent = as_expr(exponent)
    if not isinstance(exponent, Num):
        raise ExpressionError("exponents must be numeric constants")
    ev = exponent.value
    if ev == 0:
        return ONE
    if ev == 1:
        return base
    integral = is_integral(ev)
    if isinstance(base, Num):
        bv = base.value
        if bv == 0:
            return ZERO if ev > 0 else Pow(base, exponent)
        if integral:
            n = int(ev)
            if isinstance(bv, Fraction):
                return Num(bv**n)
            try:
                return Num(bv**n)
            except OverflowError:
                return Pow(base, exponent)
        if isinstance(bv, Fraction) and isinstance(ev, Fraction):
            root = _exact_root(bv, ev.denominator)
            if root is not None:
                return Num(root**ev.numerator)
        elif bv > 0:
            return Num(float(bv) ** float(ev))
        return Pow(base, exponent)
    if isinstance(base, Pow) and integral:
        return power(base.base, Num(base.exponent.value * ev))
    if isinstance(base, Mul) and integral:
        return mul(*(power(f, exponent) for f in base.args))
    return Pow(base, exponent)


def _negated(u: Expr):
    """``-u`` when ``u`` visibly carries a negative sign, else None."""
    if isinstance(u, Num) and u.value < 0:
        return Num(-u.value)
    if isinstance(u, Mul) and isinstance(u.args[0], Num) and u.args[0].value < 0:
        return mul(Num(-u.args[0].value), *u.args[1:])
    return None


def float_trig(v: float, cosine: bool) -> Expr:
    """sin or cos of a float, exact at multiples of pi/2 up to rounding.

    ``pi`` enters as a float, so ``cos(pi/2)`` would otherwise be 6e-17
    instead of 0 and poison every expression it multiplies.
    """
    q = v / (math.pi / 2)
    k = round(q)
    if abs(q - k) <= 4 * sys.float_info.epsilon * max(1.0, abs(q)):
        k = (k + (1 if cosine else 0)) % 4
        return Num((0, 1, 0, -1)[k])
    return Num(math.cos(v) if cosine else math.sin(v))


def sin(u) -> Expr:
    u = as_expr(u)
    if isinstance(u, Num):
        if u.value == 0:
            return ZERO
        if isinstance(u.value, float):
            return float_trig(u.value, cosine=False)
    neg = _negated(u)
    if neg is not None:
        return mul(NEG_ONE, sin(neg))
    return Sin(u)


def cos(u) -> Expr:
    u = as_expr(u)
    if isinstance(u, Num):
        if u.value == 0:
            return ONE
        if isinstance(u.value, float):
            return float_trig(u.value, cosine=True)
    neg = _negated(u)
    if neg is not None:
        return cos(neg)
    return Cos(u)


def sqrt(u) -> Expr:
    """Square root that pulls out even powers where the sign is known."""
    u = as_expr(u)
    if isinstance(u, Pow) and is_integral(u.exponent.value) and int(u.exponent.value) % 2 == 0:
        return power(u.base, Num(u.exponent.value / 2))
    if isinstance(u, Mul):
        c, rest = _split_coeff(u)
        parts = rest.args if isinstance(rest, Mul) else (rest,)
        if c > 0 and all(
            isinstance(p, Pow) and is_integral(p.exponent.value) and int(p.exponent.value) % 2 == 0
            for p in parts
        ):
            return mul(power(Num(c), HALF), *(power(p.base, Num(p.exponent.value / 2)) for p in parts))
    return power(u, HALF)


def rebuild(e: Expr) -> Expr:
    """Re-run the builders bottom-up over a verbatim tree."""
    memo: dict = {}

    def go(n: Expr) -> Expr:
        r = memo.get(n)
        if r is not None:
            return r
        if isinstance(n, (Num, Sym)):
            r = n
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
