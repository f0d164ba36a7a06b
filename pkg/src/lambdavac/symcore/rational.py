"""Rational normal form used by :func:`simplify` and the tensor code.

An expression is brought to ``N / D`` where

* ``N`` is a polynomial in *atoms* (symbols, ``sin(u)``, ``cos(u)``,
  fractional powers, and anything else opaque) with exact rational
  coefficients, reduced modulo ``sin(u)^2 + cos(u)^2 = 1`` so that every
  ``sin(u)`` appears at most linearly;
* ``D`` is a product of atoms and of irreducible-looking polynomial
  factors, each kept with an integer multiplicity.

Sums put fractions over the least common multiple of the factored
denominators and then divide out any denominator factor that divides the
numerator (exactly, including the quotient-ring division by ``sin(u)``).
That is enough to remove the removable poles produced by coordinate
inverses, which matters for evaluating curvature near chart
degeneracies.  The form is not a full canonical form; it never claims two
expressions differ.
"""

from __future__ import annotations

import heapq

import threading
import weakref
from fractions import Fraction
from math import comb

from .calculus import differentiate
from .expr import (
    Add,
    Cos,
    Expr,
    float_trig,
    Mul,
    Num,
    Pow,
    Sin,
    Sym,
    add,
    is_integral,
    mul,
    power,
)

# ---------------------------------------------------------------------------
# atoms
# ---------------------------------------------------------------------------

_SIN, _ROOT = 1, 2


class _AtomTable:
    def __init__(self):
        self.lock = threading.RLock()
        self.ids: dict = {}
        self.exprs: list = []
        self.free: list = []
        self.rule: dict = {}  # id -> (threshold, kind, payload)
        self.deriv: dict = {}

    def get(self, e: Expr, rule=None) -> int:
        with self.lock:
            i = self.ids.get(e)
            if i is None:
                i = len(self.exprs)
                self.ids[e] = i
                self.exprs.append(e)
                self.free.append(e.free_symbols)
                if rule is not None:
                    self.rule[i] = rule
            return i


_ATOMS = _AtomTable()


def _atom_key(i: int):
    return _ATOMS.exprs[i].sort_key


# ---------------------------------------------------------------------------
# polynomials: dict {monomial: coefficient}, monomial = sorted ((id, exp), ...)
# ---------------------------------------------------------------------------


def _mmul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for k, e in b:
        d[k] = d.get(k, 0) + e
    return tuple(sorted(d.items()))


def _needs_reduction(m: tuple) -> bool:
    rule = _ATOMS.rule
    for k, e in m:
        r = rule.get(k)
        if r is not None and e >= r[0]:
            return True
    return False


def _reduce_mono(m: tuple) -> dict:
    rule = _ATOMS.rule
    rest = []
    extra: list = []
    for k, e in m:
        r = rule.get(k)
        if r is None or e < r[0]:
            rest.append((k, e))
            continue
        thresh, kind, payload = r
        q, rem = divmod(e, thresh)
        if rem:
            rest.append((k, rem))
        if kind == _SIN:
            c = payload
            # sin^2 -> 1 - cos^2
            extra.append({((c, 2 * j),) if j else (): Fraction((-1) ** j * comb(q, j)) for j in range(q + 1)})
        else:
            extra.append(_ppow(payload, q))
    out = {tuple(rest): Fraction(1)}
    for p in extra:
        out = _pmul(out, p)
    return out


def _pclean(p: dict) -> dict:
    return {m: c for m, c in p.items() if c != 0}


def _pmul(p: dict, q: dict) -> dict:
    if not p or not q:
        return {}
    if len(p) > len(q):
        p, q = q, p
    out: dict = {}
    get = out.get
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = _mmul(m1, m2)
            out[m] = get(m, 0) + c1 * c2
    pending = [m for m in out if _needs_reduction(m)]
    for m in pending:
        c = out.pop(m)
        for mm, cc in _reduce_mono(m).items():
            out[mm] = out.get(mm, 0) + c * cc
    return _pclean(out)


def _padd(p: dict, q: dict, scale=1) -> dict:
    out = dict(p)
    for m, c in q.items():
        out[m] = out.get(m, 0) + scale * c
    return _pclean(out)


def _pscale(p: dict, c) -> dict:
    if c == 0:
        return {}
    return {m: v * c for m, v in p.items()}


def _ppow(p: dict, n: int) -> dict:
    result = {(): Fraction(1)}
    base = p
    while n:
        if n & 1:
            result = _pmul(result, base)
        n >>= 1
        if n:
            base = _pmul(base, base)
    return result


def _mono_poly(m: tuple, c=Fraction(1)) -> dict:
    if _needs_reduction(m):
        return _pscale(_reduce_mono(m), c)
    return {m: c}


def _atoms_of(p: dict) -> set:
    s = set()
    for m in p:
        for k, _ in m:
            s.add(k)
    return s


def _pdiv(p: dict, f: dict):
    """Exact division ``p / f`` in the plain polynomial ring, or None."""
    if not f:
        raise ZeroDivisionError
    if not p:
        return {}
    ids = sorted(_atoms_of(p) | _atoms_of(f))
    keys: dict = {}

    def key(m):
        k = keys.get(m)
        if k is None:
            d = dict(m)
            k = keys[m] = tuple(-d.get(i, 0) for i in ids)
        return k

    lead_f = min(f, key=key)
    lf = dict(lead_f)
    cf = f[lead_f]
    r = dict(p)
    # min-heap on negated exponent vectors gives the lexicographic leader;
    # entries whose monomial has left ``r`` are skipped when popped
    heap = [(key(m), m) for m in r]
    heapq.heapify(heap)
    quo: dict = {}
    budget = 4 * len(p) * max(1, len(f)) + 64
    while r:
        budget -= 1
        if budget < 0:
            return None
        while heap[0][1] not in r:
            heapq.heappop(heap)
        lead = heap[0][1]
        ld = dict(lead)
        t = []
        for i, e in lf.items():
            if ld.get(i, 0) < e:
                return None
        for i, e in ld.items():
            rem = e - lf.get(i, 0)
            if rem:
                t.append((i, rem))
        t = tuple(sorted(t))
        c = r[lead] / cf
        quo[t] = quo.get(t, 0) + c
        for m, v in f.items():
            mm = _mmul(t, m)
            old = r.get(mm)
            nv = (0 if old is None else old) - c * v
            if nv == 0:
                r.pop(mm, None)
            else:
                r[mm] = nv
                if old is None:
                    heapq.heappush(heap, (key(mm), mm))
    quo = _pclean(quo)
    pending = [m for m in quo if _needs_reduction(m)]
    for m in pending:
        c = quo.pop(m)
        quo = _padd(quo, _pscale(_reduce_mono(m), c))
    return quo


def _div_atom(p: dict, k: int):
    """``p / atom`` if exact (modulo the trig identity), else None."""
    if all(any(i == k for i, _ in m) for m in p):
        out = {}
        for m, c in p.items():
            mm = tuple((i, e - 1) if i == k else (i, e) for i, e in m)
            out[tuple((i, e) for i, e in mm if e)] = c
        return out
    r = _ATOMS.rule.get(k)
    if r is None or r[1] != _SIN:
        return None
    c_id = r[2]
    # p = p0 + s*p1 (s-degree <= 1); s | p  iff  (1 - c^2) | p0
    p0, p1 = {}, {}
    for m, v in p.items():
        d = dict(m)
        e = d.pop(k, 0)
        mm = tuple(sorted(d.items()))
        if e == 0:
            p0[mm] = v
        elif e == 1:
            p1[mm] = v
        else:
            return None
    q1 = _pdiv(p0, {(): Fraction(1), ((c_id, 2),): Fraction(-1)})
    if q1 is None:
        return None
    return _padd(p1, _pmul(q1, {((k, 1),): Fraction(1)}))



# Largest term-count product attempted by the conjugate route of _qdiv;
# beyond it a cancellation is skipped (simplification is best-effort).
QDIV_BUDGET = 20000


def _sin_atoms(p: dict) -> list:
    rule = _ATOMS.rule
    return sorted(k for k in _atoms_of(p) if k in rule and rule[k][1] == _SIN)


def _conjugate(p: dict, k: int) -> dict:
    """``p`` with ``sin -> -sin`` for the sine atom ``k``."""
    return {m: (-c if any(i == k and e % 2 for i, e in m) else c) for m, c in p.items()}


def _qdiv(p: dict, f: dict):
    """Exact ``p / f`` modulo the Pythagorean identity, or None.

    Plain division is tried first.  Otherwise ``f`` is multiplied by its
    conjugates in each sine atom until it is sine-free; since the reduced
    representation is unique, ``p * conj`` must then divide exactly by the
    resulting norm in the plain ring.
    """
    q = _pdiv(p, f)
    if q is not None:
        return q
    sins = _sin_atoms(f)
    if not sins:
        return None
    norm, conj = f, {(): Fraction(1)}
    for k in sins:
        if k not in _atoms_of(norm):
            continue
        c = _conjugate(norm, k)
        conj = _pmul(conj, c)
        norm = _pmul(norm, c)
    if _sin_atoms(norm):  # pragma: no cover - norms of reduced polys are sine-free
        return None
    if len(p) * len(conj) > QDIV_BUDGET:
        return None
    return _pdiv(_pmul(p, conj), norm)


# ---------------------------------------------------------------------------
# polynomial factors of denominators
# ---------------------------------------------------------------------------


class _Factor:
    __slots__ = ("poly", "items", "_hash", "atoms", "expr")

    def __init__(self, poly: dict):
        self.poly = poly
        self.items = tuple(sorted(poly.items()))
        self._hash = hash(self.items)
        self.atoms = frozenset(_atoms_of(poly))
        self.expr = None

    def __eq__(self, other):
        return isinstance(other, _Factor) and self.items == other.items

    def __hash__(self):
        return self._hash


_FACTORS: dict = {}
_FACTOR_LOCK = threading.Lock()


def _canonical_lead(p: dict):
    return min(p, key=lambda m: tuple(sorted((_atom_key(k), e) for k, e in m)))


def _split_content(p: dict):
    """p = coeff * monomial * rest, rest primitive with canonical lead 1."""
    ids = None
    for m in p:
        d = dict(m)
        if ids is None:
            ids = d
        else:
            ids = {k: min(e, d[k]) for k, e in ids.items() if k in d}
        if not ids:
            break
    content = tuple(sorted((ids or {}).items()))
    if content:
        cd = dict(content)
        rest = {}
        for m, c in p.items():
            rest[tuple((k, e - cd.get(k, 0)) for k, e in m if e - cd.get(k, 0))] = c
    else:
        rest = dict(p)
    lead = _canonical_lead(rest)
    coeff = rest[lead]
    rest = {m: c / coeff for m, c in rest.items()}
    return coeff, content, rest


def _register(rest: dict) -> _Factor:
    f = _Factor(rest)
    with _FACTOR_LOCK:
        known = _FACTORS.get(f)
        if known is None:
            _FACTORS[f] = f
            known = f
    return known


def _extract_sin_squares(p: dict):
    """Divide out ``1 - cos(u)^2`` factors, returning them as ``sin(u)^2``."""
    found: dict = {}
    if len(p) < 2:
        return p, found, Fraction(1)
    atoms = _atoms_of(p)
    for k, (_, kind, cos_id) in list(_ATOMS.rule.items()):
        if kind != _SIN or cos_id not in atoms:
            continue
        while len(p) > 1:
            q = _pdiv(p, {(): Fraction(1), ((cos_id, 2),): Fraction(-1)})
            if q is None:
                break
            p = q
            found[k] = found.get(k, 0) + 2
    c = Fraction(1)
    if found:
        c, content, p = _split_content(p)
        if content:  # pragma: no cover - quotients of primitive polys are primitive
            raise AssertionError("content reappeared")
    return p, found, c


def _factorize(rest: dict):
    """Split a primitive polynomial into already-known factors where possible."""
    found: dict = {}
    coeff = Fraction(1)
    if len(rest) > 1:
        atoms = _atoms_of(rest)
        with _FACTOR_LOCK:
            candidates = [f for f in _FACTORS if f.atoms <= atoms and len(f.poly) < len(rest)]
        candidates.sort(key=lambda f: -len(f.poly))
        for f in candidates:
            while len(rest) > 1:
                q = _qdiv(rest, f.poly)
                if q is None:
                    break
                found[f] = found.get(f, 0) + 1
                c, content, rest = _split_content(q)
                coeff *= c
                if content:  # cannot happen for a primitive input
                    raise AssertionError("content reappeared")
    if len(rest) > 1:
        f = _register(rest)
        found[f] = found.get(f, 0) + 1
    else:
        (m, c), = rest.items()
        coeff *= c
    return coeff, found


# ---------------------------------------------------------------------------
# the rational form
# ---------------------------------------------------------------------------


class Rat:
    """``num / prod(key**exp for key, exp in den.items())``."""

    __slots__ = ("num", "den")

    def __init__(self, num: dict, den: dict | None = None):
        self.num = num
        self.den = den if den and num else {}

    # construction ---------------------------------------------------------

    @staticmethod
    def const(c) -> "Rat":
        c = Fraction(c) if isinstance(c, int) else c
        return Rat({(): c} if c != 0 else {})

    @staticmethod
    def atom(e: Expr, rule=None) -> "Rat":
        return Rat({((_ATOMS.get(e, rule), 1),): Fraction(1)})

    # predicates -----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.num

    def constant(self):
        """The value if this is a constant, else None."""
        if not self.num:
            return Fraction(0)
        if not self.den and len(self.num) == 1 and () in self.num:
            return self.num[()]
        return None

    def same(self, other: "Rat") -> bool:
        return self.num == other.num and self.den == other.den

    def free_symbols(self) -> frozenset:
        s = set()
        for m in self.num:
            for k, _ in m:
                s |= _ATOMS.free[k]
        for k in self.den:
            if isinstance(k, _Factor):
                for a in k.atoms:
                    s |= _ATOMS.free[a]
            else:
                s |= _ATOMS.free[k]
        return frozenset(s)

    def size(self) -> int:
        return len(self.num) + sum(len(k.poly) if isinstance(k, _Factor) else 1 for k in self.den)

    # arithmetic -----------------------------------------------------------

    def __neg__(self):
        return Rat(_pscale(self.num, -1), self.den)

    def scale(self, c) -> "Rat":
        return Rat(_pscale(self.num, c), self.den)

    def __add__(self, other):
        other = _coerce(other)
        if not self.num:
            return other
        if not other.num:
            return self
        if self.den == other.den:
            return _cancel(_padd(self.num, other.num), dict(self.den))
        lcm = dict(self.den)
        for k, e in other.den.items():
            if lcm.get(k, 0) < e:
                lcm[k] = e
        num = _padd(_pmul(self.num, _den_poly(lcm, self.den)), _pmul(other.num, _den_poly(lcm, other.den)))
        return _cancel(num, lcm)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if not self.num or not other.num:
            return ZERO_RAT
        if isinstance(other, Rat) and not other.den and len(other.num) == 1 and () in other.num:
            return self.scale(other.num[()])
        if not self.den and len(self.num) == 1 and () in self.num:
            return other.scale(self.num[()])
        den = dict(self.den)
        for k, e in other.den.items():
            den[k] = den.get(k, 0) + e
        return _cancel(_pmul(self.num, other.num), den)

    __rmul__ = __mul__

    def invert(self) -> "Rat":
        if not self.num:
            raise ZeroDivisionError("inverse of zero")
        coeff, content, rest = _split_content(self.num)
        den: dict = dict(content)
        rest, sines, c1 = _extract_sin_squares(rest)
        coeff *= c1
        for k, e in sines.items():
            den[k] = den.get(k, 0) + e
        c2, factors = _factorize(rest)
        coeff *= c2
        num = _pscale(_den_poly(self.den, {}), 1 / coeff)
        for f, e in factors.items():
            den[f] = den.get(f, 0) + e
        return _cancel(num, den)

    def __truediv__(self, other):
        return self * _coerce(other).invert()

    def __rtruediv__(self, other):
        return _coerce(other) * self.invert()

    def __pow__(self, n: int):
        if n < 0:
            return self.invert() ** (-n)
        out = ONE_RAT
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    # calculus -------------------------------------------------------------

    def diff(self, var: str) -> "Rat":
        if var not in self.free_symbols():
            return ZERO_RAT
        dnum = _poly_diff(self.num, var)
        inv_den = Rat({(): Fraction(1)}, dict(self.den)) if self.den else ONE_RAT
        result = dnum * inv_den if self.den else dnum
        if self.den:
            logd = ZERO_RAT
            for k, e in self.den.items():
                if isinstance(k, _Factor):
                    dk = _poly_diff(k.poly, var)
                else:
                    dk = _atom_diff(k, var)
                if dk.is_zero:
                    continue
                logd = logd + dk * Rat({(): Fraction(-e)}, {k: 1})
            if not logd.is_zero:
                result = result + Rat(self.num, dict(self.den)) * logd
        return result

    # conversion -----------------------------------------------------------

    def to_expr(self) -> Expr:
        terms = [_mono_expr(m, c) for m, c in sorted(self.num.items())]
        num = add(*terms)
        if not self.den:
            return num
        dens = []
        for k, e in self.den.items():
            if isinstance(k, _Factor):
                dens.append(power(_factor_expr(k), Num(-e)))
            else:
                dens.append(power(_ATOMS.exprs[k], Num(-e)))
        return mul(num, *dens)

    def __repr__(self):
        from .printer import serialize

        return f"Rat({serialize(self.to_expr())})"


ZERO_RAT = Rat({})
ONE_RAT = Rat({(): Fraction(1)})


def _coerce(v) -> Rat:
    if isinstance(v, Rat):
        return v
    if isinstance(v, Expr):
        return to_rat(v)
    return Rat.const(v)


def _den_poly(full: dict, part: dict) -> dict:
    """Polynomial for prod(key**(full[key] - part.get(key, 0)))."""
    mono = []
    polys = []
    for k, e in full.items():
        r = e - part.get(k, 0)
        if r <= 0:
            continue
        if isinstance(k, _Factor):
            polys.append(_ppow(k.poly, r))
        else:
            mono.append((k, r))
    out = _mono_poly(tuple(sorted(mono)))
    for p in polys:
        out = _pmul(out, p)
    return out


def _cancel(num: dict, den: dict) -> Rat:
    if not num:
        return ZERO_RAT
    if not den:
        return Rat(num)
    out_den = {}
    for k, e in den.items():
        if isinstance(k, _Factor):
            while e:
                q = _qdiv(num, k.poly)
                if q is None:
                    break
                num = q
                e -= 1
        else:
            while e:
                q = _div_atom(num, k)
                if q is None:
                    break
                num = q
                e -= 1
        if e:
            out_den[k] = e
    return Rat(num, out_den)


def _mono_expr(m: tuple, c) -> Expr:
    return mul(Num(c), *(power(_ATOMS.exprs[k], Num(e)) for k, e in m))


def _factor_expr(f: _Factor) -> Expr:
    if f.expr is None:
        f.expr = add(*(_mono_expr(m, c) for m, c in f.items))
    return f.expr


def _atom_diff(k: int, var: str) -> Rat:
    if var not in _ATOMS.free[k]:
        return ZERO_RAT
    key = (k, var)
    r = _ATOMS.deriv.get(key)
    if r is None:
        r = to_rat(differentiate(_ATOMS.exprs[k], var))
        _ATOMS.deriv[key] = r
    return r


def _poly_diff(p: dict, var: str) -> Rat:
    out = ZERO_RAT
    for m, c in p.items():
        for idx, (k, e) in enumerate(m):
            dk = _atom_diff(k, var)
            if dk.is_zero:
                continue
            rest = list(m)
            if e == 1:
                rest.pop(idx)
            else:
                rest[idx] = (k, e - 1)
            out = out + Rat(_mono_poly(tuple(rest), c * e)) * dk
    return out


# ---------------------------------------------------------------------------
# Expr -> Rat
# ---------------------------------------------------------------------------

_CACHE: "weakref.WeakKeyDictionary[Expr, Rat]" = weakref.WeakKeyDictionary()
_CANON: "weakref.WeakKeyDictionary[Expr, Expr]" = weakref.WeakKeyDictionary()


def canonical(e: Expr) -> Expr:
    """Expression rebuilt from its rational normal form."""
    r = _CANON.get(e)
    if r is None:
        r = to_rat(e).to_expr()
        _CANON[e] = r
        _CANON[r] = r
    return r


def _sum(rats: list) -> Rat:
    groups: dict = {}
    for r in rats:
        if r.is_zero:
            continue
        key = frozenset(r.den.items())
        g = groups.get(key)
        groups[key] = r if g is None else Rat(_padd(g.num, r.num), r.den)
    out = ZERO_RAT
    for key in sorted(groups, key=len):
        g = groups[key]
        if g.den:
            g = _cancel(g.num, dict(g.den))
        out = out + g
    return out


def _looks_negative(u: Expr) -> bool:
    """Leading numeric coefficient is negative (``-t``, ``-t/6 + x``)."""
    if isinstance(u, Num):
        return u.value < 0
    if isinstance(u, Mul):
        return isinstance(u.args[0], Num) and u.args[0].value < 0
    if isinstance(u, Add):
        return _looks_negative(u.args[0])
    return False


def _trig_atom(e: Expr) -> Rat:
    u = canonical(e.arg)
    if isinstance(u, Num):
        v = u.value
        if v == 0:
            return ZERO_RAT if isinstance(e, Sin) else ONE_RAT
        if isinstance(v, float):
            return Rat.const(float_trig(v, cosine=isinstance(e, Cos)).value)
    neg = canonical(mul(Num(-1), u))
    sign = 1
    nu, nn = _looks_negative(u), _looks_negative(neg)
    if (nu and not nn) or (nu == nn and neg.sort_key < u.sort_key):
        u = neg
        sign = -1 if isinstance(e, Sin) else 1
    cos_id = _ATOMS.get(Cos(u))
    if isinstance(e, Sin):
        r = Rat.atom(Sin(u), (2, _SIN, cos_id))
    else:
        r = Rat({((cos_id, 1),): Fraction(1)})
    return r if sign == 1 else -r


def _seed_factor(e: Expr) -> None:
    """Remember the sum ``e`` (or the base of a power of a sum) as a factor."""
    if isinstance(e, Pow):
        e = e.base
    if not isinstance(e, Add):
        return
    r = to_rat(e)
    if r.den or len(r.num) < 2:
        return
    _, _, rest = _split_content(r.num)
    if len(rest) > 1:
        _register(rest)


def _pow_rat(e: Pow) -> Rat:
    ev = e.exponent.value
    if is_integral(ev):
        n = int(ev)
        _seed_factor(e.base)
        base = to_rat(e.base)
        if base.is_zero and n < 0:
            return Rat.atom(Pow(Num(0), e.exponent))
        return base**n
    base = canonical(e.base)
    if isinstance(ev, float):
        if isinstance(base, Num) and base.value > 0:
            return Rat.const(float(base.value) ** ev)
        return Rat.atom(Pow(base, e.exponent))
    q = ev.denominator
    whole, rem = divmod(ev.numerator, q)
    if isinstance(base, Num):
        bv = base.value
        if isinstance(bv, float) and bv > 0:
            return Rat.const(bv**float(ev))
        if not isinstance(bv, Fraction) or bv <= 0:
            return Rat.atom(Pow(base, e.exponent))
        c = power(base, Num(ev))
        if isinstance(c, Num):
            return Rat.const(c.value)
        rule = (q, _ROOT, {(): bv})
        return Rat.const(bv**whole) * Rat({((_ATOMS.get(Pow(base, Num(Fraction(1, q))), rule), rem),): Fraction(1)})
    brat = to_rat(base)
    rule = (q, _ROOT, brat.num) if not brat.den else None
    root = _ATOMS.get(Pow(base, Num(Fraction(1, q))), rule)
    return (brat**whole) * Rat({((root, rem),): Fraction(1)})


def to_rat(e: Expr) -> Rat:
    r = _CACHE.get(e)
    if r is not None:
        return r
    if isinstance(e, Num):
        r = Rat.const(e.value)
    elif isinstance(e, Sym):
        r = Rat.atom(e)
    elif isinstance(e, Add):
        r = _sum([to_rat(a) for a in e.args])
    elif isinstance(e, Mul):
        r = ONE_RAT
        for a in e.args:
            _seed_factor(a)
            r = r * to_rat(a)
            if r.is_zero:
                break
    elif isinstance(e, Pow):
        r = _pow_rat(e)
    elif isinstance(e, (Sin, Cos)):
        r = _trig_atom(e)
    else:  # pragma: no cover
        raise TypeError(type(e))
    _CACHE[e] = r
    return r


def simplify(e: Expr) -> Expr:
    """Evaluation-equivalent rewrite of ``e`` through the rational form."""
    return canonical(e)
