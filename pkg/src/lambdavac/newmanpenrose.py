"""Null tetrads and the Weyl scalars Psi_0 ... Psi_4.

Normalization: ``g(l, n) = 1`` and ``g(m, mbar) = -1`` in signature
``(+,-,-,-)``.  Complex vectors and scalars are carried as (Re, Im) pairs
of real expressions.  The contractions are

    Psi_0 = C(l, m, l, m)        Psi_1 = C(l, n, l, m)
    Psi_2 = C(l, m, mbar, n)     Psi_3 = C(l, n, mbar, n)
    Psi_4 = C(n, mbar, n, mbar)

with ``C(A, B, C, D) = C_{abcd} A^a B^b C^c D^d``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .curvature import CurvatureBundle, MetricTensor
from .symcore import (
    Expr,
    Num,
    Rat,
    as_expr,
    evaluate_array,
    prob_zero_test,
    simplify,
    sqrt,
    to_rat,
)
from .symcore.zerotest import DEFAULT_SEED, sample_points

# Contractions are used exactly as defined above; no calibration flip was
# needed for the scalars to satisfy the invariant relation with K.
WEYL_SIGN = 1

CONVENTIONS = {
    "tetrad": "g(l,n) = +1, g(m,mbar) = -1, signature (+,-,-,-)",
    "psi": {
        "Psi0": "C(l,m,l,m)",
        "Psi1": "C(l,n,l,m)",
        "Psi2": "C(l,m,mbar,n)",
        "Psi3": "C(l,n,mbar,n)",
        "Psi4": "C(n,mbar,n,mbar)",
    },
    "weyl_contraction_sign_flip": WEYL_SIGN != 1,
}

NAMES = ("Psi0", "Psi1", "Psi2", "Psi3", "Psi4")


class UnsupportedStructureError(ValueError):
    """The metric does not have the (t,x) null block plus diagonal (y,z) block."""


class DegenerateTetradError(ValueError):
    """``g01`` is identically zero, so ``n`` cannot be built."""


@dataclass(frozen=True)
class NullTetrad:
    """Contravariant components; ``m = m_re + i m_im``."""

    l: tuple
    n: tuple
    m_re: tuple
    m_im: tuple

    def __post_init__(self):
        for name in ("l", "n", "m_re", "m_im"):
            object.__setattr__(self, name, tuple(as_expr(c) for c in getattr(self, name)))

    def swapped(self) -> "NullTetrad":
        """``l <-> n`` together with ``m <-> mbar``."""
        return NullTetrad(self.n, self.l, self.m_re, tuple(-c for c in self.m_im))

    def boosted(self, factor) -> "NullTetrad":
        """``l -> factor l``, ``n -> n / factor``."""
        f = as_expr(factor)
        return NullTetrad(tuple(f * c for c in self.l), tuple(c / f for c in self.n), self.m_re, self.m_im)

    def products(self, g: MetricTensor) -> dict:
        """All inner products that the normalization fixes, as (Re, Im) pairs."""
        l, n = _real(self.l), _real(self.n)
        m = (_rvec(self.m_re), _rvec(self.m_im))
        mb = (m[0], [-c for c in m[1]])
        G = g.rat
        pairs = {
            "l.l": (l, l),
            "n.n": (n, n),
            "m.m": (m, m),
            "l.m": (l, m),
            "n.m": (n, m),
            "l.n": (l, n),
            "m.mbar": (m, mb),
        }
        out = {}
        for key, (u, v) in pairs.items():
            re, im = _inner(G, u, v)
            out[key] = (re.to_expr(), im.to_expr())
        return out

    def check(self, g: MetricTensor, **zero_kw) -> dict:
        """Each normalization condition -> passes prob_zero_test."""
        target = {"l.n": 1, "m.mbar": -1}
        out = {}
        for key, (re, im) in self.products(g).items():
            re = simplify(re - target.get(key, 0))
            out[key] = _is_zero(re, **zero_kw) and _is_zero(im, **zero_kw)
        return out


def _rvec(v) -> list:
    return [to_rat(c) for c in v]


def _real(v) -> tuple:
    r = _rvec(v)
    return (r, [Rat({})] * len(r))


def _inner(G, u, v):
    re, im = Rat({}), Rat({})
    n = len(G)
    for i in range(n):
        for j in range(n):
            gij = G[i][j]
            if gij.is_zero:
                continue
            ur, ui, vr, vi = u[0][i], u[1][i], v[0][j], v[1][j]
            if not ur.is_zero and not vr.is_zero:
                re = re + gij * ur * vr
            if not ui.is_zero and not vi.is_zero:
                re = re - gij * ui * vi
            if not ur.is_zero and not vi.is_zero:
                im = im + gij * ur * vi
            if not ui.is_zero and not vr.is_zero:
                im = im + gij * ui * vr
    return re, im


def _is_zero(e: Expr, **kw) -> bool:
    if isinstance(e, Num):
        return e.value == 0
    return prob_zero_test(e, **kw)


def canonical_tetrad(g: MetricTensor, a=None) -> NullTetrad:
    """Tetrad adapted to ``g`` with ``g11 = 0`` and a diagonal (y, z) block.

    ``l = d_x``, ``n = (1/g01) d_t - g00/(2 g01^2) d_x`` and
    ``m = (d_y + i d_z) / (a sqrt 2)`` with ``a^2 = -g22``.  Pass ``a``
    when it is known to avoid a square root.
    """
    if g.dim != 4:
        raise UnsupportedStructureError("a four-dimensional metric is required")
    G = g.rat
    must_vanish = [(1, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    for i, j in must_vanish:
        if not G[i][j].is_zero:
            raise UnsupportedStructureError(f"g{i}{j} must vanish for the adapted tetrad")
    if not (G[2][2] - G[3][3]).is_zero:
        raise UnsupportedStructureError("g22 and g33 must agree")
    if G[2][2].is_zero:
        raise UnsupportedStructureError("g22 vanishes identically")
    if G[0][1].is_zero:
        raise DegenerateTetradError("g01 vanishes identically")
    g00, g01 = g[0, 0], g[0, 1]
    if a is None:
        a = sqrt(simplify(-g[2, 2]))
    else:
        a = as_expr(a)
        if not (to_rat(a) ** 2 + G[2][2]).is_zero:
            raise ValueError("a^2 must equal -g22")
    zero = Num(0)
    l = (zero, Num(1), zero, zero)
    n = (simplify(1 / g01), simplify(-g00 / (2 * g01**2)), zero, zero)
    s = simplify(1 / (a * sqrt(Num(2))))
    m_re = (zero, zero, s, zero)
    m_im = (zero, zero, zero, s)
    return NullTetrad(l, n, m_re, m_im)


# ---------------------------------------------------------------------------
# scalars
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeylScalars:
    """Five complex scalars as (Re, Im) expression pairs."""

    psi: tuple

    def __getitem__(self, k: int) -> tuple:
        return self.psi[k]

    def as_dict(self) -> dict:
        return dict(zip(NAMES, self.psi))

    def evaluate(self, binding: Mapping) -> np.ndarray:
        """Complex values, shape ``(5,) + binding shape``."""
        shape = np.broadcast_shapes(*(np.shape(v) for v in binding.values()))
        out = np.empty((5,) + shape, dtype=complex)
        for k, (re, im) in enumerate(self.psi):
            r = evaluate_array(re, _restrict(re, binding)).values
            i = evaluate_array(im, _restrict(im, binding)).values
            out[k] = np.asarray(r) + 1j * np.asarray(i)
        return out

    def vanishing(self, **zero_kw) -> tuple:
        """Per scalar: both parts pass prob_zero_test."""
        return tuple(_is_zero(re, **zero_kw) and _is_zero(im, **zero_kw) for re, im in self.psi)


def _restrict(e: Expr, binding: Mapping) -> dict:
    return {k: binding[k] for k in e.free_symbols}


def _contract(W, vectors: Sequence[tuple]) -> tuple:
    """``W_{abcd} v1^a v2^b v3^c v4^d`` with complex vectors as (re, im) lists."""
    zero = Rat({})
    re = {idx: W[idx] for idx in itertools.product(range(4), repeat=4) if not W[idx].is_zero}
    im: dict = {}
    for vr, vi in vectors:
        nre: dict = {}
        nim: dict = {}
        for idx, c in re.items():
            rest = idx[1:]
            a = idx[0]
            if not vr[a].is_zero:
                nre[rest] = nre.get(rest, zero) + c * vr[a]
            if not vi[a].is_zero:
                nim[rest] = nim.get(rest, zero) + c * vi[a]
        for idx, c in im.items():
            rest = idx[1:]
            a = idx[0]
            if not vr[a].is_zero:
                nim[rest] = nim.get(rest, zero) + c * vr[a]
            if not vi[a].is_zero:
                nre[rest] = nre.get(rest, zero) - c * vi[a]
        re = {k: v for k, v in nre.items() if not v.is_zero}
        im = {k: v for k, v in nim.items() if not v.is_zero}
    return re.get((), zero), im.get((), zero)


def weyl_scalars(bundle: CurvatureBundle, tetrad: NullTetrad) -> WeylScalars:
    """Psi_0 ... Psi_4 of ``bundle`` in ``tetrad``."""
    W = bundle._rat["weyl"]
    if WEYL_SIGN != 1:
        W = np.vectorize(lambda r: r.scale(WEYL_SIGN), otypes=[object])(W)
    l, n = _real(tetrad.l), _real(tetrad.n)
    m = (_rvec(tetrad.m_re), _rvec(tetrad.m_im))
    mb = (m[0], [-c for c in m[1]])
    plan = [(l, m, l, m), (l, n, l, m), (l, m, mb, n), (l, n, mb, n), (n, mb, n, mb)]
    psi = []
    for vecs in plan:
        re, im = _contract(W, vecs)
        psi.append((re.to_expr(), im.to_expr()))
    return WeylScalars(tuple(psi))


def petrov_hint(scalars: WeylScalars, **zero_kw) -> str:
    """Coarse label: ``"all-zero"``, ``"only-Psi2"`` or ``"other"``."""
    v = scalars.vanishing(**zero_kw)
    if all(v):
        return "all-zero"
    if v[0] and v[1] and v[3] and v[4]:
        return "only-Psi2"
    return "other"


# ---------------------------------------------------------------------------
# Psi_2 versus closed forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Psi2Fit:
    """Least-squares fit ``Re Psi_2 = alpha + beta / a^3`` on sampled points."""

    alpha: float
    beta: float
    max_residual: float
    points: int

    def matches(self, value: float, tol: float) -> bool:
        return abs(self.alpha - value) <= tol


def fit_psi2(
    psi2_re: Expr,
    a: Expr,
    binding: Mapping[str, float] | None = None,
    *,
    samples: int = 256,
    seed: int = DEFAULT_SEED,
    domain: Mapping | None = None,
) -> Psi2Fit:
    """Fit ``alpha + beta a^-3`` to ``psi2_re`` over seeded points.

    ``binding`` fixes constants (for example Lambda and m); the remaining
    free symbols are sampled from ``domain`` (default box [-2, 2]).
    """
    binding = dict(binding or {})
    names = sorted((psi2_re.free_symbols | a.free_symbols) - set(binding))
    pts = sample_points(names, samples, seed, domain)
    env = {**{k: np.full(samples, float(v)) for k, v in binding.items()}, **pts}
    y = evaluate_array(psi2_re, {k: env[k] for k in psi2_re.free_symbols})
    av = evaluate_array(a, {k: env[k] for k in a.free_symbols}) if a.free_symbols else None
    aval = av.values if av is not None else np.full(samples, float(a.value))
    yv = np.broadcast_to(y.values, (samples,))
    ok = np.isfinite(yv) & np.isfinite(aval) & (np.abs(aval) > 0.1)
    A = np.column_stack([np.ones(ok.sum()), aval[ok] ** -3.0])
    coef, *_ = np.linalg.lstsq(A, yv[ok], rcond=None)
    resid = yv[ok] - A @ coef
    scale = 1.0 + np.abs(yv[ok]).max(initial=0.0)
    return Psi2Fit(float(coef[0]), float(coef[1]), float(np.abs(resid).max(initial=0.0) / scale), int(ok.sum()))


def classify_constant(fit: Psi2Fit, lam: float, candidates: Mapping[str, float] | None = None, tol: float = 1e-9) -> str:
    """Name of the candidate constant term matched by ``fit.alpha``, else ``"neither"``."""
    if candidates is None:
        candidates = {"-Lambda/9": -lam / 9, "-2*Lambda/9": -2 * lam / 9}
    scale = tol * (1 + abs(lam))
    hits = [k for k, v in candidates.items() if abs(fit.alpha - v) <= scale]
    if len(hits) == 1:
        return hits[0]
    return "ambiguous" if hits else "neither"


def psi2_closed_forms(a: Expr, lam, m) -> dict:
    """Candidate closed forms for Psi_2 in terms of ``a``.

    ``computed`` is the form the contraction produces for the ansatz
    family.  ``lambda_ninth`` is the alternative with a constant
    ``-Lambda/9`` term; it equals ``-1/3 R(l, m, mbar, n)`` of the full
    Riemann tensor rather than a Weyl component.
    """
    lam, m = as_expr(lam if not isinstance(lam, int) else Fraction(lam)), as_expr(m if not isinstance(m, int) else Fraction(m))
    return {
        "computed": simplify(-m / (2 * a**3)),
        "lambda_ninth": simplify(-lam / 9 + m / (6 * a**3)),
    }


__all__ = [
    "CONVENTIONS",
    "DegenerateTetradError",
    "NullTetrad",
    "Psi2Fit",
    "UnsupportedStructureError",
    "WeylScalars",
    "canonical_tetrad",
    "classify_constant",
    "fit_psi2",
    "petrov_hint",
    "psi2_closed_forms",
    "weyl_scalars",
]
