"""Curvature of a symbolic 4-metric.

Conventions (signature ``(+,-,-,-)``)::

    Gamma^r_{mn} = 1/2 g^{rs} (d_m g_{sn} + d_n g_{sm} - d_s g_{mn})
    R^r_{smn}    = d_m Gamma^r_{ns} - d_n Gamma^r_{ms}
                   + Gamma^r_{ml} Gamma^l_{ns} - Gamma^r_{nl} Gamma^l_{ms}
    R_{mn}       = R^r_{mrn}
    R_{abmn}     = g_{ar} R^r_{bmn}

All tensor algebra runs on the rational normal form of
:mod:`lambdavac.symcore.rational`, so every stored component is already
simplified; the public arrays hold ordinary expressions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .symcore import (
    Expr,
    Num,
    Rat,
    as_expr,
    evaluate_array,
    prob_zero_test,
    to_rat,
)

# The printed catalog components of the source solutions agree with the
# convention above without any flip; kept as data so reports can state it.
RIEMANN_SIGN = 1

CONVENTIONS = {
    "signature": "(+,-,-,-)",
    "christoffel": "Gamma^r_{mn} = 1/2 g^{rs} (d_m g_{sn} + d_n g_{sm} - d_s g_{mn})",
    "riemann": "R^r_{smn} = d_m Gamma^r_{ns} - d_n Gamma^r_{ms} + Gamma^r_{ml} Gamma^l_{ns} - Gamma^r_{nl} Gamma^l_{ms}",
    "riemann_lowered": "R_{abmn} = g_{ar} R^r_{bmn}",
    "ricci": "R_{mn} = R^r_{mrn}",
    "riemann_sign_flip": RIEMANN_SIGN != 1,
    "weyl": "C = Riem - (g ^ Ric)/2 + R (g ^ g)/12 (Kulkarni-Nomizu, n = 4)",
}


class SingularMetricError(ValueError):
    """The metric determinant is identically zero."""


class MetricStructureError(ValueError):
    """The component grid is not a symmetric square array."""


@dataclass(frozen=True)
class MetricTensor:
    """Symmetric grid of expressions on named coordinates."""

    coords: tuple
    components: tuple  # tuple of row tuples
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.coords)
        comps = tuple(tuple(as_expr(c) for c in row) for row in self.components)
        if len(comps) != n or any(len(r) != n for r in comps):
            raise MetricStructureError(f"expected a {n}x{n} component grid")
        for i in range(n):
            for j in range(i + 1, n):
                if comps[i][j] is not comps[j][i]:
                    raise MetricStructureError(f"g[{i}][{j}] != g[{j}][{i}]")
        object.__setattr__(self, "coords", tuple(self.coords))
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "params", dict(self.params))

    @classmethod
    def from_upper(cls, coords: Sequence[str], upper: Mapping, params=None) -> "MetricTensor":
        """Build from ``{(i, j): expr}`` with ``i <= j``; missing entries are 0."""
        n = len(coords)
        rows = [[Num(0)] * n for _ in range(n)]
        for (i, j), e in upper.items():
            e = as_expr(e)
            rows[i][j] = e
            rows[j][i] = e
        return cls(tuple(coords), tuple(tuple(r) for r in rows), params or {})

    @classmethod
    def diagonal(cls, coords: Sequence[str], diag: Sequence) -> "MetricTensor":
        return cls.from_upper(coords, {(i, i): d for i, d in enumerate(diag)})

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __getitem__(self, ij) -> Expr:
        i, j = ij
        return self.components[i][j]

    def array(self) -> np.ndarray:
        out = np.empty((self.dim, self.dim), dtype=object)
        for i in range(self.dim):
            for j in range(self.dim):
                out[i, j] = self.components[i][j]
        return out

    @cached_property
    def rat(self) -> list:
        return [[to_rat(c) for c in row] for row in self.components]

    @cached_property
    def determinant(self) -> Expr:
        return _det([row[:] for row in self.rat]).to_expr()

    def numeric(self, binding: Mapping[str, object]) -> np.ndarray:
        """Component values, shape ``binding_shape + (n, n)``."""
        vals = [[evaluate_array(c, _bind(c, binding)).values for c in row] for row in self.components]
        return np.moveaxis(np.array(vals, dtype=float), (0, 1), (-2, -1))

    def signature_at(self, binding: Mapping[str, float]) -> tuple:
        """Eigenvalue signs at a point, sorted descending (e.g. ``(1, -1, -1, -1)``)."""
        g = self.numeric(binding)
        w = np.linalg.eigvalsh(g)
        return tuple(int(s) for s in np.sign(w)[::-1])


def _bind(e: Expr, binding: Mapping) -> dict:
    return {k: binding[k] for k in e.free_symbols if k in binding} | {
        k: 0.0 for k in e.free_symbols if k not in binding
    }


# ---------------------------------------------------------------------------
# determinants and inverse
# ---------------------------------------------------------------------------


def _det(m: list) -> Rat:
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    # expand along the row with most zeros
    row = max(range(n), key=lambda r: sum(c.is_zero for c in m[r]))
    total = Rat({})
    for j in range(n):
        c = m[row][j]
        if c.is_zero:
            continue
        minor = [[m[r][k] for k in range(n) if k != j] for r in range(n) if r != row]
        term = c * _det(minor)
        total = total - term if (row + j) % 2 else total + term
    return total


def inverse_rat(g: MetricTensor) -> list:
    m = g.rat
    n = g.dim
    det = _det([row[:] for row in m])
    if det.is_zero or (det.constant() is None and prob_zero_test(det.to_expr())):
        raise SingularMetricError("metric determinant vanishes identically")
    inv_det = det.invert()
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            minor = [[m[r][k] for k in range(n) if k != i] for r in range(n) if r != j]
            cof = _det(minor) if n > 1 else Rat.const(1)
            if (i + j) % 2:
                cof = -cof
            out[i][j] = out[j][i] = cof * inv_det
    return out


def invert_metric(g: MetricTensor) -> np.ndarray:
    """Symbolic inverse ``g^{mn}`` as a 4x4 object array of expressions."""
    inv = inverse_rat(g)
    return _to_array(inv)


def _to_array(t) -> np.ndarray:
    a = np.array(t, dtype=object)
    out = np.empty(a.shape, dtype=object)
    for idx in np.ndindex(a.shape):
        out[idx] = a[idx].to_expr()
    return out


# ---------------------------------------------------------------------------
# the curvature bundle
# ---------------------------------------------------------------------------


@dataclass
class CurvatureBundle:
    """All curvature objects of one metric, as expressions.

    ``christoffel[r, m, n]`` is Gamma^r_{mn}; ``riemann[a, b, m, n]`` is the
    fully covariant R_{abmn}; ``weyl`` likewise.
    """

    metric: MetricTensor
    inverse: np.ndarray
    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: Expr
    kretschmann: Expr
    weyl: np.ndarray
    _rat: dict = field(default_factory=dict, repr=False)

    def nonzero_riemann(self) -> list:
        """Independent nonzero R_{abmn} (a<b, m<n, (a,b) <= (m,n))."""
        out = []
        pairs = [(a, b) for a in range(4) for b in range(a + 1, 4)]
        for p, q in itertools.combinations_with_replacement(pairs, 2):
            idx = p + q
            if not self._rat["riemann"][idx].is_zero:
                out.append((idx, self.riemann[idx]))
        return out


def _zeros(shape) -> np.ndarray:
    a = np.empty(shape, dtype=object)
    for idx in np.ndindex(shape):
        a[idx] = Rat({})
    return a


def _sum(terms) -> Rat:
    out = Rat({})
    for t in terms:
        if not t.is_zero:
            out = out + t
    return out


def compute_curvature(g: MetricTensor) -> CurvatureBundle:
    """Christoffel, Riemann, Ricci, R, Kretschmann and Weyl of ``g``."""
    if g.dim != 4:
        raise MetricStructureError("curvature is implemented for four dimensions only")
    n = 4
    X = g.coords
    G = g.rat
    Gi = inverse_rat(g)

    dg = [[[G[i][j].diff(X[k]) for j in range(n)] for i in range(n)] for k in range(n)]

    # Gamma_{s m n} lowered, then raised
    low = [[[None] * n for _ in range(n)] for _ in range(n)]
    for s in range(n):
        for m in range(n):
            for k in range(m, n):
                v = dg[m][s][k] + dg[k][s][m] - dg[s][m][k]
                low[s][m][k] = low[s][k][m] = v.scale(Fraction(1, 2)) if not v.is_zero else v
    gam = _zeros((n, n, n))
    for r in range(n):
        for m in range(n):
            for k in range(m, n):
                v = _sum(Gi[r][s] * low[s][m][k] for s in range(n) if not Gi[r][s].is_zero and not low[s][m][k].is_zero)
                gam[r, m, k] = gam[r, k, m] = v

    dgam = np.empty((n, n, n, n), dtype=object)  # dgam[k, r, m, n] = d_k Gamma^r_{mn}
    for k in range(n):
        for r in range(n):
            for m in range(n):
                for q in range(m, n):
                    v = gam[r, m, q].diff(X[k])
                    dgam[k, r, m, q] = dgam[k, r, q, m] = v

    # R^r_{s m n}
    rup = _zeros((n, n, n, n))
    for r, s in itertools.product(range(n), repeat=2):
        for m in range(n):
            for q in range(m + 1, n):
                v = dgam[m, r, q, s] - dgam[q, r, m, s]
                for lam in range(n):
                    a, b = gam[r, m, lam], gam[lam, q, s]
                    if not a.is_zero and not b.is_zero:
                        v = v + a * b
                    a, b = gam[r, q, lam], gam[lam, m, s]
                    if not a.is_zero and not b.is_zero:
                        v = v - a * b
                v = v.scale(RIEMANN_SIGN) if RIEMANN_SIGN != 1 else v
                rup[r, s, m, q] = v
                rup[r, s, q, m] = -v

    rdn = _zeros((n, n, n, n))
    for a, b in itertools.product(range(n), repeat=2):
        for m in range(n):
            for q in range(m + 1, n):
                v = _sum(G[a][r] * rup[r, b, m, q] for r in range(n) if not G[a][r].is_zero and not rup[r, b, m, q].is_zero)
                rdn[a, b, m, q] = v
                rdn[a, b, q, m] = -v

    ric = _zeros((n, n))
    for m in range(n):
        for q in range(m, n):
            v = _sum(rup[r, m, r, q] for r in range(n))
            ric[m, q] = ric[q, m] = v

    scalar = _sum(Gi[m][q] * ric[m, q] for m in range(n) for q in range(n) if not Gi[m][q].is_zero and not ric[m, q].is_zero)

    # raise all four indices one at a time, then contract
    t = rdn
    for slot in range(4):
        nxt = _zeros((n, n, n, n))
        for idx in itertools.product(range(n), repeat=4):
            terms = []
            for e in range(n):
                gi = Gi[idx[slot]][e]
                if gi.is_zero:
                    continue
                src = list(idx)
                src[slot] = e
                c = t[tuple(src)]
                if not c.is_zero:
                    terms.append(gi * c)
            nxt[idx] = _sum(terms)
        t = nxt
    kretsch = _sum(rdn[idx] * t[idx] for idx in itertools.product(range(n), repeat=4) if not rdn[idx].is_zero and not t[idx].is_zero)

    weyl = _weyl(G, ric, scalar, rdn)

    rats = {
        "inverse": Gi,
        "christoffel": gam,
        "riemann_up": rup,
        "riemann": rdn,
        "ricci": ric,
        "scalar": scalar,
        "kretschmann": kretsch,
        "weyl": weyl,
        "metric": G,
    }
    return CurvatureBundle(
        metric=g,
        inverse=_to_array(Gi),
        christoffel=_to_array(gam),
        riemann=_to_array(rdn),
        ricci=_to_array(ric),
        scalar=scalar.to_expr(),
        kretschmann=kretsch.to_expr(),
        weyl=_to_array(weyl),
        _rat=rats,
    )


def _weyl(G, ric, scalar: Rat, rdn) -> np.ndarray:
    n = 4
    sixth = scalar.scale(Fraction(1, 6)) if not scalar.is_zero else scalar
    out = _zeros((n, n, n, n))
    done = {}
    for a, b, m, q in itertools.product(range(n), repeat=4):
        if a == b or m == q:
            continue
        v = rdn[a, b, m, q]
        terms = [
            (G[a][m], ric[b, q], -1),
            (G[a][q], ric[b, m], 1),
            (G[b][m], ric[a, q], 1),
            (G[b][q], ric[a, m], -1),
        ]
        for x, y, sgn in terms:
            if not x.is_zero and not y.is_zero:
                p = (x * y).scale(Fraction(sgn, 2))
                v = v + p
        if not sixth.is_zero:
            gg = G[a][m] * G[b][q] - G[a][q] * G[b][m]
            if not gg.is_zero:
                v = v + sixth * gg
        out[a, b, m, q] = v
    return out


def scalar_curvature(bundle: CurvatureBundle) -> Expr:
    return bundle.scalar


def einstein_residual(g: MetricTensor, lam, bundle: CurvatureBundle | None = None) -> np.ndarray:
    """``R_{mn} - lam * g_{mn}`` componentwise, simplified."""
    if bundle is None:
        bundle = compute_curvature(g)
    lam_r = to_rat(as_expr(lam))
    ric = bundle._rat["ricci"]
    out = np.empty((4, 4), dtype=object)
    for i in range(4):
        for j in range(4):
            out[i, j] = (ric[i, j] - lam_r * g.rat[i][j]).to_expr()
    return out
