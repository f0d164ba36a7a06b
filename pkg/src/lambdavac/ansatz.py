"""The solution-generating ansatz, its catalog, and chart transformations.

For any function ``a(t, x)`` the line element

    ds^2 = b dt^2 + 2 a_x dt dx - a^2 (dy^2 + dz^2),
    b    = 2 a_t + Lambda a^2 / 3 + m / a,

solves ``R_{mn} = Lambda g_{mn}``.  :func:`derive_b` and :func:`build_metric`
assemble it; :func:`builtin` returns the named members of the family that
ship with the package as ``.metric`` files.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Callable, Mapping, Sequence

import numpy as np

from .curvature import MetricTensor
from .metriclang import SolutionSpec, SolutionWarning, parse_solution_file, read_solution_file
from .symcore import (
    Expr,
    Num,
    Sym,
    as_expr,
    differentiate,
    evaluate_array,
    prob_zero_test,
    simplify,
    substitute_many,
    to_rat,
)
from .symcore.zerotest import DEFAULT_SEED, sample_points

COORDS = ("t", "x", "y", "z")


class DegenerateAnsatzError(ValueError):
    """``a_x`` vanishes identically, so the (t, x) block is singular."""


class CatalogError(KeyError):
    """Unknown catalog name."""


class ParameterConstraintError(ValueError):
    """Parameters violate the constraint of a catalog entry."""


class TransformError(ValueError):
    """A chart transformation is not invertible on its declared domain."""


def _param(v) -> Expr:
    if isinstance(v, str):
        return Sym(v)
    return as_expr(Fraction(v) if isinstance(v, int) else v)


# ---------------------------------------------------------------------------
# the ansatz
# ---------------------------------------------------------------------------


def derive_b(a, lam, m, coords: Sequence[str] = COORDS) -> Expr:
    """``b = 2 a_t + lam a^2 / 3 + m / a`` for ``a`` in the first two coordinates."""
    a = as_expr(a)
    lam, m = _param(lam), _param(m)
    return simplify(2 * differentiate(a, coords[0]) + lam * a**2 / 3 + m / a)


def closed_form_r22(a, b, coords: Sequence[str] = COORDS) -> Expr:
    """Ricci component ``R_22`` of the ansatz metric for arbitrary ``b``."""
    a, b = as_expr(a), as_expr(b)
    t, x = coords[0], coords[1]
    a_x = differentiate(a, x)
    if to_rat(a_x).is_zero:
        raise DegenerateAnsatzError("a_x vanishes identically")
    a_t = differentiate(a, t)
    a_xt = differentiate(a_x, t)
    b_x = differentiate(b, x)
    return simplify((2 * a * a_xt + 2 * a_x * a_t - b_x * a - a_x * b) / a_x)


@dataclass
class Solution:
    """A metric together with the constants it was built for."""

    name: str
    metric: MetricTensor
    lam: Expr
    m: Expr

    @property
    def coords(self) -> tuple:
        return self.metric.coords

    @property
    def params(self) -> dict:
        """Numeric values of the constants that are numbers."""
        out = {}
        for k, v in (("Lambda", self.lam), ("m", self.m)):
            if isinstance(v, Num):
                out[k] = float(v.value)
        out.update({k: float(v) for k, v in self.metric.params.items() if k not in out})
        return out


@dataclass
class AnsatzSolution(Solution):
    """Ansatz member: ``a``, the derived ``b`` and the assembled metric."""

    a: Expr = None
    b: Expr = None

    @property
    def a_t(self) -> Expr:
        return differentiate(self.a, self.coords[0])

    @property
    def a_x(self) -> Expr:
        return differentiate(self.a, self.coords[1])


def build_metric(a, b, coords: Sequence[str] = COORDS, params: Mapping | None = None) -> MetricTensor:
    """``g00 = b``, ``g01 = a_x``, ``g22 = g33 = -a^2``, all others zero."""
    a = as_expr(a)
    a_x = simplify(differentiate(a, coords[1]))
    minus_a2 = simplify(-(a**2))
    return MetricTensor.from_upper(
        coords,
        {(0, 0): b, (0, 1): a_x, (2, 2): minus_a2, (3, 3): minus_a2},
        params or {},
    )


def make_solution(a, lam, m, name: str = "custom", coords: Sequence[str] = COORDS) -> AnsatzSolution:
    """Derive ``b`` and assemble the metric; ``lam``/``m`` may be numbers or symbol names."""
    a = as_expr(a)
    lam_e, m_e = _param(lam), _param(m)
    bad = a.free_symbols - set(coords[:2]) - {"Lambda", "m"}
    if bad:
        raise ValueError(f"a may depend only on {coords[0]}, {coords[1]} and constants; found {sorted(bad)}")
    consts = {}
    if "Lambda" in a.free_symbols:
        consts["Lambda"] = lam_e
    if "m" in a.free_symbols:
        consts["m"] = m_e
    if consts:
        a = simplify(substitute_many(a, consts))
    b = derive_b(a, lam_e, m_e, coords)
    params = {k: v.value for k, v in (("Lambda", lam_e), ("m", m_e)) if isinstance(v, Num)}
    metric = build_metric(a, b, coords, params)
    return AnsatzSolution(name=name, metric=metric, lam=lam_e, m=m_e, a=a, b=b)


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------


def _nonzero_lambda(lam, m):
    if isinstance(lam, Num) and lam.value == 0:
        raise ParameterConstraintError("singular_periodic requires Lambda != 0")


def _zero_m(lam, m):
    if not (isinstance(m, Num) and m.value == 0):
        raise ParameterConstraintError("conformal_flat requires m = 0")


def _zero_lambda(lam, m):
    if not (isinstance(lam, Num) and lam.value == 0):
        raise ParameterConstraintError("lambda_zero requires Lambda = 0")


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    summary: str
    constraint: Callable | None = None
    # x as a function of t and the value A of a, when a can be inverted
    x_of_a: str | None = None

    def spec(self) -> SolutionSpec:
        text = resources.files("lambdavac.data").joinpath(f"{self.name}.metric").read_text(encoding="utf-8")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SolutionWarning)
            return parse_solution_file(text, name=self.name)

    @property
    def defaults(self) -> tuple:
        s = self.spec()
        return s.params["Lambda"], s.params["m"]


CATALOG: dict = {
    e.name: e
    for e in (
        CatalogEntry("space_periodic", "a = 2 + cos x; regular, 2*pi-periodic in x"),
        CatalogEntry("regular_periodic", "a = (2 + cos x)(2 + sin(Lambda t/6)); regular, periodic in t and x"),
        CatalogEntry(
            "singular_periodic",
            "a = cos x sin(Lambda t/6); curvature singular where a = 0",
            constraint=_nonzero_lambda,
        ),
        CatalogEntry(
            "conformal_flat",
            "m = 0 with a = t + x; conformal to Minkowski space",
            constraint=_zero_m,
            x_of_a="A - t",
        ),
        CatalogEntry("lambda_zero", "Lambda = 0 with a = 2 + cos x; Ricci flat", constraint=_zero_lambda),
    )
}


def builtin(name: str, lam=None, m=None) -> AnsatzSolution:
    """Catalog solution ``name``; omitted constants take the file defaults."""
    entry = CATALOG.get(name)
    if entry is None:
        raise CatalogError(f"unknown catalog entry {name!r}; known: {', '.join(sorted(CATALOG))}")
    spec = entry.spec()
    lam = spec.params["Lambda"] if lam is None else lam
    m = spec.params["m"] if m is None else m
    lam_e, m_e = _param(lam), _param(m)
    if entry.constraint is not None:
        entry.constraint(lam_e, m_e)
    if isinstance(m_e, Num) and m_e.value < 0:
        raise ParameterConstraintError("m must be nonnegative")
    return make_solution(spec.a, lam_e, m_e, name=name, coords=spec.coords)


def from_spec(spec: SolutionSpec, lam=None, m=None) -> Solution:
    """Solution for a parsed ``.metric`` file, with optional overrides."""
    params = dict(spec.params)
    if lam is not None:
        params["Lambda"] = lam
    if m is not None:
        params["m"] = m
    name = spec.name or "custom"
    if spec.mode == "ansatz":
        if isinstance(params["m"], (int, float, Fraction)) and params["m"] < 0:
            raise ParameterConstraintError("m must be nonnegative")
        return make_solution(spec.a, params["Lambda"], params["m"], name=name, coords=spec.coords)
    values = {k: Num(v) for k, v in params.items()}
    rows = {key: simplify(substitute_many(e, values)) for key, e in spec.components.items()}
    metric = MetricTensor.from_upper(spec.coords, rows, params)
    lam_e = _param(params.get("Lambda", 0))
    m_e = _param(params.get("m", 0))
    return Solution(name=name, metric=metric, lam=lam_e, m=m_e)


def load_solution(source: str, lam=None, m=None, *, path: bool = False) -> Solution:
    """Catalog name or, with ``path=True``, a ``.metric`` file path."""
    if path:
        return from_spec(read_solution_file(source), lam, m)
    return builtin(source, lam, m)


# ---------------------------------------------------------------------------
# chart transformations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChartTransform:
    """New coordinates as expressions in the old ones.

    ``domain`` is a box over the *old* coordinates; invertibility is
    checked by sampling the Jacobian there.
    """

    old: tuple
    new: tuple
    exprs: tuple
    domain: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if not (len(self.old) == len(self.new) == len(self.exprs)):
            raise TransformError("old coordinates, new coordinates and expressions must have equal length")
        object.__setattr__(self, "exprs", tuple(simplify(as_expr(e)) for e in self.exprs))
        object.__setattr__(self, "old", tuple(self.old))
        object.__setattr__(self, "new", tuple(self.new))
        object.__setattr__(self, "domain", dict(self.domain))

    @classmethod
    def identity(cls, coords: Sequence[str], domain: Mapping | None = None) -> "ChartTransform":
        return cls(tuple(coords), tuple(coords), tuple(Sym(c) for c in coords), domain or {})

    def jacobian(self) -> list:
        """``J[i][j] = d new_i / d old_j`` as expressions."""
        return [[simplify(differentiate(e, o)) for o in self.old] for e in self.exprs]

    def check_jacobian(self, samples: int = 64, seed: int = DEFAULT_SEED, params: Mapping | None = None) -> None:
        """Raise :class:`TransformError` if det J vanishes at a sampled point."""
        rows = [[to_rat(c) for c in row] for row in self.jacobian()]
        from .curvature import _det

        det = _det(rows).to_expr()
        pts = self._points(samples, seed, params)
        vals = evaluate_array(det, pts).values
        if np.any(vals[np.isfinite(vals)] == 0) or np.any(np.abs(vals[np.isfinite(vals)]) < 1e-12):
            raise TransformError("Jacobian determinant vanishes on the declared domain")

    def _points(self, samples, seed, params):
        names = sorted(self.domain)
        pts = sample_points(names, samples, seed, self.domain)
        for o in self.old:
            pts.setdefault(o, np.zeros(samples))
        for k, v in (params or {}).items():
            pts.setdefault(k, np.full(samples, float(v)))
        return pts

    def apply(self, e: Expr) -> Expr:
        """Substitute old coordinates in ``e`` by expressions of the new (for an inverse map)."""
        return substitute_many(e, dict(zip(self.new, self.exprs)))

    def image_box(self, samples: int = 64, seed: int = DEFAULT_SEED, params: Mapping | None = None) -> dict:
        """Bounding box of the sampled image of ``domain`` in the new coordinates."""
        pts = self._points(samples, seed, params)
        out = {}
        for n, e in zip(self.new, self.exprs):
            v = evaluate_array(e, {k: pts[k] for k in e.free_symbols}).values if e.free_symbols else np.full(samples, float(e.value))
            v = v[np.isfinite(v)]
            out[n] = (float(v.min()), float(v.max()))
        return out


def compose(first: ChartTransform, second: ChartTransform) -> ChartTransform:
    """The transform doing ``first`` and then ``second``."""
    if tuple(second.old) != tuple(first.new):
        raise TransformError("second transform must start from the coordinates the first produces")
    mapping = dict(zip(first.new, first.exprs))
    exprs = tuple(substitute_many(e, mapping) for e in second.exprs)
    return ChartTransform(first.old, second.new, exprs, first.domain)


def _check_roundtrip(forward: ChartTransform, inverse: ChartTransform, params: Mapping, samples: int, seed: int):
    # inverse maps new -> old; forward(inverse(y)) must be y on inverse.domain
    mapping = dict(zip(inverse.new, inverse.exprs))
    values = {k: Num(v) for k, v in params.items()}
    for n, e in zip(forward.new, forward.exprs):
        resid = substitute_many(substitute_many(e, mapping) - Sym(n), values)
        resid = simplify(resid)
        if not prob_zero_test(resid, samples=samples, seed=seed, domain=inverse.domain):
            raise TransformError(f"transform and inverse disagree in coordinate {n}")


def pullback_metric(
    g: MetricTensor,
    transform: ChartTransform,
    inverse: ChartTransform,
    *,
    samples: int = 64,
    seed: int = DEFAULT_SEED,
) -> MetricTensor:
    """Metric in the new coordinates of ``transform``.

    ``inverse`` expresses the old coordinates through the new ones
    (``inverse.old == transform.new``); the composition is sampled on
    ``inverse.domain`` and the Jacobian of ``transform`` on its domain.
    """
    if tuple(transform.old) != tuple(g.coords):
        raise TransformError(f"transform starts from {transform.old}, metric uses {g.coords}")
    if tuple(inverse.old) != tuple(transform.new) or tuple(inverse.new) != tuple(transform.old):
        raise TransformError("inverse must map the new coordinates back to the old ones")
    params = dict(g.params)
    if transform.domain:
        transform.check_jacobian(samples, seed, params)
    _check_roundtrip(transform, inverse, params, samples, seed)
    n = g.dim
    mapping = dict(zip(inverse.new, inverse.exprs))
    jac = [[to_rat(differentiate(inverse.exprs[mu], a)) for a in inverse.old] for mu in range(n)]
    old = [[to_rat(substitute_many(g[mu, nu], mapping)) for nu in range(n)] for mu in range(n)]
    rows = {}
    for a in range(n):
        for b in range(a, n):
            acc = to_rat(Num(0))
            for mu in range(n):
                if jac[mu][a].is_zero:
                    continue
                for nu in range(n):
                    if jac[nu][b].is_zero or old[mu][nu].is_zero:
                        continue
                    acc = acc + jac[mu][a] * jac[nu][b] * old[mu][nu]
            rows[(a, b)] = acc.to_expr()
    return MetricTensor.from_upper(tuple(inverse.old), rows, g.params)


def conformal_chain(sol: AnsatzSolution, domain: Mapping | None = None, new=("T", "X")) -> tuple:
    """Transforms to the null-like chart ``(eta, xi)`` and then ``(T, X)``.

    ``eta = t``, ``xi = Lambda t / 3 - 2 / a``, then ``T = (xi + eta)/2`` and
    ``X = (xi - eta)/2``.  Returns ``(step1, step1_inverse, step2,
    step2_inverse)``; the first inverse needs ``x`` as a function of ``t``
    and ``a``, which catalog entries provide.
    """
    entry = CATALOG.get(sol.name)
    if entry is None or entry.x_of_a is None:
        raise TransformError(f"no inverse of a(t, x) known for {sol.name!r}")
    from .metriclang import parse_expression

    t, x, y, z = sol.coords
    lam = sol.lam
    domain = dict(domain or {t: (1.0, 2.0), x: (1.0, 2.0), y: (-2.0, 2.0), z: (-2.0, 2.0)})
    eta, xi = Sym("eta"), Sym("xi")
    step1 = ChartTransform((t, x, y, z), ("eta", "xi", y, z), (Sym(t), lam * Sym(t) / 3 - 2 / sol.a, Sym(y), Sym(z)), domain)
    box1 = step1.image_box(params=sol.params)
    a_val = 6 / (lam * eta - 3 * xi)
    x_expr = substitute_many(parse_expression(entry.x_of_a), {"A": a_val, "t": eta})
    inv1 = ChartTransform(("eta", "xi", y, z), (t, x, y, z), (eta, x_expr, Sym(y), Sym(z)), box1)
    T, X = new
    step2 = ChartTransform(("eta", "xi", y, z), (T, X, y, z), ((xi + eta) / 2, (xi - eta) / 2, Sym(y), Sym(z)), box1)
    box2 = step2.image_box(params=sol.params)
    inv2 = ChartTransform((T, X, y, z), ("eta", "xi", y, z), (Sym(T) - Sym(X), Sym(T) + Sym(X), Sym(y), Sym(z)), box2)
    return step1, inv1, step2, inv2


def conformal_factor(lam, new=("T", "X")) -> Expr:
    """``a = 6 / (T (Lambda - 3) - X (Lambda + 3))`` in the flat chart."""
    lam = _param(lam)
    T, X = Sym(new[0]), Sym(new[1])
    return simplify(6 / (T * (lam - 3) - X * (lam + 3)))


def signature_ok(g: MetricTensor, binding: Mapping[str, float]) -> bool:
    return g.signature_at(binding) == (1, -1, -1, -1)


__all__ = [
    "AnsatzSolution",
    "CATALOG",
    "CatalogEntry",
    "CatalogError",
    "ChartTransform",
    "DegenerateAnsatzError",
    "ParameterConstraintError",
    "Solution",
    "TransformError",
    "build_metric",
    "builtin",
    "closed_form_r22",
    "compose",
    "conformal_chain",
    "conformal_factor",
    "derive_b",
    "from_spec",
    "load_solution",
    "make_solution",
    "pullback_metric",
]
