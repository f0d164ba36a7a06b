"""Numeric scans of a solution over a rectangular (t, x) lattice.

Every field is evaluated with numpy over the whole lattice at once.  A cell
is *undefined* exactly when evaluation hits a pole there; undefined cells
are kept (as ``nan``) rather than dropped so that reports line up with the
lattice in row-major order, ``t`` outer and ``x`` inner.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .ansatz import Solution
from .curvature import CurvatureBundle, MetricTensor, compute_curvature
from .symcore import Expr, Num, Pow, Sym, evaluate_array, simplify, substitute_many

DEFAULT_K_THRESHOLD = 1e6
DEFAULT_DET_THRESHOLD = 1e-8
SIGN_ZERO = 1e-12


class GridSpecError(ValueError):
    """Malformed grid description."""


class UnboundParameterError(ValueError):
    """A constant of the solution has no numeric value."""


@dataclass(frozen=True)
class Grid2D:
    """Regular lattice including both endpoints of each range."""

    t0: float
    t1: float
    nt: int
    x0: float
    x1: float
    nx: int

    def __post_init__(self):
        if self.nt < 2 or self.nx < 2:
            raise GridSpecError("each axis needs at least 2 points")
        if not (self.t1 > self.t0 and self.x1 > self.x0):
            raise GridSpecError("ranges must be nonempty (lo < hi)")

    @classmethod
    def parse(cls, text: str) -> "Grid2D":
        """``"t0:t1:nt,x0:x1:nx"``; bounds may use ``pi`` (``-pi/2``, ``12*pi``)."""
        parts = text.split(",")
        if len(parts) != 2:
            raise GridSpecError(f"expected 't0:t1:nt,x0:x1:nx', got {text!r}")
        vals = []
        for part in parts:
            fields = part.split(":")
            if len(fields) != 3:
                raise GridSpecError(f"expected lo:hi:count, got {part!r}")
            lo, hi = (_bound(f) for f in fields[:2])
            try:
                n = int(fields[2])
            except ValueError:
                raise GridSpecError(f"bad point count {fields[2]!r}") from None
            vals += [lo, hi, n]
        return cls(*vals)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.nt)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x0, self.x1, self.nx)

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / (self.nt - 1)

    @property
    def dx(self) -> float:
        return (self.x1 - self.x0) / (self.nx - 1)

    def mesh(self) -> tuple:
        return np.meshgrid(self.t, self.x, indexing="ij")

    def spec(self) -> str:
        return f"{self.t0!r}:{self.t1!r}:{self.nt},{self.x0!r}:{self.x1!r}:{self.nx}"


def _bound(text: str) -> float:
    from .metriclang import ParseError, parse_expression

    try:
        e = parse_expression(text)
    except ParseError as err:
        raise GridSpecError(f"bad grid bound {text!r}: {err}") from None
    if not isinstance(e, Num):
        raise GridSpecError(f"grid bound {text!r} is not a number")
    return float(e.value)


@dataclass
class GridReport:
    """Values of one field on a lattice; ``values`` has shape ``(nt, nx)``
    or ``(nt, nx, k)`` for multi-valued fields such as slope pairs."""

    grid: Grid2D
    field: str
    values: np.ndarray
    kind: str  # "real" | "sign" | "slope" | "flag"
    meta: dict = field(default_factory=dict)

    @property
    def defined(self) -> np.ndarray:
        v = self.values
        if v.ndim == 3:
            return np.all(np.isfinite(v), axis=-1)
        return np.isfinite(v)

    def column(self) -> np.ndarray:
        """The scalar column written to CSV (last component for pairs)."""
        return self.values[..., -1] if self.values.ndim == 3 else self.values

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"t,x,{self.field}\n")
        tt, xx = self.grid.mesh()
        col = self.column()
        for i in range(self.grid.nt):
            for j in range(self.grid.nx):
                buf.write(f"{_g(tt[i, j])},{_g(xx[i, j])},{_g(col[i, j])}\n")
        return buf.getvalue()

    def summary(self) -> dict:
        d = self.defined
        out = {
            "field": self.field,
            "kind": self.kind,
            "grid": self.grid.spec(),
            "points": int(d.size),
            "undefined": int((~d).sum()),
        }
        if self.kind == "sign":
            v = self.values
            out["counts"] = {
                "+": int((v > 0).sum()),
                "-": int((v < 0).sum()),
                "0": int((v == 0).sum()),
                "undefined": int(np.isnan(v).sum()),
            }
        out.update(self.meta)
        return out


def _g(v) -> str:
    v = float(v)
    if np.isnan(v):
        return "nan"
    return "%.17g" % v


# ---------------------------------------------------------------------------
# evaluation helpers
# ---------------------------------------------------------------------------


def _numeric(sol: Solution, e: Expr) -> Expr:
    """``e`` with the solution's constants substituted."""
    values = {k: Num(v) for k, v in _param_values(sol).items()}
    return substitute_many(e, values) if values else e


def _param_values(sol: Solution) -> dict:
    out = {}
    for k, v in (("Lambda", sol.lam), ("m", sol.m)):
        if isinstance(v, Num):
            out[k] = v.value
    for k, v in sol.metric.params.items():
        out.setdefault(k, v)
    return out


def _on_grid(sol: Solution, e: Expr, grid: Grid2D) -> np.ndarray:
    e = _numeric(sol, e)
    t, x = sol.coords[0], sol.coords[1]
    extra = e.free_symbols - {t, x}
    if extra:
        raise UnboundParameterError(f"no numeric value for {', '.join(sorted(extra))}; bind it before gridding")
    tt, xx = grid.mesh()
    binding = {t: tt, x: xx}
    res = evaluate_array(e, {k: binding[k] for k in e.free_symbols}) if e.free_symbols else None
    if res is None:
        return np.full((grid.nt, grid.nx), float(e.value))
    return np.broadcast_to(res.values, (grid.nt, grid.nx)).copy()


def _check_plane(sol: Solution):
    # (t, x) block fields may depend on t, x and constants only
    m = sol.metric
    t, x = sol.coords[0], sol.coords[1]
    for i, j in ((0, 0), (0, 1)):
        stray = m[i, j].free_symbols - {t, x} - set(_param_values(sol)) - {"Lambda", "m"}
        if stray:
            raise ValueError(f"g{i}{j} depends on {sorted(stray)}; (t, x) scans need a (t, x)-only block")


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------


def g00_sign_map(sol: Solution, grid: Grid2D) -> GridReport:
    """sign(g00): +1, -1, 0 (``|g00| <= 1e-12``) or nan where undefined."""
    _check_plane(sol)
    v = _on_grid(sol, sol.metric[0, 0], grid)
    s = np.sign(v)
    s[np.abs(v) <= SIGN_ZERO] = 0.0
    s[~np.isfinite(v)] = np.nan
    return GridReport(grid, "sign_g00", s, "sign", _meta(sol))


def null_slope_expr(g: MetricTensor) -> Expr:
    """``dt/dx = -2 g01 / g00`` of the non-trivial null branch."""
    return simplify(-2 * g[0, 1] / g[0, 0])


def null_slope_field(sol: Solution, grid: Grid2D) -> GridReport:
    """Both null branches of ``g00 dt^2 + 2 g01 dt dx = 0`` as dt/dx.

    Component 0 is the ``dt = 0`` branch (slope 0), component 1 is
    ``-2 g01 / g00``; both are nan where ``g00`` vanishes or is undefined.
    """
    _check_plane(sol)
    g00 = _on_grid(sol, sol.metric[0, 0], grid)
    g01 = _on_grid(sol, sol.metric[0, 1], grid)
    bad = ~np.isfinite(g00) | ~np.isfinite(g01) | (np.abs(g00) <= SIGN_ZERO)
    with np.errstate(all="ignore"):
        slope = -2.0 * g01 / g00
    slope[bad] = np.nan
    flat = np.zeros_like(slope)
    flat[bad] = np.nan
    return GridReport(grid, "dtdx", np.stack([flat, slope], axis=-1), "slope", _meta(sol))


def scalar_field(sol: Solution, e: Expr, grid: Grid2D, name: str) -> GridReport:
    return GridReport(grid, name, _on_grid(sol, e, grid), "real", _meta(sol))


def _meta(sol: Solution) -> dict:
    return {"solution": sol.name, "params": {k: float(v) for k, v in sorted(_param_values(sol).items())}}


# ---------------------------------------------------------------------------
# singularities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Locus:
    kind: str  # "physical" | "chart"
    t: float
    x: float
    i: int
    j: int
    kretschmann: float
    det: float

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "t": self.t,
            "x": self.x,
            "index": [self.i, self.j],
            "abs_kretschmann": self.kretschmann,
            "abs_det": self.det,
        }


@dataclass
class SingularLoci:
    """Scan result.

    ``physical`` holds interior lattice cells where ``|K|`` exceeds the
    threshold and is a local maximum over its 8 neighbours, plus cells where
    ``K`` itself is undefined (a pole hit exactly).  ``edge`` holds cells on
    the lattice boundary that would qualify if the lattice ended there: the
    blow-up continues outside the scanned window, so no locus is claimed.
    ``chart`` holds cells with ``|det g|`` below its threshold while ``|K|``
    stays below the curvature threshold.
    """

    grid: Grid2D
    physical: list
    edge: list
    chart: list
    k_threshold: float
    det_threshold: float
    meta: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "grid": self.grid.spec(),
            "k_threshold": self.k_threshold,
            "det_threshold": self.det_threshold,
            "physical": [p.as_dict() for p in self.physical],
            "edge": [p.as_dict() for p in self.edge],
            "chart": [p.as_dict() for p in self.chart],
            **self.meta,
        }


def _neighbour_stack(v: np.ndarray, fill: float) -> np.ndarray:
    p = np.pad(v, 1, constant_values=fill)
    nt, nx = v.shape
    out = []
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            out.append(p[1 + di : 1 + di + nt, 1 + dj : 1 + dj + nx])
    return np.stack(out)


def local_maxima(v: np.ndarray) -> np.ndarray:
    """Cells ``>=`` all 8 neighbours and ``>`` at least one.

    Undefined neighbours count as larger (a pole nearby is higher still);
    cells outside the lattice do not take part, so boundary cells can
    qualify and must be told apart by the caller.
    """
    w = np.where(np.isnan(v), np.inf, v)
    ge = np.all(w[None] >= _neighbour_stack(w, -np.inf), axis=0)
    gt = np.any(w[None] > _neighbour_stack(w, np.inf), axis=0)
    return ge & gt & np.isfinite(v)


def singularity_scan(
    sol: Solution,
    grid: Grid2D,
    k_threshold: float = DEFAULT_K_THRESHOLD,
    det_threshold: float = DEFAULT_DET_THRESHOLD,
    bundle: CurvatureBundle | None = None,
) -> SingularLoci:
    """Kretschmann and determinant scan of the (t, x) plane.

    Coordinates other than t, x are set to 0 (the ansatz depends on t, x
    only).
    """
    if k_threshold <= 0 or det_threshold <= 0:
        raise ValueError("thresholds must be positive")
    if bundle is None:
        bundle = compute_curvature(sol.metric)
    K = np.abs(_on_plane(sol, bundle.kretschmann, grid))
    det = np.abs(_on_plane(sol, sol.metric.determinant, grid))
    tt, xx = grid.mesh()

    peaks = local_maxima(K) & (K > k_threshold)
    border = np.zeros_like(peaks)
    border[0, :] = border[-1, :] = border[:, 0] = border[:, -1] = True
    poles = np.isnan(K)

    def loci(mask, kind):
        idx = np.argwhere(mask)
        return [Locus(kind, float(tt[i, j]), float(xx[i, j]), int(i), int(j), float(K[i, j]), float(det[i, j])) for i, j in idx]

    physical = loci((peaks & ~border) | poles, "physical")
    edge = loci(peaks & border, "physical-edge")
    chart = loci((det < det_threshold) & (K <= k_threshold), "chart")
    return SingularLoci(grid, physical, edge, chart, k_threshold, det_threshold, _meta(sol))


def _on_plane(sol: Solution, e: Expr, grid: Grid2D) -> np.ndarray:
    rest = {c: Num(0) for c in sol.coords[2:]}
    return _on_grid(sol, substitute_many(e, rest), grid)


# ---------------------------------------------------------------------------
# slices
# ---------------------------------------------------------------------------


def induced_slice(sol_or_metric, fixed: Mapping[str, object]) -> MetricTensor:
    """Metric on the surface where the coordinates in ``fixed`` are constant."""
    g = sol_or_metric.metric if isinstance(sol_or_metric, Solution) else sol_or_metric
    unknown = set(fixed) - set(g.coords)
    if unknown:
        raise ValueError(f"unknown coordinate(s): {sorted(unknown)}")
    if not fixed:
        raise ValueError("fix at least one coordinate")
    if len(fixed) >= g.dim:
        raise ValueError("cannot fix every coordinate")
    keep = [i for i, c in enumerate(g.coords) if c not in fixed]
    values = {k: v if isinstance(v, Expr) else Num(v) for k, v in fixed.items()}
    rows = {}
    for a, i in enumerate(keep):
        for b in range(a, len(keep)):
            j = keep[b]
            e = simplify(substitute_many(g[i, j], values))
            if _has_zero_pole(e):
                raise ValueError(f"g{i}{j} has a pole on the slice {fixed}")
            rows[(a, b)] = e
    return MetricTensor.from_upper(tuple(g.coords[i] for i in keep), rows, g.params)


def _has_zero_pole(e: Expr) -> bool:
    if isinstance(e, Pow) and isinstance(e.base, Num) and e.base.value == 0:
        return True
    return not isinstance(e, (Num, Sym)) and any(_has_zero_pole(a) for a in e.args)


def parse_assignment(text: str) -> dict:
    """``"t=0,x=pi/2"`` -> ``{"t": 0.0, "x": 1.5707963267948966}``."""
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.+)", part)
        if not m:
            raise GridSpecError(f"expected name=value, got {part!r}")
        if m.group(1) in out:
            raise GridSpecError(f"{m.group(1)} assigned twice")
        out[m.group(1)] = _bound(m.group(2))
    return out


__all__ = [
    "DEFAULT_DET_THRESHOLD",
    "DEFAULT_K_THRESHOLD",
    "Grid2D",
    "GridReport",
    "GridSpecError",
    "Locus",
    "SingularLoci",
    "UnboundParameterError",
    "g00_sign_map",
    "induced_slice",
    "local_maxima",
    "null_slope_expr",
    "null_slope_field",
    "parse_assignment",
    "scalar_field",
    "singularity_scan",
]
