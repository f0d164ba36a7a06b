"""Acceptance suite.

Each test carries a ``criterion`` marker; the terminal summary prints one
PASS/FAIL line per criterion (a criterion passes when all of its tests do).
Tolerances are the fixed defaults of the zero test (32 seeded points,
relative 1e-9) unless a check states its own.
"""

from __future__ import annotations

import math
import os
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest
from numpy.testing import assert_allclose

import _cache
from _exprgen import fd_relative_error, random_exprs
from conftest import CATALOG_NAMES
from lambdavac.analysis import Grid2D, g00_sign_map, null_slope_expr, null_slope_field, singularity_scan
from lambdavac.ansatz import builtin, conformal_chain, pullback_metric
from lambdavac.cli import main
from lambdavac.curvature import einstein_residual
from lambdavac.newmanpenrose import canonical_tetrad, classify_constant, fit_psi2, weyl_scalars
from lambdavac.symcore import Num, Sym, cos, evaluate_array, prob_zero_test, sin, symbols

t, x, y, z, Lam, m = symbols("t x y z Lambda m")

criterion = pytest.mark.criterion


def _values(e, pts: dict) -> np.ndarray:
    n = len(next(iter(pts.values())))
    if isinstance(e, Num):
        return np.full(n, float(e.value))
    return np.broadcast_to(evaluate_array(e, {k: pts[k] for k in e.free_symbols}).values, (n,))


def _nondegenerate_points(sol, count: int, seed: int, extra: dict | None = None) -> dict:
    """Seeded points with ``|det g| > 1e-6`` where every metric entry is finite."""
    rng = np.random.default_rng(seed)
    keep: dict = {k: [] for k in sol.coords}
    for k in extra or {}:
        keep[k] = []
    while len(keep[sol.coords[0]]) < count:
        n = 4 * count
        pts = {
            sol.coords[0]: rng.uniform(0.5, 6.0, n),
            sol.coords[1]: rng.uniform(-1.4, 1.4, n),
            sol.coords[2]: rng.uniform(-1.0, 1.0, n),
            sol.coords[3]: rng.uniform(-1.0, 1.0, n),
        }
        for k, (lo, hi) in (extra or {}).items():
            pts[k] = rng.uniform(lo, hi, n)
        det = _values(sol.metric.determinant, pts)
        ok = np.isfinite(det) & (np.abs(det) > 1e-6)
        for k in keep:
            keep[k].extend(pts[k][ok].tolist())
    return {k: np.array(v[:count]) for k, v in keep.items()}


def _cases():
    return [(name, lam, mv) for name in CATALOG_NAMES for lam, mv in _cache.entry_params(name)]


def _case_id(case) -> str:
    name, lam, mv = case
    return f"{name}-L{lam}-m{mv}"


# ---------------------------------------------------------------------------
# 1. vacuum field equations
# ---------------------------------------------------------------------------


@criterion(1, "R_mn - Lambda g_mn vanishes for every catalog entry and parameter set")
@pytest.mark.parametrize("case", _cases(), ids=_case_id)
def test_vacuum_field_equations(case):
    name, lam, mv = case
    sol = _cache.solution(name, lam, mv)
    res = einstein_residual(sol.metric, Num(lam), _cache.bundle(name, lam, mv))
    failing = [(i, j) for i in range(4) for j in range(i, 4) if not prob_zero_test(res[i, j])]
    assert failing == []


# ---------------------------------------------------------------------------
# 2. scalar curvature
# ---------------------------------------------------------------------------


@criterion(2, "|R - 4 Lambda| <= 1e-9 (1 + |Lambda|) at 100 seeded points per entry")
@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_scalar_curvature(name):
    lam, mv = _cache.default_params(name)
    sol = _cache.solution(name, lam, mv)
    b = _cache.bundle(name, lam, mv)
    pts = _nondegenerate_points(sol, 100, seed=20)
    tol = 1e-9 * (1 + abs(float(lam)))
    # symbolic scalar, sampled
    assert np.max(np.abs(_values(b.scalar, pts) - 4 * float(lam))) <= tol
    # trace of the sampled Ricci tensor with a numerically inverted metric
    ric = np.stack([np.stack([_values(b.ricci[i, j], pts) for j in range(4)]) for i in range(4)])
    for k in range(100):
        pt = {c: pts[c][k] for c in sol.coords}
        gi = np.linalg.inv(sol.metric.numeric(pt))
        r = float(np.einsum("ab,ab->", gi, ric[:, :, k]))
        assert abs(r - 4 * float(lam)) <= tol * max(1.0, np.abs(ric[:, :, k]).max())


# ---------------------------------------------------------------------------
# 3. Kretschmann invariant
# ---------------------------------------------------------------------------


@criterion(3, "K = (8 Lambda^2 a^6 + 36 m^2) / (3 a^6); space_periodic K(x=0) = 5868/2187")
@pytest.mark.parametrize("case", _cases(), ids=_case_id)
def test_kretschmann_closed_form(case):
    name, lam, mv = case
    sol = _cache.solution(name, lam, mv)
    a = sol.a
    golden = (8 * Num(lam) ** 2 * a**6 + 36 * Num(mv) ** 2) / (3 * a**6)
    assert prob_zero_test(_cache.bundle(name, lam, mv).kretschmann - golden)


@criterion(3, "K = (8 Lambda^2 a^6 + 36 m^2) / (3 a^6); space_periodic K(x=0) = 5868/2187")
def test_kretschmann_spot_value():
    K = _cache.bundle("space_periodic", 1, 1).kretschmann
    assert_allclose(_values(K, {"x": np.array([0.0])})[0], 5868 / 2187, rtol=1e-12)


# ---------------------------------------------------------------------------
# 4. Riemann components
# ---------------------------------------------------------------------------

PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def _golden_riemann():
    a = 2 + cos(x)
    return {
        (0, 1, 0, 1): -sin(x) ** 2 * (Lam * a**3 + 3 * m) / (3 * a**3),
        (0, 2, 0, 2): -(2 * Lam**2 * a**6 + 3 * Lam * m * a**3 - 9 * m**2) / (18 * a**2),
        (0, 3, 0, 3): -(2 * Lam**2 * a**6 + 3 * Lam * m * a**3 - 9 * m**2) / (18 * a**2),
        (0, 2, 1, 2): sin(x) * (2 * Lam * a**3 - 3 * m) / (6 * a),
        (0, 3, 1, 3): sin(x) * (2 * Lam * a**3 - 3 * m) / (6 * a),
        (2, 3, 2, 3): Lam * a**4 / 3 + a * m,
    }


@criterion(4, "space_periodic Riemann components match the closed forms; all others vanish")
def test_riemann_golden_components():
    sol = _cache.solution("space_periodic", "Lambda", "m")
    R = _cache.bundle("space_periodic", "Lambda", "m").riemann
    pts = _nondegenerate_points(sol, 50, seed=40, extra={"Lambda": (0.25, 3.0), "m": (0.25, 3.0)})
    for idx, g in _golden_riemann().items():
        assert_allclose(_values(R[idx], pts), _values(g, pts), rtol=1e-9, atol=1e-12, err_msg=str(idx))


@criterion(4, "space_periodic Riemann components match the closed forms; all others vanish")
def test_riemann_remaining_components_vanish():
    R = _cache.bundle("space_periodic", "Lambda", "m").riemann
    golden = _golden_riemann()
    rest = [p + q for k, p in enumerate(PAIRS) for q in PAIRS[k:] if p + q not in golden]
    assert len(rest) == 15
    assert [idx for idx in rest if not prob_zero_test(R[idx])] == []


# ---------------------------------------------------------------------------
# 5. Weyl scalars
# ---------------------------------------------------------------------------


def _psi(name, lam, mv):
    sol = _cache.solution(name, lam, mv)
    return sol, weyl_scalars(_cache.bundle(name, lam, mv), canonical_tetrad(sol.metric, a=sol.a))


@criterion(5, "Weyl scalars: only Psi2 survives, paper closed form and constant term", part="Psi0, Psi1, Psi3, Psi4, Im Psi2 vanish at seeded points")
@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_weyl_scalars_vanish(name):
    lam, mv = _cache.default_params(name)
    sol, psi = _psi(name, lam, mv)
    pts = _nondegenerate_points(sol, 32, seed=50)
    for k in (0, 1, 3, 4):
        for part in psi[k]:
            assert np.max(np.abs(_values(part, pts))) <= 1e-9
    assert np.max(np.abs(_values(psi[2][1], pts))) <= 1e-9


@criterion(5, "Weyl scalars: only Psi2 survives, paper closed form and constant term", part="Psi2 + Lambda/9 - m/(6 a^3) vanishes")
@pytest.mark.parametrize("name", ["space_periodic", "regular_periodic", "singular_periodic"])
def test_psi2_closed_form(name):
    lam, mv = _cache.default_params(name)
    sol, psi = _psi(name, lam, mv)
    assert prob_zero_test(psi[2][0] + Num(lam) / 9 - Num(mv) / (6 * sol.a**3))


@criterion(5, "Weyl scalars: only Psi2 survives, paper closed form and constant term", part="constant term of Psi2 is one of -Lambda/9, -2 Lambda/9")
@pytest.mark.parametrize("name", ["space_periodic", "singular_periodic"])
def test_psi2_constant_term(name):
    sol, psi = _psi(name, 1, 1)
    fit = fit_psi2(psi[2][0], sol.a, sol.params)
    verdict = classify_constant(fit, 1.0)
    print(f"{name}: Psi2 = {fit.alpha:.3g} + {fit.beta:.6g} / a^3 -> constant term {verdict}")
    assert fit.max_residual < 1e-9
    assert verdict in ("-Lambda/9", "-2*Lambda/9")


# ---------------------------------------------------------------------------
# 6. Lambda = 0
# ---------------------------------------------------------------------------


@criterion(6, "Lambda = 0 with a = 2 + cos x, m = 1 is Ricci flat")
def test_lambda_zero_is_ricci_flat():
    sol = _cache.solution("lambda_zero", 0, 1)
    assert prob_zero_test(sol.a - (2 + cos(x)))
    ric = _cache.bundle("lambda_zero", 0, 1).ricci
    assert [(i, j) for i in range(4) for j in range(4) if not prob_zero_test(ric[i, j])] == []


# ---------------------------------------------------------------------------
# 7. conformal chart
# ---------------------------------------------------------------------------


@criterion(7, "m = 0 solution pulls back to a^2 diag(1, -1, -1, -1)")
@pytest.mark.parametrize("lam", [1, Fraction(1, 2), 2])
def test_conformal_chart(lam):
    sol = builtin("conformal_flat", lam, 0)
    s1, i1, s2, i2 = conformal_chain(sol)
    h = pullback_metric(pullback_metric(sol.metric, s1, i1), s2, i2)
    T, X = Sym("T"), Sym("X")
    a = 6 / (T * (Num(lam) - 3) - X * (Num(lam) + 3))
    diag = (1, -1, -1, -1)
    for i in range(4):
        for j in range(4):
            target = a**2 * diag[i] if i == j else Num(0)
            assert prob_zero_test(h[i, j] - target, domain=i2.domain), (i, j)


# ---------------------------------------------------------------------------
# 8. null slopes
# ---------------------------------------------------------------------------

TAU = Lam * t / 6


@criterion(8, "null slopes -2 g01 / g00", part="space_periodic closed form and 12/11")
def test_null_slope_space_periodic():
    a = 2 + cos(x)
    golden = 6 * sin(x) * a / (Lam * a**3 + 3 * m)
    assert prob_zero_test(null_slope_expr(_cache.solution("space_periodic", "Lambda", "m").metric) - golden)
    r = null_slope_field(_cache.solution("space_periodic", 1, 1), Grid2D(0, 1, 2, 0, math.pi / 2, 2))
    assert_allclose(r.values[0, 1, 1], 12 / 11, rtol=1e-14)


@criterion(8, "null slopes -2 g01 / g00", part="regular_periodic closed form")
def test_null_slope_regular_periodic():
    c, s = 2 + cos(x), 2 + sin(TAU)
    golden = 6 * c * s**2 * sin(x) / (Lam * c**2 * s * cos(TAU) + Lam * c**3 * s**3 + 3 * m)
    assert prob_zero_test(null_slope_expr(_cache.solution("regular_periodic", "Lambda", "m").metric) - golden)


@criterion(8, "null slopes -2 g01 / g00", part="singular_periodic closed form as printed (sin, not sin^3)")
def test_null_slope_singular_periodic_as_printed():
    golden = 6 * cos(x) * sin(x) * sin(TAU) ** 2 / (Lam * (cos(x) ** 2 * sin(TAU) * cos(TAU) + cos(x) ** 3 * sin(TAU) + 3 * m / Lam))
    assert prob_zero_test(null_slope_expr(_cache.solution("singular_periodic", "Lambda", "m").metric) - golden)


@criterion(8, "null slopes -2 g01 / g00", part="singular_periodic closed form with sin^3")
def test_null_slope_singular_periodic_corrected():
    golden = 6 * cos(x) * sin(x) * sin(TAU) ** 2 / (Lam * (cos(x) ** 2 * sin(TAU) * cos(TAU) + cos(x) ** 3 * sin(TAU) ** 3 + 3 * m / Lam))
    assert prob_zero_test(null_slope_expr(_cache.solution("singular_periodic", "Lambda", "m").metric) - golden)


# ---------------------------------------------------------------------------
# 9. singularity scan
# ---------------------------------------------------------------------------


def _near_known_loci(loci, grid) -> list:
    bad = []
    for p in loci:
        near_x = abs(abs(p.x) - math.pi / 2) <= grid.dx
        near_t = abs(p.t - 6 * math.pi) <= grid.dt
        if not (near_x or near_t):
            bad.append((p.t, p.x))
    return bad


@criterion(9, "physical loci of singular_periodic lie at x = +-pi/2 or t = 6 pi; none for space_periodic", part="spec window")
def test_singularity_scan_spec_window():
    grid = Grid2D.parse("1:12:400,-1.4:1.4:400")
    start = time.perf_counter()
    loci = singularity_scan(builtin("singular_periodic", 1, 1), grid)
    elapsed = time.perf_counter() - start
    print(f"scan: {elapsed:.2f} s, {len(loci.physical)} physical, {len(loci.edge)} edge, {len(loci.chart)} chart")
    assert elapsed <= 30
    assert _near_known_loci(loci.physical, grid) == []


@criterion(9, "physical loci of singular_periodic lie at x = +-pi/2 or t = 6 pi; none for space_periodic", part="window containing the loci")
def test_singularity_scan_wide_window():
    grid = Grid2D.parse("1:40:400,-3:3:400")
    loci = singularity_scan(_cache.solution("singular_periodic", 1, 1), grid, bundle=_cache.bundle("singular_periodic", 1, 1))
    assert loci.physical
    assert any(abs(abs(p.x) - math.pi / 2) <= grid.dx for p in loci.physical)
    assert any(abs(p.t - 6 * math.pi) <= grid.dt for p in loci.physical)
    bad = []
    for p in loci.physical:
        near_x = abs(abs(p.x) - math.pi / 2) <= grid.dx
        near_t = min(abs(p.t - 6 * k * math.pi) for k in (1, 2)) <= grid.dt
        if not (near_x or near_t):
            bad.append((p.t, p.x))
    assert bad == []


@criterion(9, "physical loci of singular_periodic lie at x = +-pi/2 or t = 6 pi; none for space_periodic", part="space_periodic")
@pytest.mark.parametrize("spec", ["1:12:400,-1.4:1.4:400", "0:100:300,-10:10:300", "-5:5:101,-pi:pi:101"])
def test_space_periodic_has_no_physical_loci(spec):
    loci = singularity_scan(_cache.solution("space_periodic", 1, 1), Grid2D.parse(spec), bundle=_cache.bundle("space_periodic", 1, 1))
    assert loci.physical == [] and loci.edge == []


# ---------------------------------------------------------------------------
# 10. sign rule
# ---------------------------------------------------------------------------


@criterion(10, "sign(g00) = sign(cos x sin(Lambda t / 6)) when m >= Lambda / 2")
@pytest.mark.parametrize("lam, mv", [(1, 1), (1, Fraction(1, 2)), (2, 1), (Fraction(1, 2), 2), (3, 2)])
def test_sign_rule(lam, mv):
    grid = Grid2D(0, 12 * math.pi / float(lam), 200, -math.pi, math.pi, 200)
    rep = g00_sign_map(builtin("singular_periodic", lam, mv), grid)
    tt, xx = grid.mesh()
    rule = np.sign(np.cos(xx) * np.sin(float(lam) * tt / 6))
    ok = rep.defined
    assert ok.sum() >= 0.99 * ok.size
    assert np.array_equal(rep.values[ok], rule[ok])


# ---------------------------------------------------------------------------
# 11. derivative oracle
# ---------------------------------------------------------------------------


@criterion(11, "symbolic derivative vs central difference on 100 seeded expressions")
def test_derivative_oracle():
    rng = np.random.default_rng(110)
    pool = iter(random_exprs(400, seed=111))
    errors, replaced = [], 0
    while len(errors) < 100:
        e = next(pool)
        var = sorted(e.free_symbols)[len(errors) % len(e.free_symbols)]
        err = fd_relative_error(e, var, rng)
        if err is None:
            replaced += 1
            continue
        errors.append(err)
    print(f"max relative error {max(errors):.3g} over 100 expressions ({replaced} replaced: no point away from poles)")
    assert max(errors) <= 1e-6


# ---------------------------------------------------------------------------
# 12. determinism
# ---------------------------------------------------------------------------

RUNS = [
    ["verify", "--builtin", "singular_periodic", "--seed", "5"],
    ["weyl", "--builtin", "space_periodic", "--at", "t=1,x=0.5", "--seed", "5"],
    ["signmap", "--builtin", "singular_periodic", "--grid", "0:12*pi:40,-pi:pi:40", "--format", "csv"],
    ["singularities", "--builtin", "singular_periodic", "--grid", "1:12:60,-1.4:1.4:60"],
]


@criterion(12, "repeated CLI runs produce byte-identical reports")
@pytest.mark.parametrize("argv", RUNS, ids=[r[0] for r in RUNS])
def test_cli_determinism(argv, tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"in{k}"
        main([*argv, "--out", str(path)])
        outs.append(path.read_bytes())
    for k, hashseed in enumerate(("0", "4242")):
        path = tmp_path / f"sub{k}"
        env = {**os.environ, "PYTHONHASHSEED": hashseed}
        subprocess.run([sys.executable, "-m", "lambdavac", *argv, "--out", str(path)], env=env, check=False)
        outs.append(path.read_bytes())
    assert all(o == outs[0] for o in outs)
    assert outs[0]
