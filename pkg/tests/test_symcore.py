"""Expression trees, calculus, simplification, evaluation and the zero test."""

from __future__ import annotations

import math
import pickle
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from _exprgen import FD_STEP, fd_relative_error, random_expr
from lambdavac.symcore import (
    Add,
    DomainPointError,
    ExpressionError,
    InconclusiveError,
    Mul,
    Num,
    Pow,
    Sin,
    Sym,
    UnboundSymbolError,
    cos,
    differentiate,
    evaluate,
    evaluate_array,
    prob_zero_test,
    sample_points,
    serialize,
    simplify,
    sin,
    sqrt,
    substitute,
    substitute_many,
    symbols,
    to_rat,
)

t, x, y, z, Lam, a = symbols("t x y z Lambda a")


def _expr_strategy(depth: int = 4):
    """Hypothesis wrapper around the seeded generator."""
    return st.tuples(st.integers(0, 2**32 - 1), st.integers(1, depth)).map(
        lambda p: random_expr(np.random.default_rng(p[0]), p[1])
    )


def _point(seed: int) -> dict:
    rng = np.random.default_rng(seed)
    return {"x": float(rng.uniform(-2, 2)), "y": float(rng.uniform(-2, 2))}


def _value_or_none(e, binding):
    try:
        return evaluate(e, {k: binding[k] for k in e.free_symbols})
    except DomainPointError:
        return None


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


class TestConstruction:
    def test_structural_sharing(self):
        assert (x + y) is (x + y)
        assert sin(x) is Sin(x)
        assert Num(Fraction(2, 4)) is Num(Fraction(1, 2))

    def test_equal_rationals_share_one_node(self):
        assert Num(Fraction(6, 3)) is Num(2)

    def test_sums_and_products_have_two_or_more_children(self):
        assert not isinstance(x + 0, Add)
        assert not isinstance(x * 1, Mul)
        assert len((x + y + z).args) == 3

    def test_constant_folding(self):
        assert (Num(2) + Num(3)) is Num(5)
        assert (Num(2) * Num(Fraction(1, 3))) is Num(Fraction(2, 3))
        assert (Num(4) ** Fraction(1, 2)) is Num(2)

    def test_subtraction_and_division_use_negative_scaling_and_inverse_power(self):
        d = x / y
        assert isinstance(d, Mul)
        assert any(isinstance(f, Pow) and f.exponent.value == -1 for f in d.args)
        assert prob_zero_test((x - y) - (x + Num(-1) * y))

    def test_sqrt_is_a_rational_power(self):
        s = sqrt(x)
        assert isinstance(s, Pow) and s.exponent.value == Fraction(1, 2)

    def test_pickle_round_trip_preserves_identity(self):
        e = sin(Lam * t / 6) * (2 + cos(x))
        assert pickle.loads(pickle.dumps(e)) is e

    def test_non_numeric_exponent_is_rejected(self):
        with pytest.raises((ExpressionError, TypeError)):
            x ** y

    def test_free_symbols(self):
        assert (sin(Lam * t) + x * x).free_symbols == frozenset({"Lambda", "t", "x"})


# ---------------------------------------------------------------------------
# differentiation
# ---------------------------------------------------------------------------


class TestDifferentiate:
    def test_cosine(self):
        assert prob_zero_test(differentiate(2 + cos(x), "x") + sin(x))

    def test_chain_rule(self):
        d = differentiate(sin(Lam * t / 6), "t")
        assert prob_zero_test(d - Lam / 6 * cos(Lam * t / 6))

    def test_product_against_finite_difference(self):
        e = (2 + cos(x)) * (2 + sin(t / 6))
        d = evaluate(differentiate(e, "x"), {"t": 1.0, "x": 0.7})
        f = lambda u: evaluate(e, {"t": 1.0, "x": u})  # noqa: E731
        fd = (f(0.7 + FD_STEP) - f(0.7 - FD_STEP)) / (2 * FD_STEP)
        assert abs(d - fd) <= 1e-6 * abs(d)

    def test_rational_power(self):
        assert prob_zero_test(differentiate(sqrt(x * x + 1), "x") - x / sqrt(x * x + 1))

    def test_absent_variable_gives_zero(self):
        assert differentiate(sin(x) * y, "z") is Num(0)

    def test_accepts_symbol_objects(self):
        assert differentiate(x * x, x) is differentiate(x * x, "x")

    def test_never_fails_on_generated_trees(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            differentiate(random_expr(rng, 5), "x")

    @settings(max_examples=60, deadline=None)
    @given(_expr_strategy(5), st.sampled_from(["x", "y"]), st.integers(0, 2**31))
    def test_matches_finite_difference(self, e, var, seed):
        err = fd_relative_error(e, var, np.random.default_rng(seed))
        if err is not None:
            assert err <= 1e-6


# ---------------------------------------------------------------------------
# simplification
# ---------------------------------------------------------------------------


class TestSimplify:
    def test_identity_rules(self):
        assert simplify(0 * sin(x) + 1 * y) is y

    def test_pythagorean_identity(self):
        assert simplify(sin(x) ** 2 + cos(x) ** 2) is Num(1)

    def test_pythagorean_identity_with_compound_argument(self):
        u = Lam * t / 6
        assert simplify(3 * sin(u) ** 2 + 3 * cos(u) ** 2 - 3) is Num(0)

    def test_multiplicative_inverse(self):
        assert simplify((2 + cos(x)) * (2 + cos(x)) ** -1) is Num(1)

    def test_collects_identical_terms(self):
        assert simplify(x * y + y * x - 2 * x * y) is Num(0)

    def test_flattens_nested_sums(self):
        e = simplify(Add(x, Add(y, Add(z, x))))
        assert prob_zero_test(e - (2 * x + y + z))

    def test_cancels_common_factors(self):
        e = ((2 + cos(x)) ** 3 * sin(x)) / ((2 + cos(x)) * sin(x))
        assert prob_zero_test(simplify(e) - (2 + cos(x)) ** 2)
        assert "sin" not in serialize(simplify(e))

    def test_rational_identity(self):
        e = 1 / (x - 1) - 1 / (x + 1) - 2 / (x * x - 1)
        assert simplify(e) is Num(0)

    def test_exact_rational_coefficients(self):
        e = simplify(Lam * Fraction(1, 3) + Lam * Fraction(1, 6))
        assert prob_zero_test(e - Lam / 2)
        assert "1/2" in serialize(e)

    def test_idempotent(self):
        e = simplify((sin(x) + cos(y)) ** 2 / (2 + cos(x)))
        assert simplify(e) is e

    @settings(max_examples=80, deadline=None)
    @given(_expr_strategy(5))
    def test_preserves_value(self, e):
        try:
            assert prob_zero_test(e - simplify(e))
        except InconclusiveError:
            pass


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


class TestEvaluate:
    def test_direct_arithmetic(self):
        assert evaluate(2 + cos(x), {"x": 0}) == 3

    def test_trig_at_pi(self):
        assert_allclose(evaluate(sin(Lam * t / 6), {"Lambda": 1, "t": 3 * math.pi}), 1.0, rtol=1e-15)

    def test_pole_raises_domain_point_error_with_subexpression(self):
        with pytest.raises(DomainPointError) as info:
            evaluate(a**-1, {"a": 0})
        assert info.value.expr is Pow(a, -1)

    def test_unbound_symbol_is_an_error(self):
        with pytest.raises(UnboundSymbolError):
            evaluate(x + y, {"x": 1})

    def test_negative_base_with_fractional_exponent_is_a_domain_point(self):
        with pytest.raises(DomainPointError):
            evaluate(sqrt(x), {"x": -1})

    def test_array_evaluation_marks_undefined_cells(self):
        r = evaluate_array(1 / x, {"x": np.array([-1.0, 0.0, 2.0])})
        assert_allclose(r.values[[0, 2]], [-1.0, 0.5])
        assert np.isnan(r.values[1])
        assert r.valid.tolist() == [True, False, True]

    def test_array_evaluation_broadcasts(self):
        tt, xx = np.meshgrid(np.arange(3.0), np.arange(4.0), indexing="ij")
        r = evaluate_array(t + 10 * x, {"t": tt, "x": xx})
        assert r.values.shape == (3, 4)
        assert_allclose(r.values, tt + 10 * xx)

    def test_array_and_scalar_paths_agree(self):
        rng = np.random.default_rng(5)
        e = sin(x * y) / (2 + cos(x)) + y**3
        pts = rng.uniform(-2, 2, size=(50, 2))
        arr = evaluate_array(e, {"x": pts[:, 0], "y": pts[:, 1]}).values
        one = [evaluate(e, {"x": p[0], "y": p[1]}) for p in pts]
        assert_allclose(arr, one, rtol=1e-14)


# ---------------------------------------------------------------------------
# substitution
# ---------------------------------------------------------------------------


class TestSubstitute:
    def test_direct_replacement(self):
        assert substitute(a**2, "a", 2 + cos(x)) is (2 + cos(x)) ** 2

    def test_absent_symbol(self):
        assert substitute(x + y, "z", 5) is (x + y)

    def test_simultaneous_replacement(self):
        e = substitute_many(x + 2 * y, {"x": y, "y": x})
        assert e is (y + 2 * x)

    def test_kretschmann_closed_form_at_a_singular_periodic_point(self):
        m = Sym("m")
        closed = (8 * Lam**2 * a**6 + 36 * m**2) / (3 * a**6)
        e = substitute(closed, "a", cos(x) * sin(Lam * t / 6))
        v = evaluate(e, {"Lambda": 1, "m": 1, "t": 3 * math.pi, "x": 0})
        assert_allclose(v, 44 / 3, rtol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(_expr_strategy(4), st.fractions(-3, 3, max_denominator=5), st.integers(0, 2**31))
    def test_substitute_then_evaluate_equals_bind_then_evaluate(self, e, c, seed):
        p = _point(seed)
        lhs = _value_or_none(substitute(e, "x", Num(c)), p)
        rhs = _value_or_none(e, {**p, "x": float(c)})
        if lhs is not None and rhs is not None:
            assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(_expr_strategy(4), st.fractions(-3, 3, max_denominator=5))
    def test_differentiation_commutes_with_substitution_of_another_variable(self, e, c):
        lhs = differentiate(substitute(e, "y", Num(c)), "x")
        rhs = substitute(differentiate(e, "x"), "y", Num(c))
        try:
            assert prob_zero_test(lhs - rhs, ["x"])
        except InconclusiveError:
            pass


# ---------------------------------------------------------------------------
# probabilistic zero test
# ---------------------------------------------------------------------------


class TestZeroTest:
    def test_identity_is_zero(self):
        assert prob_zero_test(sin(x) ** 2 + cos(x) ** 2 - 1)

    def test_non_identity_is_not_zero(self):
        assert not prob_zero_test(x - y)

    def test_exact_zero_constant(self):
        assert prob_zero_test(Num(0))
        assert not prob_zero_test(Num(Fraction(1, 10**12)))

    def test_deterministic_for_a_seed(self):
        p1 = sample_points(["x", "y"], 32, seed=11)
        p2 = sample_points(["y", "x"], 32, seed=11)
        assert_allclose(p1["x"], p2["x"])
        assert np.all((p1["x"] >= -2) & (p1["x"] <= 2))

    def test_skips_domain_points(self):
        # undefined on half the box; still decidable
        assert prob_zero_test(sqrt(x) ** 2 - x)

    def test_all_points_undefined_is_inconclusive(self):
        with pytest.raises(InconclusiveError):
            prob_zero_test(sqrt(-1 - x * x))

    def test_vars_must_cover_free_symbols(self):
        with pytest.raises(ValueError):
            prob_zero_test(x + y, ["x"])

    def test_relative_guard_accepts_roundoff_in_large_intermediates(self):
        big = Num(10**8)
        e = Add(Mul(big, sin(x) ** 2), Mul(big, cos(x) ** 2), Num(-(10**8)))
        assert prob_zero_test(e)

    def test_small_but_nonzero_difference_is_detected(self):
        assert not prob_zero_test(sin(x) ** 2 + cos(x) ** 2 - 1 - Num(Fraction(1, 10**6)))

    def test_custom_domain(self):
        assert prob_zero_test(sqrt(x) ** 2 - x, domain={"x": (0.5, 3.0)})


# ---------------------------------------------------------------------------
# rational engine
# ---------------------------------------------------------------------------


class TestRational:
    def test_to_rat_round_trip_preserves_value(self):
        e = (2 + cos(x)) ** 2 * sin(t / 6) - Lam / (3 * (2 + cos(x)))
        assert prob_zero_test(to_rat(e).to_expr() - e)

    def test_rat_derivative_matches_tree_derivative(self):
        e = sin(x) / (2 + cos(x)) ** 3 + x * x
        assert prob_zero_test(to_rat(e).diff("x").to_expr() - differentiate(e, "x"))

    def test_rat_inverse(self):
        e = x * (2 + sin(x))
        r = to_rat(e).invert()
        assert prob_zero_test(r.to_expr() * e - 1)

    def test_zero_detection(self):
        assert to_rat(sin(x) ** 2 + cos(x) ** 2 - 1).is_zero


# ---------------------------------------------------------------------------
# trig at multiples of pi/2
# ---------------------------------------------------------------------------


class TestQuadrantalTrig:
    @pytest.mark.parametrize("k, s, c", [(0, 0, 1), (1, 1, 0), (2, 0, -1), (3, -1, 0), (-1, -1, 0), (24, 0, 1)])
    def test_folding_is_exact(self, k, s, c):
        v = k * math.pi / 2
        assert sin(Num(v)) is Num(s)
        assert cos(Num(v)) is Num(c)

    def test_other_floats_fold_numerically(self):
        assert sin(Num(0.3)) is Num(math.sin(0.3))

    def test_array_evaluation_sees_the_pole(self):
        r = evaluate_array(1 / cos(x), {"x": np.array([0.0, math.pi / 2, 1.0])})
        assert r.valid.tolist() == [True, False, True]
        assert_allclose(r.values[[0, 2]], [1.0, 1 / math.cos(1.0)])

    def test_array_evaluation_matches_numpy_elsewhere(self):
        xs = np.linspace(-7, 7, 1001)
        r = evaluate_array(sin(x) + cos(x), {"x": xs})
        assert_allclose(r.values, np.sin(xs) + np.cos(xs), atol=1e-15)
