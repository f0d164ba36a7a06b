"""Probabilistic identity testing."""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from .evaluate import evaluate_array
from .expr import Expr, Num

DEFAULT_SAMPLES = 32
DEFAULT_TOL = 1e-9
DEFAULT_SEED = 20240917
DEFAULT_BOX = (-2.0, 2.0)


class InconclusiveError(RuntimeError):
    """Too few sample points were in the domain of the expression."""


def sample_points(
    names: Iterable[str],
    count: int,
    seed: int = DEFAULT_SEED,
    domain: Mapping[str, tuple] | None = None,
) -> dict:
    """``count`` seeded uniform points; each name ranges over its box."""
    rng = np.random.default_rng(seed)
    domain = domain or {}
    out = {}
    for name in sorted(names):
        lo, hi = domain.get(name, DEFAULT_BOX)
        out[name] = rng.uniform(lo, hi, size=count)
    return out


def zero_residuals(
    e: Expr,
    vars: Iterable[str] | None = None,
    *,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    domain: Mapping[str, tuple] | None = None,
    max_batches: int = 16,
):
    """Values and intermediate magnitudes at ``samples`` in-domain points."""
    names = sorted(set(vars) if vars is not None else e.free_symbols)
    stray = e.free_symbols - set(names)
    if stray:
        raise ValueError(f"free symbols not covered by vars: {sorted(stray)}")
    values, mags = [], []
    got = 0
    for batch in range(max_batches):
        pts = sample_points(names, samples, seed + batch, domain)
        if not names:
            pts = {}
        res = evaluate_array(e, pts, magnitude=True)
        v = np.atleast_1d(res.values)
        m = np.atleast_1d(res.magnitude)
        ok = np.atleast_1d(res.valid)
        values.append(v[ok])
        mags.append(m[ok])
        got += int(ok.sum())
        if got >= samples:
            break
    if got < samples:
        raise InconclusiveError(f"only {got} of {samples} sample points were in the domain")
    return np.concatenate(values)[:samples], np.concatenate(mags)[:samples]


def prob_zero_test(
    e: Expr,
    vars: Iterable[str] | None = None,
    *,
    samples: int = DEFAULT_SAMPLES,
    tol: float = DEFAULT_TOL,
    seed: int = DEFAULT_SEED,
    domain: Mapping[str, tuple] | None = None,
) -> bool:
    """True when ``e`` vanishes at every seeded sample point.

    A point passes when ``|e| <= tol * (1 + M)``, ``M`` being the largest
    magnitude among the terms of any sum evaluated on the way.  Points
    where ``e`` is undefined are skipped and replaced by fresh draws.
    """
    if isinstance(e, Num):
        return e.value == 0
    values, mags = zero_residuals(e, vars, samples=samples, seed=seed, domain=domain)
    return bool(np.all(np.abs(values) <= tol * (1.0 + mags)))
