import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heavysv.polytope import (SIGMA_MIN_CERTIFICATE, BudgetError, certificate, exact_inradius_2d,
                              grid_refine_inradius, grid_refine_search, support_min_value)


def brute_2d(rows, k=200_000):
    th = np.linspace(0, math.pi, k, endpoint=False)
    z = np.column_stack([np.cos(th), np.sin(th)])
    return float(np.min(np.max(np.abs(z @ np.asarray(rows, float).T), axis=1)))


@pytest.mark.parametrize("n", [1, 2, 3, 7, 20])
def test_identity_certificate_is_tight(n):
    c = certificate(np.eye(n))
    assert c.radius == pytest.approx(1 / math.sqrt(n), rel=1e-14)
    assert c.method == SIGMA_MIN_CERTIFICATE
    assert c.radius == c.sigma_min_used / math.sqrt(c.N)
    assert (c.N, c.n) == (n, n)


@pytest.mark.parametrize("c", [0.01, 3.0, -2.0])
def test_certificate_homogeneous(c):
    x = np.random.default_rng(61).standard_normal((12, 4))
    assert certificate(c * x).radius == pytest.approx(abs(c) * certificate(x).radius, rel=1e-12)


def test_certificate_needs_tall():
    with pytest.raises(ValueError):
        certificate(np.ones((2, 3)))


def test_exact_2d_examples():
    assert exact_inradius_2d([(1, 0), (0, 1)]) == pytest.approx(1 / math.sqrt(2), rel=1e-15)
    assert exact_inradius_2d([(1, 0), (0, 1), (1, 1)]) == pytest.approx(0.70711, abs=5e-6)
    assert exact_inradius_2d([(1, 0), (0, 1), (1, 1)]) == pytest.approx(1 / math.sqrt(2), rel=1e-15)
    assert exact_inradius_2d([(2, 0)]) == 0.0
    assert exact_inradius_2d([(0, 0), (0, 0)]) == 0.0
    # the square conv(+-(1,1), +-(1,-1)) has facets x = +-1, y = +-1
    assert exact_inradius_2d([(1, 1), (1, -1)]) == pytest.approx(1.0, rel=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 8))
def test_exact_2d_against_dense_angle_grid(seed, k):
    rows = np.random.default_rng(seed).standard_normal((k, 2))
    exact = exact_inradius_2d(rows)
    grid = brute_2d(rows)
    # the grid can only overshoot; its error is at most |r| * angular step
    assert exact <= grid + 1e-12
    assert grid - exact <= np.linalg.norm(rows, axis=1).max() * math.pi / 200_000 * 1.01


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 10), st.floats(0, 2 * math.pi))
def test_exact_2d_rotation_invariant(seed, k, phi):
    rows = np.random.default_rng(seed).standard_normal((k, 2))
    rot = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
    assert abs(exact_inradius_2d(rows @ rot.T) - exact_inradius_2d(rows)) < 1e-10


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 12))
def test_soundness_2d(seed, N):
    g = np.random.default_rng(seed)
    x = g.standard_cauchy((N, 2))
    r = certificate(x).radius
    assert r <= exact_inradius_2d(x) * (1 + 1e-10)


def test_grid_examples():
    assert grid_refine_inradius(np.eye(2)) == pytest.approx(1 / math.sqrt(2), abs=1e-8)
    assert grid_refine_inradius(np.eye(3)) == pytest.approx(1 / math.sqrt(3), abs=1e-8)
    assert grid_refine_inradius([[1.0, 0], [0, 1], [1, 1]]) == pytest.approx(1 / math.sqrt(2), abs=1e-8)


def test_grid_search_returns_feasible_witness():
    x = np.random.default_rng(62).standard_normal((9, 4))
    val, z, mesh = grid_refine_search(x)
    assert np.linalg.norm(z) == pytest.approx(1.0, rel=1e-12)
    assert support_min_value(x, z) == pytest.approx(val, rel=1e-12)
    assert 0 < mesh <= 1e-9


@pytest.mark.parametrize("seed", range(20))
def test_grid_matches_exact_2d(seed):
    x = np.random.default_rng(seed).standard_normal((6, 2))
    ex = exact_inradius_2d(x)
    gr = grid_refine_inradius(x)
    assert ex - 1e-12 <= gr <= ex + 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 6), st.integers(0, 6))
def test_soundness_nd(seed, n, extra):
    x = np.random.default_rng(seed).standard_cauchy((n + extra, n))
    assert certificate(x).radius <= grid_refine_inradius(x) * (1 + 1e-10)


def test_grid_budget():
    with pytest.raises(BudgetError):
        grid_refine_inradius(np.eye(7))
    with pytest.raises(BudgetError):
        grid_refine_inradius(np.eye(6), budget=100)
