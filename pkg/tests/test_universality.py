import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from heavysv import rng
from heavysv.decomposition import decompose, normalize
from heavysv.spectra import singular_extremes
from heavysv.tail_sampler import LOWER, UPPER, TailLaw, TruncationScheme
from heavysv.universality import (compare_dilations, coupling_delta, coupling_experiment,
                                  epsilon_bound, hausdorff_universality, matrix_params)

LOW = TruncationScheme(LOWER, c=0.01)


def pair_200(seed=0, scheme=LOW):
    return normalize(decompose(TailLaw(), scheme, 200, 400, rng.Streams(seed, 200, 400, 0)))


# -- parameters --------------------------------------------------------------------

def test_params_constant_profile():
    n = 50
    p = matrix_params(np.full((n, n), 1.0 / n), q=0.3)
    assert p.sigma_param == pytest.approx(1.0, rel=1e-14)
    assert p.sigma_star == pytest.approx(1 / math.sqrt(n), rel=1e-14)
    assert p.r_param == 0.3


def test_params_zero_and_single_entry():
    p = matrix_params(np.zeros((4, 3)), q=0.2)
    assert (p.sigma_param, p.sigma_star, p.r_param) == (0.0, 0.0, 0.2)
    v = np.zeros((4, 3))
    v[2, 1] = 0.49
    p = matrix_params(v, q=0.1)
    assert p.sigma_param == pytest.approx(0.7) and p.sigma_star == pytest.approx(0.7)


def test_params_rectangular_uses_larger_sum():
    # N x n constant profile: row sums n v, column sums N v
    p = matrix_params(np.full((40, 10), 0.1), q=1.0)
    assert p.sigma_param == pytest.approx(math.sqrt(4.0))


def test_params_from_pair():
    pair = pair_200()
    p = matrix_params(pair, t_grid=[1.0, 2.0])
    assert p.r_param == pair.q
    assert p.sigma_star <= pair.M / math.sqrt(200) * (1 + 1e-12)
    assert p.sigma_param <= pair.M * math.sqrt(400 / 200) * (1 + 1e-12)
    assert p.t_grid == (1.0, 2.0)
    with pytest.raises(ValueError):
        matrix_params(np.ones((2, 2)))


@settings(max_examples=100, deadline=None)
@given(hnp.arrays(float, st.tuples(st.integers(1, 8), st.integers(1, 8)),
                  elements=st.floats(0, 10)))
def test_sigma_star_below_sigma(v):
    p = matrix_params(v, q=1.0)
    assert p.sigma_star <= p.sigma_param * (1 + 1e-12)
    assert min(p.sigma_star, p.sigma_param, p.r_param) >= 0


# -- epsilon(t) ----------------------------------------------------------------------

def test_epsilon_examples():
    # 0.01^(1/3) 10^(2/3) = (0.01 * 100)^(1/3) = 1, so eps = 0.1 sqrt(10) + 1 + 0.1
    exact = 0.1 * math.sqrt(10) + 1.0 + 0.1
    assert epsilon_bound(None, 100, 100, 1.0, 0.01, 10.0) == pytest.approx(exact, rel=1e-14)
    assert epsilon_bound(None, 100, 100, 1.0, 0.01, 10.0) == pytest.approx(1.4160, abs=5e-4)
    assert epsilon_bound(None, 100, 100, 1.0, 0.01, 10.0, C=2.0) == pytest.approx(2 * exact, rel=1e-14)
    assert epsilon_bound(None, 100, 400, 2.0, 0.0, 9.0) == pytest.approx(2.0 * 0.1 * 3.0)
    assert epsilon_bound(None, 100, 400, 2.0, 0.5, 0.0) == 0.0
    with pytest.raises(ValueError):
        epsilon_bound(None, 10, 20, 1.0, 0.1, -1.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(1e-4, 1), st.floats(0.1, 50),
       st.floats(1.01, 2.0))
def test_epsilon_strictly_increasing(M, dM, q, t, f):
    e = lambda M_, q_, t_: epsilon_bound(None, 100, 300, M_, q_, t_)
    base = e(M, q, t)
    assert e(M + dM, q, t) > base
    assert e(M, q * f, t) > base
    assert e(M, q, t * f) > base


# -- coupling ------------------------------------------------------------------------

def test_coupling_degenerate_profile():
    pair = pair_200(1)
    frozen = replace(pair, t1=np.zeros(pair.shape), profile=np.zeros(pair.shape), q=0.0)
    st_, sg = coupling_delta(frozen, rng.Streams(1))
    assert st_ == sg


def test_coupling_report_fields():
    rep = coupling_experiment(TailLaw(), LOW, 200, 400, trials=12, root_seed=41)
    assert rep.deltas.shape == (12,)
    assert np.array_equal(rep.deltas, np.abs(rep.sigma_min_t - rep.sigma_min_g))
    N = 400
    assert rep.t_grid[0] == pytest.approx(math.log(16 * N))
    assert rep.levels[0] == pytest.approx(0.5)
    assert rep.median_delta == pytest.approx(np.median(rep.deltas))
    assert rep.quantiles[0] == pytest.approx(np.quantile(rep.deltas, 0.5))
    expect_viol = sum(q > e for q, e in zip(rep.quantiles, rep.epsilon_curve) if not math.isnan(q))
    assert rep.violations == expect_viol
    assert all(q <= rep.c_hat * e * (1 + 1e-12) for q, e in zip(rep.quantiles, rep.epsilon_curve))
    assert rep.q <= LOW.c ** -0.5 * math.log(200) ** -2 * (1 + 1e-12)
    print(f"median delta {rep.median_delta:.4f} eps(log 16N) {rep.epsilon_curve[0]:.4f} "
          f"pass={rep.median_pass} c_hat={rep.c_hat:.4f}")


def test_coupling_swap_symmetry():
    rep = coupling_experiment(TailLaw(), LOW, 200, 400, trials=4, root_seed=42)
    assert np.array_equal(np.abs(rep.sigma_min_g - rep.sigma_min_t), rep.deltas)


def test_coupling_deterministic_and_paired():
    a = coupling_experiment(TailLaw(), LOW, 200, 400, trials=3, root_seed=43)
    b = coupling_experiment(TailLaw(), LOW, 200, 400, trials=3, root_seed=43)
    assert a.deltas.tobytes() == b.deltas.tobytes()


def test_coupling_needs_lower_regime():
    with pytest.raises(ValueError):
        coupling_experiment(TailLaw(), TruncationScheme(UPPER, b=0.5), 200, 400, trials=1)


# -- dilations and Hausdorff --------------------------------------------------------------

def test_hausdorff_identical():
    pair = pair_200(2)
    t = pair.matrix
    comp = compare_dilations(t, t, 0.1)
    assert comp.d_h == 0.0 and comp.premise and comp.conclusions


@pytest.mark.parametrize("eta", [1e-3, 0.1, 2.0])
def test_weyl_single_entry(eta):
    g = np.random.default_rng(44).standard_normal((30, 12))
    h = g.copy()
    h[7, 3] += eta
    comp = compare_dilations(h, g, 0.5)
    assert comp.d_h <= eta * (1 + 1e-9)


def test_premise_can_fail():
    g = np.random.default_rng(45).standard_normal((30, 12))
    comp = compare_dilations(g + 1.0, g, 1e-3)
    assert not comp.premise


def test_dilation_chain_on_sampled_pairs():
    pair = pair_200(3)
    rep = hausdorff_universality(pair, None, trials=8, streams=rng.Streams(46),
                                 t_grid=[math.log(2 * 600 * 2)])
    assert rep.premise_count == 8
    assert rep.implication_failures == 0
    assert rep.levels[0] == pytest.approx(0.5)
    for c in rep.comparisons:
        assert c.sigma_min[0] >= c.sigma_min[1] - 3 * c.epsilon


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.floats(1e-3, 1.0), st.floats(1.0, 3.0))
def test_dilation_chain_property(seed, scale, widen):
    g = np.random.default_rng(seed)
    a = g.standard_normal((14, 6))
    b = a + scale * g.standard_normal((14, 6))
    eps = np.linalg.norm(a - b, 2) * widen
    comp = compare_dilations(a, b, eps)
    assert comp.premise
    assert comp.conclusions
    assert singular_extremes(a).sigma_min >= singular_extremes(b).sigma_min - 3 * eps


def test_hausdorff_fixed_epsilon():
    pair = pair_200(4)
    rep = hausdorff_universality(pair, 0.05, trials=3, streams=rng.Streams(47))
    assert rep.epsilon == 0.05
    assert rep.implication_failures == 0
    assert len(rep.distances) == 3
