import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heavysv import rng
from heavysv.decomposition import assemble, decompose
from heavysv.spectra import singular_extremes
from heavysv.tail_sampler import UPPER, LabelMatrix, TailLaw, TruncationScheme, sample_label_matrix
from heavysv.upper_bound import (NoAllOnesColumn, find_all_ones_columns, minor_upper_bound,
                                 no_all_ones_bound, no_all_ones_probability, seginer_check,
                                 seginer_sweep, truncated_pareto_sampler, zero_sampler)


def test_find_all_ones_examples():
    assert find_all_ones_columns(np.ones((4, 3))) == [0, 1, 2]
    bits = np.ones((4, 3))
    bits[[0, 2, 3], [0, 1, 2]] = 0
    assert find_all_ones_columns(bits) == []
    bits[0, 0] = 1
    assert find_all_ones_columns(LabelMatrix(bits.astype(np.uint8))) == [0]


def test_all_ones_binomial():
    psi = sample_label_matrix(TailLaw(), 10.0, 20, 1000, rng.Streams(31))
    p0 = 0.9 ** 20
    count = len(find_all_ones_columns(psi))
    assert 1000 * p0 == pytest.approx(121.6, abs=0.05)
    assert abs(count - 1000 * p0) <= 4 * math.sqrt(1000 * p0 * (1 - p0))


def test_no_all_ones_probability_exact():
    p, N, n = 0.8, 5, 3
    exact = no_all_ones_probability(p, N, n)
    assert exact == pytest.approx((1 - 0.8 ** 5) ** 3, rel=1e-15)
    g = rng.make_generator(32)
    trials = 100_000
    bits = g.random((trials, N, n)) < p
    hits = np.mean(~np.any(np.all(bits, axis=1), axis=1))
    assert abs(hits - exact) <= 4 * math.sqrt(exact * (1 - exact) / trials)


def test_no_all_ones_bound_values():
    assert no_all_ones_bound(100, 2.0, 1.0, 1.0, 0.0) == pytest.approx(math.exp(-100 * math.exp(-2)))
    assert 0.0 <= no_all_ones_bound(1000, 2.0, 1.0, 1.0, 0.1) <= 1.0


def small_case(seed, bits):
    g = np.random.default_rng(seed)
    y = g.uniform(-2, 2, bits.shape)
    z = g.choice([-1, 1], bits.shape) * (2 + g.pareto(1.0, bits.shape))
    x = np.where(bits != 0, y, z)
    return x, y


def test_single_all_ones_column():
    bits = np.zeros((6, 3), dtype=np.uint8)
    bits[:, 1] = 1
    x, y = small_case(33, bits)
    rep = minor_upper_bound(x, bits, y, alpha=1.0, eps_tilde=0.1, base=100)
    assert rep.all_ones_columns == [1]
    assert rep.minor_norm == pytest.approx(np.linalg.norm(y[:, 1]), rel=1e-14)
    assert rep.sigma_min_below_minor
    assert rep.bound_value == pytest.approx(100 ** (1 - 0.5 * 0.1), rel=1e-14)
    assert rep.predicate_holds == (rep.minor_norm <= rep.bound_value)
    assert rep.constant == 1.0


def test_all_ones_labels():
    bits = np.ones((8, 4), dtype=np.uint8)
    x, y = small_case(34, bits)
    rep = minor_upper_bound(x, bits, y, alpha=1.0, eps_tilde=0.1, base=100)
    assert rep.sigma_min == pytest.approx(singular_extremes(y).sigma_min, rel=1e-14)
    assert rep.minor_norm == pytest.approx(singular_extremes(y).sigma_max, rel=1e-14)
    assert rep.sigma_min <= rep.minor_norm


def test_no_all_ones_raises():
    bits = np.zeros((5, 2), dtype=np.uint8)
    x, y = small_case(35, bits)
    with pytest.raises(NoAllOnesColumn) as e:
        minor_upper_bound(x, bits, y, alpha=1.0, eps_tilde=0.1, base=100)
    assert 0.0 <= e.value.probability_bound <= 1.0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 8), st.integers(0, 6), st.floats(0.3, 0.95))
def test_sigma_min_below_minor(seed, n, extra, p):
    g = np.random.default_rng(seed)
    bits = (g.random((n + extra, n)) < p).astype(np.uint8)
    bits[:, g.integers(n)] = 1
    x, y = small_case(seed, bits)
    rep = minor_upper_bound(x, bits, y, alpha=1.0, eps_tilde=0.1, base=100)
    assert rep.sigma_min_below_minor
    # a submatrix never has larger norm
    assert rep.minor_norm <= singular_extremes(y).sigma_max * (1 + 1e-12)


def test_pipeline_on_sampled_instances():
    law = TailLaw()
    sch = TruncationScheme(UPPER, b=0.5)
    seen = 0
    for k in range(40):
        dec = decompose(law, sch, 60, 120, rng.Streams(36, k))
        if not find_all_ones_columns(dec.psi):
            continue
        seen += 1
        rep = minor_upper_bound(assemble(dec), dec.psi, dec.small, alpha=1.0,
                                eps_tilde=dec.thresh.epsilon_tilde, base=dec.thresh.base)
        assert rep.sigma_min_below_minor
    assert seen > 10


# -- Seginer check ---------------------------------------------------------------

def test_seginer_zero():
    rep = seginer_check(zero_sampler, 5, 3, 2, 4)
    assert rep.lhs == rep.rhs_rows == rep.rhs_cols == 0.0
    assert rep.c_hat == 0.0


def test_seginer_one_by_one():
    rep = seginer_check(truncated_pareto_sampler(1.0, 50.0), 1, 1, 2, 20, root_seed=3)
    assert rep.c_hat ** 2 == pytest.approx(0.5, rel=1e-12)
    assert rep.lhs == pytest.approx(rep.rhs_rows, rel=1e-12)


def test_seginer_q_range():
    with pytest.raises(ValueError):
        seginer_check(zero_sampler, 4, 4, 3, 1)
    with pytest.raises(ValueError):
        seginer_check(zero_sampler, 4, 4, 0, 1)
    with pytest.raises(ValueError):
        seginer_check(zero_sampler, 4, 4, 4, 1)  # 4 > 2 log 4
    seginer_check(zero_sampler, 100, 10, 4, 1)  # 4 <= 2 log 100


def test_seginer_size_sweep_stable():
    sizes = [(2 * m, m) for m in (50, 100, 200)]
    reports, spread = seginer_sweep(truncated_pareto_sampler(1.0, 100.0), sizes, 2, 40, root_seed=1)
    assert [r.m2 for r in reports] == [50, 100, 200]
    assert spread <= 1.3


def test_truncated_sampler_support_and_symmetry():
    draw = truncated_pareto_sampler(0.8, 20.0)
    y = draw(rng.make_generator(37), (400, 500))
    assert 1.0 <= np.abs(y).min() and np.abs(y).max() <= 20.0
    assert abs(np.mean(np.sign(y))) <= 4 / math.sqrt(y.size)
