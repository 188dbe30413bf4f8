import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from heavysv import rng
from heavysv.decomposition import (Decomposition, WeightProfile, apply_weights_and_shift, assemble,
                                   decompose, gaussian_surrogate, normalize, surrogate_pair)
from heavysv.spectra import singular_extremes
from heavysv.tail_sampler import (LOWER, SMALL, UPPER, LabelMatrix, TailLaw, TruncationScheme,
                                  sample_conditional_matrix)

LOW = TruncationScheme(LOWER, c=0.01)


def make_dec(bits, y, z, tau=2.0):
    return Decomposition(LabelMatrix(np.asarray(bits, dtype=np.uint8)), np.asarray(y, float),
                         np.asarray(z, float), LOW, tau)


def test_assemble_examples():
    y = np.ones((2, 2))
    z = np.full((2, 2), 5.0)
    assert np.array_equal(assemble(make_dec([[1, 0], [0, 1]], y, z)), [[1, 5], [5, 1]])
    assert np.array_equal(assemble(make_dec(np.ones((2, 2)), y, z)), y)
    assert np.array_equal(assemble(make_dec(np.zeros((2, 2)), y, z)), z)


def test_assemble_shape_mismatch():
    with pytest.raises(ValueError):
        assemble(make_dec(np.ones((2, 2)), np.ones((2, 3)), np.ones((2, 2))))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.floats(-50, 50))
def test_assemble_scaling_equivariant(seed, c):
    g = np.random.default_rng(seed)
    bits = g.integers(0, 2, (4, 3))
    y, z = g.standard_normal((4, 3)), g.standard_normal((4, 3))
    assert np.array_equal(assemble(make_dec(bits, c * y, c * z)), c * assemble(make_dec(bits, y, z)))


@pytest.mark.parametrize("law", [TailLaw("pareto", 1.0), TailLaw("pareto", 0.6),
                                 TailLaw("stable", 1.4), TailLaw("slowvarying", 1.2, beta=1.0)])
@pytest.mark.parametrize("scheme", [TruncationScheme(UPPER, b=0.5), LOW])
def test_support_separation(law, scheme):
    dec = decompose(law, scheme, 100, 200, rng.Streams(21, 1))
    assert np.abs(dec.small).max() <= dec.tau <= np.abs(dec.large).min()
    x = assemble(dec)
    assert np.array_equal(x, np.where(dec.psi.bits == 1, dec.small, dec.large))


@pytest.mark.parametrize("n,N", [(200, 400), (300, 600), (100, 500)])
@pytest.mark.parametrize("c", [0.003, 0.01, 0.1])
def test_realized_q_below_theory(n, N, c):
    sch = TruncationScheme(LOWER, c=c)
    pair = normalize(decompose(TailLaw(), sch, n, N, rng.Streams(22, n, N)))
    assert pair.q <= pair.q_theory * (1 + 1e-12)
    assert pair.q_theory == pytest.approx(c ** -0.5 * math.log(n) ** -2, rel=1e-14)
    # a.s. bound is s * tau
    assert pair.q_theory == pytest.approx(pair.scale * decompose(TailLaw(), sch, n, N,
                                                                 rng.Streams(0)).tau, rel=1e-12)


def test_normalized_pair_structure():
    dec = decompose(TailLaw(), LOW, 200, 400, rng.Streams(23))
    pair = normalize(dec)
    bits = dec.psi.bits
    assert np.all(pair.t1[bits == 0] == 0) and np.all(pair.t0[bits == 1] == 0)
    assert np.allclose(pair.matrix, pair.scale * assemble(dec), rtol=1e-15)
    assert np.all(pair.profile <= pair.M ** 2 / 200 * (1 + 1e-12))
    # alpha = 1 Pareto: s^2 tau = 1/n, so M = 1 and c_n = 1
    assert pair.M == pytest.approx(1.0, rel=1e-12)
    assert pair.c_n == pytest.approx(1.0, rel=1e-12)


def test_normalize_rejects_upper_regime():
    dec = decompose(TailLaw(), TruncationScheme(UPPER, b=0.5), 100, 200, rng.Streams(0))
    with pytest.raises(ValueError):
        normalize(dec)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_truncated_second_moment_closed_form(alpha):
    law = TailLaw("pareto", alpha)
    tau = 37.0
    num, _ = integrate.quad(lambda t: t * t * alpha * t ** (-alpha - 1), 1, tau, epsrel=1e-13)
    assert law.truncated_second_moment(tau) == pytest.approx(num / (1 - tau ** -alpha), rel=1e-11)


def test_truncated_second_moment_alpha_one_is_tau():
    for tau in (2.0, 10.0, 579.0):
        assert TailLaw().truncated_second_moment(tau) == pytest.approx(tau, rel=1e-13)


@pytest.mark.parametrize("law", [TailLaw("pareto", 1.0), TailLaw("stable", 1.0),
                                 TailLaw("stable", 1.6), TailLaw("slowvarying", 0.8, beta=1.5)])
def test_truncated_second_moment_monte_carlo(law):
    tau = 10.0
    y = sample_conditional_matrix(law, tau, SMALL, rng.Streams(24), (200, 10_000))
    assert np.mean(y * y) == pytest.approx(law.truncated_second_moment(tau), rel=0.01)


def test_cauchy_truncated_moment():
    # E[x^2; |x| <= tau] = (2/pi)(tau - atan tau) for the Cauchy law
    tau = 10.0
    F = 2 / math.pi * math.atan(tau)
    exact = 2 / math.pi * (tau - math.atan(tau)) / F
    assert TailLaw("stable", 1.0).truncated_second_moment(tau) == pytest.approx(exact, rel=1e-9)


def test_t1_mean_zero():
    sch = TruncationScheme(LOWER, c=0.01)
    vals = []
    for k in range(13):
        vals.append(normalize(decompose(TailLaw(), sch, 200, 400, rng.Streams(25, k))).t1.ravel())
    t1 = np.concatenate(vals)
    assert t1.size >= 10**6
    assert abs(t1.mean()) <= 4 * t1.std() / math.sqrt(t1.size)


def test_surrogate_profile():
    pair = normalize(decompose(TailLaw(), LOW, 200, 400, rng.Streams(26)))
    streams = rng.Streams(26)
    g = gaussian_surrogate(pair, streams)
    zero = pair.profile == 0
    assert np.array_equal(g[zero], pair.t0[zero])
    g2 = gaussian_surrogate(pair, streams)
    assert g.tobytes() == g2.tobytes()
    sp = surrogate_pair(pair, streams)
    assert sp.profile is pair.profile
    assert np.array_equal(sp.matrix, g)
    assert surrogate_pair(sp, streams).profile.tobytes() == pair.profile.tobytes()


def test_surrogate_variance():
    pair = normalize(decompose(TailLaw(), LOW, 200, 400, rng.Streams(27)))
    v = pair.profile[pair.profile > 0][0]
    draws = []
    for k in range(14):
        g = gaussian_surrogate(pair, rng.Streams(27, k)) - pair.t0
        draws.append(g[pair.profile > 0])
    d = np.concatenate(draws)
    assert d.size >= 10**6
    assert np.var(d) == pytest.approx(v, rel=0.01)


def test_weights_and_shift():
    g = rng.make_generator(28)
    x = g.standard_normal((30, 10))
    one = WeightProfile.constant(1.0, x.shape)
    assert np.array_equal(apply_weights_and_shift(x, one, np.zeros_like(x)), x)
    two = WeightProfile.constant(2.0, x.shape)
    y = apply_weights_and_shift(x, two, np.zeros_like(x))
    assert singular_extremes(y).sigma_min == pytest.approx(2 * singular_extremes(x).sigma_min,
                                                           rel=1e-12)
    with pytest.raises(ValueError):
        WeightProfile(np.full((2, 2), 3.0), (0.5, 2.0))
    with pytest.raises(ValueError):
        WeightProfile(np.ones((2, 2)), (0.0, 2.0))
    with pytest.raises(ValueError):
        apply_weights_and_shift(x, one, np.zeros((30, 9)))
