"""Heavy-tailed entry laws, truncation thresholds and the resampling labels.

Three symmetric laws are supported:

* ``pareto``      -- P(|xi| >= t) = min(1, t**-alpha), so C_l = C_u = 1;
* ``stable``      -- symmetric alpha-stable, E exp(i t xi) = exp(-sigma**alpha |t|**alpha);
* ``slowvarying`` -- P(|xi| >= t) proportional to (1 + log t)**beta * t**-alpha on [t0, inf).

All samplers work from uniforms in (0, 1] so that the inverse-CDF maps can be
checked directly, and every matrix sampler reads its uniforms from
:class:`heavysv.rng.Streams` so serial and parallel runs agree bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, interpolate, optimize

from . import rng as _rng

KINDS = ("pareto", "stable", "slowvarying")
UPPER, LOWER = "upper", "lower"
SMALL, LARGE = "small", "large"


class SizingError(ValueError):
    """Matrix size too small for the requested truncation scheme."""

    def __init__(self, message: str, min_base: int | None = None):
        super().__init__(message)
        self.min_base = min_base


@dataclass(frozen=True)
class TailLaw:
    kind: str = "pareto"
    alpha: float = 1.0
    sigma: float = 1.0  # stable scale
    beta: float = 1.0  # log-power of the slowly varying factor

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"law.kind must be one of {KINDS}, got {self.kind!r}")
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"law.alpha must lie in (0, 2), got {self.alpha}")
        if self.kind == "stable" and not self.sigma > 0:
            raise ValueError(f"law.sigma must be positive, got {self.sigma}")
        if self.kind == "slowvarying" and not math.isfinite(self.beta):
            raise ValueError("law.beta must be finite")

    # -- slowly varying helpers ------------------------------------------
    @property
    def t0(self) -> float:
        """Left end of the support of |xi| (1 except for the slowly varying law)."""
        if self.kind == "slowvarying":
            # (1 + log t)**beta * t**-alpha is non-increasing once 1 + log t >= beta/alpha
            return max(1.0, math.exp(self.beta / self.alpha - 1.0))
        if self.kind == "pareto":
            return 1.0
        return 0.0

    def _sv_log_tail(self, t):
        t0 = self.t0
        log_norm = self.beta * math.log1p(math.log(t0)) - self.alpha * math.log(t0)
        lt = np.log(t)
        return self.beta * np.log1p(lt) - self.alpha * lt - log_norm

    # -- distribution functions of |xi| ------------------------------------
    def tail(self, t):
        """P(|xi| >= t)."""
        t = np.asarray(t, dtype=float)
        if self.kind == "pareto":
            with np.errstate(divide="ignore"):
                return np.where(t <= 1.0, 1.0, np.power(np.maximum(t, 1.0), -self.alpha))
        if self.kind == "slowvarying":
            t0 = self.t0
            return np.where(t <= t0, 1.0, np.exp(self._sv_log_tail(np.maximum(t, t0))))
        return _stable_vec(self.alpha, self.sigma, t, tail=True)

    def abs_cdf(self, t):
        """P(|xi| <= t)."""
        t = np.asarray(t, dtype=float)
        if self.kind == "pareto":
            with np.errstate(divide="ignore"):
                return np.where(t <= 1.0, 0.0, -np.expm1(-self.alpha * np.log(np.maximum(t, 1.0))))
        if self.kind == "slowvarying":
            t0 = self.t0
            return np.where(t <= t0, 0.0, -np.expm1(self._sv_log_tail(np.maximum(t, t0))))
        return _stable_vec(self.alpha, self.sigma, t, tail=False)

    def abs_from_tail(self, p):
        """Inverse of the tail: t with P(|xi| >= t) = p, p in (0, 1]."""
        p = np.asarray(p, dtype=float)
        if self.kind == "pareto":
            return np.power(p, -1.0 / self.alpha)
        if self.kind == "slowvarying":
            return _sv_invert(self, np.log(p))
        return self.sigma * _stable_table(self.alpha).abs_from_tail(p)

    def abs_from_cdf(self, f):
        """Inverse of the CDF of |xi|: t with P(|xi| <= t) = f, f in [0, 1)."""
        f = np.asarray(f, dtype=float)
        if self.kind == "pareto":
            return np.exp(-np.log1p(-f) / self.alpha)
        if self.kind == "slowvarying":
            return _sv_invert(self, np.log1p(-f))
        return self.sigma * _stable_table(self.alpha).abs_from_cdf(f)

    def truncated_second_moment(self, tau: float) -> float:
        """E[x**2 | |x| <= tau], exactly (closed form or quadrature)."""
        tau = float(tau)
        F = float(self.abs_cdf(tau))
        if F <= 0.0:
            raise ValueError(f"P(|xi| <= {tau}) = 0; truncated moment undefined")
        a = self.alpha
        if self.kind == "pareto":
            # int_1^tau t^2 * a t^(-a-1) dt
            return a * (tau ** (2.0 - a) - 1.0) / (2.0 - a) / F
        return _truncated_moment_quad(self, tau) / F

    def sample(self, u, v):
        """Map two arrays of uniforms in (0, 1] to draws of xi."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.kind == "stable":
            return chambers_mallows_stuck(self.alpha, self.sigma, u, v)
        sign = np.where(v > 0.5, 1.0, -1.0)
        return sign * self.abs_from_tail(u)


def chambers_mallows_stuck(alpha: float, sigma: float, u, v):
    """Symmetric stable draws from uniforms u (angle) and v (exponential)."""
    phi = np.pi * (np.asarray(u) - 0.5)
    w = -np.log(np.asarray(v))
    if alpha == 1.0:
        return sigma * np.tan(phi)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        x = (np.sin(alpha * phi) / np.cos(phi) ** (1.0 / alpha)
             * (np.cos((1.0 - alpha) * phi) / w) ** ((1.0 - alpha) / alpha))
    return sigma * x


# ---------------------------------------------------------------------------
# slowly varying inverse (Newton in log t, safeguarded by bisection)

def _sv_invert(law: TailLaw, log_p):
    scalar = np.ndim(log_p) == 0
    log_p = np.atleast_1d(np.asarray(log_p, dtype=float))
    a, b = law.alpha, law.beta
    s0 = math.log(law.t0)
    s_lo = np.full(log_p.shape, s0)
    # log tail(s) = b*log1p(s) - a*s - c is below -a*s/2 - c for s large
    s_hi = np.full(log_p.shape, s0 + 1.0)
    g = lambda s: b * np.log1p(s) - a * s - (b * math.log1p(s0) - a * s0)
    for _ in range(200):
        bad = g(s_hi) > log_p
        if not bad.any():
            break
        s_hi = np.where(bad, 2.0 * s_hi + 1.0, s_hi)
    s = 0.5 * (s_lo + s_hi)
    for _ in range(100):
        val = g(s) - log_p
        s_lo = np.where(val > 0, s, s_lo)
        s_hi = np.where(val > 0, s_hi, s)
        deriv = b / (1.0 + s) - a
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = s - val / deriv
        ok = (newton > s_lo) & (newton < s_hi) & np.isfinite(newton)
        s_new = np.where(ok, newton, 0.5 * (s_lo + s_hi))
        if np.all(np.abs(s_new - s) <= 1e-15 * np.maximum(1.0, np.abs(s))):
            s = s_new
            break
        s = s_new
    out = np.exp(s)
    return out[0] if scalar else out


# ---------------------------------------------------------------------------
# symmetric stable distribution function (Zolotarev/Nolan integral form)

def _stable_log_v(alpha: float, theta: float, phi: float) -> float:
    """log V(theta) of the symmetric stable integral; phi = pi/2 - theta.

    Both angles are passed so that cos(theta) = sin(phi) keeps full relative
    precision next to pi/2 and sin(alpha * theta) keeps it next to 0.
    """
    ex = alpha / (alpha - 1.0)
    cos_t = math.sin(phi) if phi < theta else math.cos(theta)
    s_at = math.sin(alpha * theta)
    if s_at <= 0.0 or cos_t <= 0.0:
        return math.inf if (s_at <= 0.0) == (ex > 0) else -math.inf
    return (ex * (math.log(cos_t) - math.log(s_at))
            + math.log(math.cos((alpha - 1.0) * theta)) - math.log(cos_t))


def _split_quad(f, a, b, root):
    """Quadrature on [a, b] with log-spaced breakpoints around a sharp transition."""
    edges = {a, b}
    if root is not None and a < root < b:
        for k in range(-40, 41, 2):
            r = root * 10.0 ** k
            if a < r < b:
                edges.add(r)
    edges = sorted(edges)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)
        total += val
    return total


@lru_cache(maxsize=65536)
def _stable_abs(alpha: float, x: float, tail: bool) -> float:
    """P(|X| >= x) (tail) or P(|X| <= x) for the unit-scale symmetric stable law."""
    if x <= 0.0:
        return 1.0 if tail else 0.0
    if math.isinf(x):
        return 0.0 if tail else 1.0
    if alpha == 1.0:
        return 2.0 / math.pi * (math.atan(1.0 / x) if tail else math.atan(x))
    ex = alpha / (alpha - 1.0)
    lx = ex * math.log(x)
    half = 0.5 * math.pi
    # alpha > 1: tail = (2/pi) int exp(-g);  alpha < 1: tail = (2/pi) int (1 - exp(-g))
    want_exp = (alpha > 1.0) == tail

    def integrand(log_g):
        g = math.exp(min(log_g, 700.0))
        return math.exp(-g) if want_exp else -math.expm1(-g)

    total = 0.0
    # theta in (0, pi/4] and phi = pi/2 - theta in (0, pi/4]; log g is monotone in each
    for near_zero in (True, False):
        if near_zero:
            lg = lambda u: lx + _stable_log_v(alpha, u, half - u)
        else:
            lg = lambda u: lx + _stable_log_v(alpha, half - u, u)
        lo, hi = 1e-300, 0.25 * math.pi
        # locate log g = 0 in log u, where the transition is well scaled
        h = lambda v: max(-1e300, min(1e300, lg(math.exp(v))))
        slo, shi = math.log(lo), math.log(hi)
        root = None
        if (h(slo) < 0) != (h(shi) < 0):
            root = math.exp(optimize.brentq(h, slo, shi, xtol=1e-13, rtol=1e-14))
        f = lambda u: integrand(lg(max(u, lo)))
        total += _split_quad(f, 0.0, hi, root)
    return min(1.0, max(0.0, 2.0 / math.pi * total))


def _stable_vec(alpha, sigma, t, tail):
    t = np.asarray(t, dtype=float)
    flat = [_stable_abs(float(alpha), float(x) / sigma, tail) for x in t.ravel()]
    return np.asarray(flat).reshape(t.shape)


def _strictly_monotone(values, mask, direction):
    """Restrict mask to a strictly increasing (direction 1) or decreasing run."""
    keep = mask.copy()
    last = None
    for i in np.flatnonzero(mask):
        if last is not None and (values[i] - last) * direction <= 0:
            keep[i] = False
        else:
            last = values[i]
    return keep


class _StableTable:
    """Monotone log-log interpolation of the |X| distribution (unit scale).

    The tail is tabulated where it is <= 3/4 and the CDF where it is <= 3/4.
    Queries switch branches at 1/2, so every query falls strictly inside a
    spline and neither branch suffers cancellation.
    """

    def __init__(self, alpha: float):
        self.alpha = alpha
        logt = np.linspace(math.log(1e-6), math.log(1e14), 801)
        t = np.exp(logt)
        tails = np.array([_stable_abs(alpha, x, True) for x in t])
        cdfs = np.array([_stable_abs(alpha, x, False) for x in t])
        keep_t = _strictly_monotone(tails, (tails <= 0.75) & (tails > 0.0), -1)
        keep_c = _strictly_monotone(cdfs, (cdfs <= 0.75) & (cdfs > 0.0), 1)
        self.tail_logt, self.log_tail = logt[keep_t], np.log(tails[keep_t])
        self.cdf_logt, self.log_cdf = logt[keep_c], np.log(cdfs[keep_c])
        self._inv_tail = interpolate.CubicSpline(self.log_tail[::-1], self.tail_logt[::-1])
        self._inv_cdf = interpolate.CubicSpline(self.log_cdf, self.cdf_logt)
        # near zero the CDF of |X| is linear with slope 2 * density(0)
        self.slope0 = math.exp(self.log_cdf[0] - self.cdf_logt[0])

    def _from_small_tail(self, p):
        lp = np.log(p)
        end = self.log_tail[-1]
        # beyond the table the tail is a pure power law up to relative O(t^-alpha)
        far = self.tail_logt[-1] + (end - lp) / self.alpha
        return np.exp(np.where(lp < end, far, self._inv_tail(np.clip(lp, end, self.log_tail[0]))))

    def _from_small_cdf(self, f):
        with np.errstate(divide="ignore"):
            lf = np.log(f)
        start = self.log_cdf[0]
        inner = np.exp(self._inv_cdf(np.clip(lf, start, self.log_cdf[-1])))
        return np.where(lf < start, f / self.slope0, inner)

    def abs_from_tail(self, p):
        p = np.asarray(p, dtype=float)
        out = np.empty(p.shape)
        lo = p <= 0.5
        out[lo] = self._from_small_tail(p[lo])
        out[~lo] = self._from_small_cdf(1.0 - p[~lo])
        return out

    def abs_from_cdf(self, f):
        f = np.asarray(f, dtype=float)
        out = np.empty(f.shape)
        lo = f <= 0.5
        out[lo] = self._from_small_cdf(f[lo])
        out[~lo] = self._from_small_tail(1.0 - f[~lo])
        return out


@lru_cache(maxsize=16)
def _stable_table(alpha: float) -> _StableTable:
    return _StableTable(float(alpha))


def _truncated_moment_quad(law: TailLaw, tau: float) -> float:
    """E[x**2 ; |x| <= tau] = int_0^tau 2t (P(|x| >= t) - P(|x| >= tau)) dt."""
    tail_tau = float(law.tail(tau))
    lo = law.t0
    head = lo * lo * (1.0 - tail_tau)  # the tail equals 1 on [0, t0)
    f = lambda t: 2.0 * t * (float(law.tail(t)) - tail_tau)
    # split at powers of ten: the integrand varies over many scales
    k0 = math.floor(math.log10(lo)) + 1 if lo > 0 else -3
    edges = [lo] + [10.0 ** k for k in range(k0, math.ceil(math.log10(tau)))
                    if lo < 10.0 ** k < tau] + [tau]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-12, limit=400)
        total += val
    return head + total


# ---------------------------------------------------------------------------
# truncation thresholds

@dataclass(frozen=True)
class TruncationScheme:
    regime: str = LOWER
    base: str = "n"  # "n" (bounded aspect ratio) or "N" (diverging aspect ratio)
    b: float = 0.5
    c: float = 1.0
    delta: float = 2.0
    C_u: float = 1.0

    def __post_init__(self):
        if self.regime not in (UPPER, LOWER):
            raise ValueError(f"scheme.regime must be 'upper' or 'lower', got {self.regime!r}")
        if self.base not in ("n", "N"):
            raise ValueError(f"scheme.base must be 'n' or 'N', got {self.base!r}")
        if self.regime == UPPER and not 0.0 < self.b < 1.0:
            raise ValueError(f"scheme.b must lie in (0, 1), got {self.b}")
        if self.regime == LOWER and not self.c > 0.0:
            raise ValueError(f"scheme.c must be positive, got {self.c}")
        if not self.delta > 1.0:
            raise ValueError(f"scheme.delta must exceed 1, got {self.delta}")
        if not self.C_u > 0.0:
            raise ValueError(f"scheme.C_u must be positive, got {self.C_u}")

    def rhs(self, base: float) -> float:
        """Target value of base**(alpha * eps_tilde)."""
        lb = math.log(base)
        if self.regime == UPPER:
            return self.b * lb / (self.delta * self.C_u)
        return self.c * lb ** 4

    def min_base(self) -> int:
        """Smallest integer base from which 1 < rhs(base) < base holds for good."""
        if self.regime == UPPER:
            k, power, turn = self.b / (self.delta * self.C_u), 1, math.e
        else:
            k, power, turn = self.c, 4, math.exp(4.0)
        # rhs > 1  <=>  log(base) > k**(-1/power)
        b1 = math.exp(k ** (-1.0 / power))
        # log rhs - log base peaks at `turn`; if the peak is negative rhs < base everywhere
        h = lambda x: math.log(k) + power * math.log(math.log(x)) - math.log(x)
        b2 = 2.0
        if h(turn) >= 0.0:
            hi = turn * 2
            while h(hi) >= 0.0:
                hi *= 2
            b2 = optimize.brentq(h, turn, hi, xtol=1e-12)
        bmin = max(b1, b2, 2.0)
        m = int(math.floor(bmin)) + 1
        while not (1.0 < self.rhs(m) < m):
            m += 1
        return m


@dataclass(frozen=True)
class Threshold:
    epsilon_tilde: float
    tau: float
    base: int
    rhs: float  # base ** (alpha * epsilon_tilde)


def threshold(scheme: TruncationScheme, law: TailLaw, n: int, N: int) -> Threshold:
    """Truncation level eps_tilde and cutoff tau = base**(1/alpha - eps_tilde)."""
    base = int(n if scheme.base == "n" else N)
    if base < 2:
        raise SizingError(f"base size {base} too small", scheme.min_base())
    r = scheme.rhs(base)
    if not 1.0 < r < base:
        mb = scheme.min_base()
        raise SizingError(
            f"{scheme.regime} regime gives base^(alpha*eps) = {r:.6g} at base={base}; "
            f"need 1 < value < base (minimal admissible base: {mb})", mb)
    a = law.alpha
    eps = math.log(r) / (a * math.log(base))
    tau = math.exp((1.0 / a - eps) * math.log(base))
    return Threshold(eps, tau, base, r)


# ---------------------------------------------------------------------------
# samplers

@dataclass(frozen=True)
class LabelMatrix:
    bits: np.ndarray  # N x n array of 0/1 (uint8)
    p: float = float("nan")

    def __post_init__(self):
        b = np.asarray(self.bits)
        if b.ndim != 2 or min(b.shape) < 1:
            raise ValueError(f"label matrix must be 2-D and non-empty, got shape {b.shape}")

    @property
    def dims(self):
        return self.bits.shape


def _check_generator(rng):
    if not isinstance(rng, np.random.Generator):
        raise TypeError(f"expected numpy.random.Generator, got {type(rng).__name__}")


def sample_entry(law: TailLaw, rng: np.random.Generator) -> float:
    _check_generator(rng)
    u, v = 1.0 - rng.random(2)
    return float(law.sample(u, v))


def sample_matrix(law: TailLaw, streams: _rng.Streams, shape, purpose=_rng.DIRECT) -> np.ndarray:
    """Direct i.i.d. draws of xi on an N x n grid."""
    uv = streams.uniforms(purpose, shape, per_entry=2)
    return law.sample(uv[..., 0], uv[..., 1])


def label_probability(law: TailLaw, tau: float) -> float:
    """p = P(|xi| <= tau)."""
    return float(law.abs_cdf(tau))


def sample_label_matrix(law: TailLaw, tau: float, N: int, n: int,
                        streams: _rng.Streams) -> LabelMatrix:
    if law.kind == "pareto" and tau < 1.0:
        raise ValueError(f"tau must be >= 1 for the Pareto law, got {tau}")
    p = label_probability(law, tau)
    u = streams.uniforms(_rng.LABEL, (N, n))
    # u in (0, 1]; P(u <= p) = p
    return LabelMatrix((u <= p).astype(np.uint8), p)


def _side_prob(law, tau, side):
    if side == SMALL:
        return float(law.abs_cdf(tau))
    if side == LARGE:
        return float(law.tail(tau))
    raise ValueError(f"side must be 'small' or 'large', got {side!r}")


def conditional_from_uniforms(law: TailLaw, tau: float, side: str, u, v):
    """|x| conditioned below/above tau by inverse CDF, sign from v."""
    mass = _side_prob(law, tau, side)
    if not 0.0 < mass < 1.0:
        raise ValueError(f"P({side}) = {mass} at tau={tau}: degenerate conditioning")
    u = np.asarray(u, dtype=float)
    sign = np.where(np.asarray(v) > 0.5, 1.0, -1.0)
    if side == SMALL:
        # F(|y|) = (1 - u) * F(tau) keeps |y| <= tau; 1 - u in [0, 1)
        mag = law.abs_from_cdf((1.0 - u) * mass)
        mag = np.minimum(mag, tau)
    else:
        mag = law.abs_from_tail(u * mass)
        mag = np.maximum(mag, tau)
    return sign * mag


def sample_conditional(law: TailLaw, tau: float, side: str, rng: np.random.Generator) -> float:
    _check_generator(rng)
    u, v = 1.0 - rng.random(2)
    return float(conditional_from_uniforms(law, tau, side, u, v))


def sample_conditional_matrix(law: TailLaw, tau: float, side: str,
                              streams: _rng.Streams, shape) -> np.ndarray:
    if law.kind == "stable" and side == SMALL:
        return _stable_small_rejection(law, tau, streams, shape)
    purpose = _rng.SMALL if side == SMALL else _rng.LARGE
    uv = streams.uniforms(purpose, shape, per_entry=2)
    return conditional_from_uniforms(law, tau, side, uv[..., 0], uv[..., 1])


def _stable_small_rejection(law, tau, streams, shape):
    """Exact draws of a stable entry conditioned on |x| <= tau (acceptance = P(|x| <= tau))."""
    _side_prob(law, tau, SMALL)
    rows, cols = shape
    out = np.empty(shape)
    for i in range(rows):
        g = streams.generator(_rng.SMALL, i)
        row = np.empty(0)
        while row.size < cols:
            uv = 1.0 - g.random((cols, 2))
            x = chambers_mallows_stuck(law.alpha, law.sigma, uv[:, 0], uv[:, 1])
            row = np.concatenate([row, x[np.abs(x) <= tau]])
        out[i] = row[:cols]
    return out
