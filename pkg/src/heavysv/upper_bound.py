"""Upper-bound pipeline: all-ones label columns, the Y minor, and a Seginer-type moment check."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Sequence

import numpy as np

from . import rng as _rng
from .spectra import singular_extremes
from .tail_sampler import LabelMatrix, TailLaw, conditional_from_uniforms, SMALL


class NoAllOnesColumn(ValueError):
    """The label matrix has no all-ones column, so the minor bound does not apply."""

    def __init__(self, message: str, probability_bound: float = float("nan")):
        super().__init__(message)
        self.probability_bound = probability_bound


def find_all_ones_columns(psi: LabelMatrix | np.ndarray) -> List[int]:
    bits = np.asarray(psi.bits if isinstance(psi, LabelMatrix) else psi)
    return [int(j) for j in np.flatnonzero(np.all(bits != 0, axis=0))]


def no_all_ones_probability(p: float, N: int, n: int) -> float:
    """Exact P(no column of an N x n Bernoulli(p) matrix is all ones)."""
    return float((1.0 - p ** N) ** n)


def no_all_ones_bound(n: int, delta: float, C_u: float, alpha: float, eps: float) -> float:
    """exp(-n exp(-delta C_u n^(alpha eps))), the bound quoted for this event."""
    return math.exp(-n * math.exp(-delta * C_u * n ** (alpha * eps)))


@dataclass(frozen=True)
class MinorReport:
    all_ones_columns: List[int]
    minor_norm: float
    bound_value: float
    predicate_holds: bool  # minor_norm <= bound_value
    sigma_min: float
    sigma_min_below_minor: bool  # sigma_min(X) <= minor_norm at spectral tolerance
    constant: float


def minor_upper_bound(x, psi, small, *, alpha: float, eps_tilde: float, base: int,
                      C: float = 1.0, tol: float = 1e-8,
                      delta: float = 2.0, C_u: float = 1.0) -> MinorReport:
    """Check sigma_min(X) <= ||Y^m|| and compare ||Y^m|| with C base^(1/alpha - (1 - alpha/2) eps).

    Y^m keeps the columns of Y whose labels are all ones; on those columns X
    and Y agree, so sigma_min(X) cannot exceed the norm of the minor.
    """
    x = np.asarray(x, dtype=float)
    small = np.asarray(small, dtype=float)
    cols = find_all_ones_columns(psi)
    if not cols:
        raise NoAllOnesColumn(
            "no all-ones label column; minor bound inapplicable",
            no_all_ones_bound(base, delta, C_u, alpha, eps_tilde))
    minor = small[:, cols]
    minor_norm = singular_extremes(minor).sigma_max
    smin = singular_extremes(x).sigma_min
    bound = C * base ** (1.0 / alpha - (1.0 - alpha / 2.0) * eps_tilde)
    return MinorReport(
        all_ones_columns=cols,
        minor_norm=minor_norm,
        bound_value=bound,
        predicate_holds=bool(minor_norm <= bound),
        sigma_min=smin,
        sigma_min_below_minor=bool(smin <= minor_norm * (1.0 + tol)),
        constant=C,
    )


# ---------------------------------------------------------------------------
# Seginer-type check: E||Y||^q against E max row norm^q + E max column norm^q

Sampler = Callable[[np.random.Generator, tuple], np.ndarray]


def truncated_pareto_sampler(alpha: float, tau: float) -> Sampler:
    """Symmetric Pareto conditioned on |x| <= tau; centred by symmetry."""
    law = TailLaw("pareto", alpha)

    def draw(gen: np.random.Generator, shape):
        uv = 1.0 - gen.random(tuple(shape) + (2,))
        return conditional_from_uniforms(law, tau, SMALL, uv[..., 0], uv[..., 1])
    return draw


def zero_sampler(gen: np.random.Generator, shape):
    return np.zeros(shape)


@dataclass(frozen=True)
class SeginerReport:
    m1: int
    m2: int
    q: int
    trials: int
    lhs: float  # mean ||Y||^q
    rhs_rows: float  # mean max_i ||Y_i.||^q
    rhs_cols: float  # mean max_j ||Y_.j||^q
    c_hat: float  # (lhs / (rhs_rows + rhs_cols))^(1/q), 0 when both sides vanish


def _check_q(q: int, m1: int, m2: int):
    if q < 2 or q % 2:
        raise ValueError(f"q must be a positive even integer, got {q}")
    if q > 2 and q > 2.0 * math.log(max(m1, m2)):
        raise ValueError(f"q={q} exceeds 2 log max(m1, m2) = {2 * math.log(max(m1, m2)):.3g}")


def seginer_check(sampler: Sampler, m1: int, m2: int, q: int, trials: int,
                  root_seed: int = 0) -> SeginerReport:
    _check_q(q, m1, m2)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    lhs = rows = cols = 0.0
    for t in range(trials):
        gen = _rng.make_generator(root_seed, m1, m2, t, _rng.AUX)
        y = np.asarray(sampler(gen, (m1, m2)), dtype=float)
        norm = singular_extremes(y if m1 >= m2 else y.T).sigma_max
        lhs += norm ** q
        rows += np.max(np.sqrt(np.einsum("ij,ij->i", y, y))) ** q
        cols += np.max(np.sqrt(np.einsum("ij,ij->j", y, y))) ** q
    lhs, rows, cols = lhs / trials, rows / trials, cols / trials
    denom = rows + cols
    c_hat = 0.0 if denom == 0.0 else (lhs / denom) ** (1.0 / q)
    return SeginerReport(m1, m2, q, trials, lhs, rows, cols, c_hat)


def seginer_sweep(sampler: Sampler, sizes: Sequence[tuple], q: int, trials: int,
                  root_seed: int = 0):
    """Reports over (m1, m2) sizes plus the max/min ratio of the fitted constants."""
    reports = [seginer_check(sampler, m1, m2, q, trials, root_seed) for m1, m2 in sizes]
    cs = [r.c_hat for r in reports]
    spread = max(cs) / min(cs) if min(cs) > 0 else float("inf")
    return reports, spread
