"""Resampled matrix X = Psi*Y + (1-Psi)*Z, its normalized split and Gaussian surrogate."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import rng as _rng
from .tail_sampler import (LARGE, LOWER, SMALL, LabelMatrix, TailLaw, Threshold,
                           TruncationScheme, sample_conditional_matrix,
                           sample_label_matrix, threshold)


@dataclass(frozen=True)
class Decomposition:
    psi: LabelMatrix
    small: np.ndarray  # Y, |Y| <= tau
    large: np.ndarray  # Z, |Z| >= tau
    scheme: TruncationScheme
    tau: float
    law: Optional[TailLaw] = None
    thresh: Optional[Threshold] = None

    @property
    def shape(self):
        return self.psi.bits.shape


def decompose(law: TailLaw, scheme: TruncationScheme, n: int, N: int,
              streams: _rng.Streams) -> Decomposition:
    """Draw labels and both conditional matrices for an N x n instance."""
    th = threshold(scheme, law, n, N)
    psi = sample_label_matrix(law, th.tau, N, n, streams)
    y = sample_conditional_matrix(law, th.tau, SMALL, streams, (N, n))
    z = sample_conditional_matrix(law, th.tau, LARGE, streams, (N, n))
    return Decomposition(psi, y, z, scheme, th.tau, law, th)


def _mix(bits, y, z):
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if not (bits.shape == y.shape == z.shape):
        raise ValueError(f"shape mismatch: labels {bits.shape}, Y {y.shape}, Z {z.shape}")
    return np.where(bits != 0, y, z)


def assemble(dec: Decomposition) -> np.ndarray:
    """Entrywise psi * Y + (1 - psi) * Z."""
    return _mix(np.asarray(dec.psi.bits), dec.small, dec.large)


@dataclass(frozen=True)
class NormalizedPair:
    t0: np.ndarray  # s (1 - Psi) Z, fixed once Psi and Z are
    t1: np.ndarray  # s Psi Y, the bounded random part
    profile: np.ndarray  # E[t1_ij^2 | Psi] = psi_ij s^2 E[y^2]
    q: float  # realized max |t1_ij|
    q_theory: float  # c^(-1/2) (log base)^(-2)
    M: float  # sup E[t1_ij^2] <= M^2 / n
    c_n: float  # base * s^2 * E[y^2]
    scale: float  # s = base^(-1/alpha + (1 - alpha/2) eps)
    base: int

    @property
    def shape(self):
        return self.t0.shape

    @property
    def matrix(self) -> np.ndarray:
        return self.t0 + self.t1


def normalize(dec: Decomposition, alpha: float | None = None,
              scheme: TruncationScheme | None = None) -> NormalizedPair:
    """Scale by base^(-1/alpha + (1 - alpha/2) eps) and split into T0 + T1."""
    scheme = scheme or dec.scheme
    if scheme.regime != LOWER:
        raise ValueError("normalization is only defined for the lower regime")
    if dec.law is None or dec.thresh is None:
        raise ValueError("decomposition carries no law/threshold to normalize with")
    alpha = dec.law.alpha if alpha is None else alpha
    eps, base = dec.thresh.epsilon_tilde, dec.thresh.base
    s = math.exp((-1.0 / alpha + (1.0 - alpha / 2.0) * eps) * math.log(base))
    bits = np.asarray(dec.psi.bits)
    N, n = bits.shape
    t1 = s * np.where(bits != 0, dec.small, 0.0)
    t0 = s * np.where(bits != 0, 0.0, dec.large)
    m2 = dec.law.truncated_second_moment(dec.tau)
    v = s * s * m2
    profile = np.where(bits != 0, v, 0.0)
    return NormalizedPair(
        t0=t0, t1=t1, profile=profile,
        q=float(np.max(np.abs(t1))),
        q_theory=scheme.c ** -0.5 * math.log(base) ** -2,
        M=math.sqrt(n * v),
        c_n=base * v,
        scale=s,
        base=int(base),
    )


def gaussian_surrogate(pair: NormalizedPair, streams: _rng.Streams) -> np.ndarray:
    """G = T0 + G1 with independent centred Gaussians matching the profile."""
    return pair.t0 + np.sqrt(pair.profile) * streams.normals(_rng.GAUSS, pair.shape)


def surrogate_pair(pair: NormalizedPair, streams: _rng.Streams) -> NormalizedPair:
    """The surrogate as a pair with the same T0 and the same profile object."""
    g1 = np.sqrt(pair.profile) * streams.normals(_rng.GAUSS, pair.shape)
    return replace(pair, t1=g1, q=float(np.max(np.abs(g1))))


@dataclass(frozen=True)
class WeightProfile:
    a: np.ndarray
    bounds: tuple

    def __post_init__(self):
        lo, hi = self.bounds
        if not 0 < lo <= hi:
            raise ValueError(f"need 0 < A1 <= A2, got {self.bounds}")
        a = np.asarray(self.a, dtype=float)
        if np.any(a < lo) or np.any(a > hi):
            raise ValueError(f"weights outside [{lo}, {hi}]")

    @classmethod
    def constant(cls, value: float, shape) -> "WeightProfile":
        return cls(np.full(shape, float(value)), (float(value), float(value)))


def apply_weights_and_shift(x, w: WeightProfile, b_shift) -> np.ndarray:
    """Entrywise a_ij x_ij + b_ij."""
    x = np.asarray(x, dtype=float)
    a = np.asarray(w.a, dtype=float)
    b = np.asarray(b_shift, dtype=float)
    if not (x.shape == a.shape == b.shape):
        raise ValueError(f"shape mismatch: x {x.shape}, weights {a.shape}, shift {b.shape}")
    return a * x + b
