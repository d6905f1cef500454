"""Analytic photon-number statistics of TMCC and reference Poisson beams.

A two-mode coherently correlated (TMCC) beam carries identical photon
numbers in both modes; the single-mode counting statistics are

    P_n = |lambda|^(2n) / (I_0(2|lambda|) * n!^2)

which fall off like 1/n!^2 and are strongly sub-Poissonian.  Everything
here is a pure function of the intensity parameter |lambda|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_LAMBDA = 50.0
TAIL_EPS = 1e-12

# switch P_n evaluation to log-domain above this n (n!^2 overflows near 150)
_LOG_DOMAIN_N = 20
_MAX_CUTOFF = int(10 * MAX_LAMBDA + 100)


class PhotonStatsError(ValueError):
    """Invalid argument to a photon-statistics routine."""


class CutoffNotFoundError(PhotonStatsError):
    """Truncation index exceeded the configured hard ceiling."""


@dataclass(frozen=True)
class IntensityParam:
    """Nonnegative intensity parameter |lambda| of the TMCC source.

    The phase of lambda never enters any observable quantity, so only the
    magnitude is stored.
    """

    magnitude: float

    def __post_init__(self) -> None:
        m = float(self.magnitude)
        if not math.isfinite(m) or m < 0.0:
            raise PhotonStatsError(f"intensity magnitude must be finite and >= 0, got {self.magnitude}")
        if m > MAX_LAMBDA:
            raise PhotonStatsError(f"intensity magnitude {m} exceeds ceiling {MAX_LAMBDA}")
        object.__setattr__(self, "magnitude", m)


@dataclass(frozen=True)
class PhotonDistribution:
    """Truncated photon-number distribution P_0..P_{cutoff} with tracked tail.

    Doubles as the diagonal of a photon-number density matrix.  `probs` is a
    read-only float array; `tail_mass` is the probability mass beyond the
    cutoff, so sum(probs) + tail_mass == 1 up to float rounding.
    """

    probs: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise PhotonStatsError("probs must be a nonempty 1-d array")
        if np.any(probs < 0.0) or self.tail_mass < 0.0:
            raise PhotonStatsError("probabilities must be nonnegative")
        total = float(probs.sum()) + self.tail_mass
        if abs(total - 1.0) > 1e-9:
            raise PhotonStatsError(f"distribution not normalized: sum+tail = {total}")
        probs = probs.copy()
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "tail_mass", float(self.tail_mass))

    @property
    def cutoff(self) -> int:
        return self.probs.size - 1

    def prob(self, n: int) -> float:
        if n < 0:
            raise PhotonStatsError("photon number must be >= 0")
        return float(self.probs[n]) if n <= self.cutoff else 0.0

    def mean(self) -> float:
        n = np.arange(self.probs.size)
        return float(np.dot(n, self.probs))

    def second_moment(self) -> float:
        n = np.arange(self.probs.size)
        return float(np.dot(n * n, self.probs))

    def variance(self) -> float:
        return self.second_moment() - self.mean() ** 2

    def mandel_q(self) -> float:
        m = self.mean()
        return self.variance() / m - 1.0 if m > 0.0 else 0.0


@dataclass(frozen=True)
class MomentSummary:
    """Closed-form counting moments of a TMCC beam.

    `degenerate` marks the vacuum limit, where the Mandel parameter is a 0/0
    expression and is set to 0 by continuity.
    """

    mean: float
    second_moment: float
    variance: float
    mandel_q: float
    degenerate: bool = False


def bessel_i(order: int, x: float) -> float:
    """Modified Bessel function of the first kind I_order(x), x >= 0.

    Direct power series with term-ratio stopping; adequate to full double
    precision for the x <= 2*MAX_LAMBDA range used here.  Forward recurrence
    is avoided on purpose (unstable for I_n).
    """
    if order < 0:
        raise PhotonStatsError("order must be >= 0")
    if x < 0.0:
        raise PhotonStatsError("argument must be >= 0")
    if x > 2.0 * MAX_LAMBDA:
        raise PhotonStatsError(f"argument {x} outside supported range [0, {2 * MAX_LAMBDA}]")
    if x == 0.0:
        return 1.0 if order == 0 else 0.0
    half = 0.5 * x
    if order <= _LOG_DOMAIN_N:
        term = half**order / math.factorial(order)
    else:
        # scaled first term; underflows cleanly to 0 for very high orders
        term = math.exp(order * math.log(half) - math.lgamma(order + 1))
        if term == 0.0:
            return 0.0
    total = term
    k = 1
    while True:
        term *= half * half / (k * (order + k))
        total += term
        if term <= total * 1e-17:
            return total
        k += 1


def log_bessel_i(order: int, x: float) -> float:
    """log I_order(x) without intermediate overflow/underflow (x > 0)."""
    if order < 0 or x < 0.0:
        raise PhotonStatsError("order and argument must be >= 0")
    if x == 0.0:
        if order == 0:
            return 0.0
        return -math.inf
    half = 0.5 * x
    lead = order * math.log(half) - math.lgamma(order + 1)
    # series factor sum_k (x/2)^{2k} * order! / (k! (order+k)!) >= 1
    term = 1.0
    total = 1.0
    k = 1
    while True:
        term *= half * half / (k * (order + k))
        total += term
        if term <= total * 1e-17:
            break
        k += 1
    return lead + math.log(total)


def tmcc_pn(lam: IntensityParam, n: int) -> float:
    """Probability of registering n photons in one mode of a TMCC beam."""
    if n < 0:
        raise PhotonStatsError("photon number must be >= 0")
    m = lam.magnitude
    if m == 0.0:
        return 1.0 if n == 0 else 0.0
    if n <= _LOG_DOMAIN_N:
        return m ** (2 * n) / (bessel_i(0, 2.0 * m) * math.factorial(n) ** 2)
    logp = 2 * n * math.log(m) - 2.0 * math.lgamma(n + 1) - log_bessel_i(0, 2.0 * m)
    return math.exp(logp)


def _truncated(pn, ratio, tail_eps: float) -> PhotonDistribution:
    """Build a distribution from term values and the term-ratio function.

    Stops at the first index where the geometric tail bound drops below
    `tail_eps`; the bound applies once the ratio is below 1/2 and decreasing.
    """
    probs = []
    n = 0
    while True:
        p = pn(n)
        probs.append(p)
        r = ratio(n)
        if r < 0.5:
            tail_bound = p * r / (1.0 - r)
            if tail_bound < tail_eps:
                break
        n += 1
        if n > _MAX_CUTOFF:
            raise CutoffNotFoundError(f"no truncation point found below index {_MAX_CUTOFF}")
    arr = np.array(probs, dtype=float)
    tail = max(0.0, 1.0 - float(arr.sum()))
    return PhotonDistribution(arr, tail_mass=tail)


def tmcc_distribution(lam: IntensityParam, tail_eps: float = TAIL_EPS) -> PhotonDistribution:
    """Truncated TMCC counting distribution with tail mass below tail_eps."""
    if not 0.0 < tail_eps <= 1e-6:
        raise PhotonStatsError("tail_eps must be in (0, 1e-6]")
    m = lam.magnitude
    if m == 0.0:
        return PhotonDistribution(np.array([1.0]))
    m2 = m * m
    return _truncated(
        lambda n: tmcc_pn(lam, n),
        lambda n: m2 / ((n + 1) * (n + 1)),
        tail_eps,
    )


def poisson_distribution(mean: float, tail_eps: float = TAIL_EPS) -> PhotonDistribution:
    """Truncated Poisson distribution; the coherent-beam reference."""
    if not math.isfinite(mean) or mean < 0.0:
        raise PhotonStatsError("mean must be finite and >= 0")
    if not 0.0 < tail_eps <= 1e-6:
        raise PhotonStatsError("tail_eps must be in (0, 1e-6]")
    if mean == 0.0:
        return PhotonDistribution(np.array([1.0]))

    def pn(n: int) -> float:
        return math.exp(-mean + n * math.log(mean) - math.lgamma(n + 1))

    return _truncated(pn, lambda n: mean / (n + 1), tail_eps)


def tmcc_moments(lam: IntensityParam) -> MomentSummary:
    """Closed-form mean, second moment, variance and Mandel Q of a TMCC beam.

    mean = |lambda| * I_1(2|lambda|) / I_0(2|lambda|) and <N^2> = |lambda|^2;
    both verified against direct series summation of n*P_n and n^2*P_n.
    """
    m = lam.magnitude
    if m == 0.0:
        return MomentSummary(0.0, 0.0, 0.0, 0.0, degenerate=True)
    ratio = bessel_i(1, 2.0 * m) / bessel_i(0, 2.0 * m)
    mean = m * ratio
    second = m * m
    variance = second - mean * mean
    return MomentSummary(mean, second, variance, variance / mean - 1.0)
