"""Eavesdropper models: beam splitting and state cloning.

Beam splitting diverts amplitude fraction q of Bob's mode to Eve; given a
total count n the photons partition binomially with per-photon probability
p^2 toward Bob.  The closed-form marginal below is validated in the test
suite against the brute-force binomial mixture, which is the authoritative
reference (the two agree only for the lambda^m numerator, not the
lambda^(2m) variant).

State cloning re-emits toward Bob a fresh state whose mean photon number
matches what Eve measured; three re-emission strategies are modeled.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.stats import binom

from .density_ops import DiagonalDensityMatrix
from .photon_stats import (
    MAX_LAMBDA,
    TAIL_EPS,
    IntensityParam,
    PhotonDistribution,
    PhotonStatsError,
    log_bessel_i,
    poisson_distribution,
    tmcc_distribution,
    tmcc_moments,
)
from .source import InverseCdfSampler, PulseRecord, SourceConfig, derive_rng


@dataclass(frozen=True)
class SplitRatio:
    """Amplitude split (p toward Bob, q toward Eve), p^2 + q^2 = 1."""

    p: float
    q: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.p <= 1.0 and 0.0 <= self.q <= 1.0):
            raise ValueError("amplitudes must lie in [0, 1]")
        if abs(self.p**2 + self.q**2 - 1.0) > 1e-12:
            raise ValueError(f"p^2 + q^2 must equal 1, got {self.p**2 + self.q**2}")

    @classmethod
    def from_p_squared(cls, p_sq: float) -> "SplitRatio":
        if not 0.0 <= p_sq <= 1.0:
            raise ValueError("p^2 must lie in [0, 1]")
        return cls(math.sqrt(p_sq), math.sqrt(1.0 - p_sq))

    @classmethod
    def from_angle(cls, psi: float) -> "SplitRatio":
        """p = cos(psi), q = sin(psi) for psi in [0, pi/2]."""
        if not 0.0 <= psi <= math.pi / 2:
            raise ValueError("psi must lie in [0, pi/2]")
        return cls(math.cos(psi), math.sin(psi))


class CloneStrategy(enum.Enum):
    SINGLE_PHOTON_BANK = "single-photon-bank"
    COHERENT = "coherent"
    TMCC_CLONE = "tmcc-clone"


def split_marginal_bob(lam: IntensityParam, r: SplitRatio, tail_eps: float = TAIL_EPS) -> PhotonDistribution:
    """Bob's photon-number marginal after an amplitude split (p toward Bob).

    Closed form lambda^m p^(2m) I_m(2 q lambda) / (q^m m! I_0(2 lambda)),
    evaluated in log-domain; limits p=1 (no split) and p=0 (vacuum at Bob)
    are handled exactly.
    """
    m = lam.magnitude
    if r.q == 0.0 or m == 0.0:
        return tmcc_distribution(lam, tail_eps)
    if r.p == 0.0:
        return PhotonDistribution(np.array([1.0]))
    base = tmcc_distribution(lam, tail_eps)
    log_i0 = log_bessel_i(0, 2.0 * m)
    log_coef = math.log(m) + 2.0 * math.log(r.p) - math.log(r.q)
    probs = np.empty(base.probs.size)
    for k in range(probs.size):
        probs[k] = math.exp(
            k * log_coef - math.lgamma(k + 1) + log_bessel_i(k, 2.0 * r.q * m) - log_i0
        )
    tail = max(0.0, 1.0 - float(probs.sum()))
    return PhotonDistribution(probs, tail_mass=tail)


def split_marginal_eve(lam: IntensityParam, r: SplitRatio, tail_eps: float = TAIL_EPS) -> PhotonDistribution:
    """Eve's marginal: Bob's with the roles of p and q exchanged."""
    return split_marginal_bob(lam, SplitRatio(r.q, r.p), tail_eps)


def split_marginal_binomial(lam: IntensityParam, r: SplitRatio, tail_eps: float = TAIL_EPS) -> PhotonDistribution:
    """Brute-force oracle for Bob's split marginal.

    Mixes Binomial(n, p^2) over the TMCC law for n directly; slower than the
    closed form but an independent consequence of the amplitude split.
    """
    base = tmcc_distribution(lam, tail_eps)
    size = base.probs.size
    p_sq = r.p**2
    probs = np.zeros(size)
    ks = np.arange(size)
    for n in range(size):
        probs += base.probs[n] * binom.pmf(ks, n, p_sq)
    tail = max(0.0, 1.0 - float(probs.sum()))
    return PhotonDistribution(probs, tail_mass=tail)


class SplitPulseSampler:
    """Samples pulses through Eve's beam splitter: n_a = n, n_b + n_e = n."""

    def __init__(self, cfg: SourceConfig, r: SplitRatio, tail_eps: float = TAIL_EPS):
        self.cfg = cfg
        self.ratio = r
        self.distribution = tmcc_distribution(cfg.lam, tail_eps)
        self._sampler = InverseCdfSampler(self.distribution, derive_rng(cfg.seed, 0))
        self._split_rng = derive_rng(cfg.seed, 2)
        self._noise_rng = derive_rng(cfg.seed, 1)

    def sample_batch(self, count: int) -> list[PulseRecord]:
        if count < 1:
            raise ValueError("count must be >= 1")
        n = self._sampler.draw(count)
        k = self._split_rng.binomial(n, self.ratio.p**2)
        eps = self.cfg.noise_epsilon
        if eps > 0.0:
            noise_a = self._noise_rng.random(count) < eps
            noise_b = self._noise_rng.random(count) < eps
        else:
            noise_a = np.zeros(count, dtype=bool)
            noise_b = np.zeros(count, dtype=bool)
        return [
            PulseRecord(int(nn + fa), int(kk + fb), int(nn - kk), bool(fa), bool(fb))
            for nn, kk, fa, fb in zip(n, k, noise_a, noise_b)
        ]

    def sample_pulse(self) -> PulseRecord:
        return self.sample_batch(1)[0]


def _mean_of_lambda(x: float) -> float:
    if x == 0.0:
        return 0.0
    return x * math.exp(log_bessel_i(1, 2.0 * x) - log_bessel_i(0, 2.0 * x))


def lambda_for_mean(target: float) -> IntensityParam:
    """Invert the mean photon number: the unique lambda with <N>(lambda) = target."""
    if not math.isfinite(target) or target < 0.0:
        raise PhotonStatsError("target mean must be finite and >= 0")
    if target == 0.0:
        return IntensityParam(0.0)
    if target > _mean_of_lambda(MAX_LAMBDA):
        raise PhotonStatsError(f"mean {target} not reachable below lambda ceiling {MAX_LAMBDA}")
    root = brentq(lambda x: _mean_of_lambda(x) - target, 0.0, MAX_LAMBDA, xtol=1e-12)
    return IntensityParam(float(root))


@lru_cache(maxsize=4096)
def lambda_of_n(n: int) -> IntensityParam:
    """Eve's optimal TMCC clone setting for a measured photon number n."""
    if n < 0:
        raise PhotonStatsError("photon number must be >= 0")
    return lambda_for_mean(float(n))


def _clone_inner_law(n: int, strategy: CloneStrategy, tail_eps: float) -> PhotonDistribution:
    if strategy is CloneStrategy.SINGLE_PHOTON_BANK:
        probs = np.zeros(n + 1)
        probs[n] = 1.0
        return PhotonDistribution(probs)
    if strategy is CloneStrategy.COHERENT:
        return poisson_distribution(float(n), tail_eps)
    return tmcc_distribution(lambda_of_n(n), tail_eps)


def cloned_bob_matrix(
    lam: IntensityParam, strategy: CloneStrategy, tail_eps: float = TAIL_EPS
) -> DiagonalDensityMatrix:
    """Density matrix Bob measures when Eve intercepts and re-emits clones.

    Mixture over Eve's measured n (TMCC-weighted) of the strategy's
    re-emission law with mean n; truncation remainders are folded back by
    renormalization.
    """
    outer = tmcc_distribution(lam, tail_eps)
    inners = [_clone_inner_law(n, strategy, tail_eps) for n in range(outer.probs.size)]
    size = max(d.probs.size for d in inners)
    probs = np.zeros(size)
    for w, inner in zip(outer.probs, inners):
        probs[: inner.probs.size] += w * inner.probs
    probs /= probs.sum()
    return DiagonalDensityMatrix(PhotonDistribution(probs))


class ClonePulseSampler:
    """Samples pulses under a cloning attack: Alice keeps the true n, Bob
    receives a draw from Eve's re-emitted state, Eve knows n exactly."""

    def __init__(self, cfg: SourceConfig, strategy: CloneStrategy, tail_eps: float = TAIL_EPS):
        self.cfg = cfg
        self.strategy = strategy
        self.distribution = tmcc_distribution(cfg.lam, tail_eps)
        self._tail_eps = tail_eps
        self._sampler = InverseCdfSampler(self.distribution, derive_rng(cfg.seed, 0))
        self._clone_rng = derive_rng(cfg.seed, 3)
        self._noise_rng = derive_rng(cfg.seed, 1)
        self._inner: dict[int, InverseCdfSampler] = {}

    def _inner_sampler(self, n: int) -> InverseCdfSampler:
        if n not in self._inner:
            law = _clone_inner_law(n, self.strategy, self._tail_eps)
            self._inner[n] = InverseCdfSampler(law, self._clone_rng)
        return self._inner[n]

    def sample_batch(self, count: int) -> list[PulseRecord]:
        if count < 1:
            raise ValueError("count must be >= 1")
        n = self._sampler.draw(count)
        k = np.empty(count, dtype=int)
        for value in np.unique(n):
            mask = n == value
            k[mask] = self._inner_sampler(int(value)).draw(int(mask.sum()))
        eps = self.cfg.noise_epsilon
        if eps > 0.0:
            noise_a = self._noise_rng.random(count) < eps
            noise_b = self._noise_rng.random(count) < eps
        else:
            noise_a = np.zeros(count, dtype=bool)
            noise_b = np.zeros(count, dtype=bool)
        return [
            PulseRecord(int(nn + fa), int(kk + fb), int(nn), bool(fa), bool(fb))
            for nn, kk, fa, fb in zip(n, k, noise_a, noise_b)
        ]
