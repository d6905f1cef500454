"""Monte Carlo model of the TMCC source, the two-party channel and
thermal noise.

One pulse draws a single photon number n from the TMCC law; both parties
see exactly that n (the channel is lossless), so without noise the
Alice/Bob correlation is exactly 1.  Thermal noise independently adds at
most one extra photon per mode per pulse, with probability `noise_epsilon`
each.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .photon_stats import TAIL_EPS, IntensityParam, PhotonDistribution, tmcc_distribution


@dataclass(frozen=True)
class SourceConfig:
    """Source intensity, per-mode noise probability and RNG seed."""

    lam: IntensityParam
    noise_epsilon: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.noise_epsilon <= 0.5:
            raise ValueError(f"noise_epsilon must be in [0, 0.5], got {self.noise_epsilon}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class PulseRecord:
    """Outcome of one pulse: counts seen by Alice, Bob and Eve plus noise flags."""

    n_a: int
    n_b: int
    n_e: int = 0
    noise_a: bool = False
    noise_b: bool = False


class CorrelationReport(NamedTuple):
    g_ab: float
    rho_ab: float
    degenerate: bool


class InverseCdfSampler:
    """Inverse-CDF sampler over a truncated photon-number distribution.

    The residual tail (< tail_eps) is folded into the last bin.  Not
    thread-safe; create independent instances (with derived seeds) for
    parallel streams.
    """

    def __init__(self, dist: PhotonDistribution, rng: np.random.Generator):
        cdf = np.cumsum(dist.probs)
        cdf[-1] = 1.0
        self._cdf = cdf
        self._rng = rng

    def draw(self, size: int | None = None):
        u = self._rng.random(size)
        return np.searchsorted(self._cdf, u, side="left")


def derive_rng(seed: int, *path: int) -> np.random.Generator:
    """Reproducible PCG64 stream; extra path integers split independent
    sub-streams off one master seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, path)])))


class PulseSampler:
    """Samples correlated TMCC pulses for one (lambda, epsilon, seed) setup."""

    def __init__(self, cfg: SourceConfig, tail_eps: float = TAIL_EPS):
        self.cfg = cfg
        self.distribution = tmcc_distribution(cfg.lam, tail_eps)
        self._sampler = InverseCdfSampler(self.distribution, derive_rng(cfg.seed, 0))
        self._noise_rng = derive_rng(cfg.seed, 1)

    def sample_batch(self, count: int) -> list[PulseRecord]:
        n, noise_a, noise_b = self.sample_arrays(count)
        n_a = n + noise_a
        n_b = n + noise_b
        return [
            PulseRecord(int(a), int(b), 0, bool(fa), bool(fb))
            for a, b, fa, fb in zip(n_a, n_b, noise_a, noise_b)
        ]

    def sample_arrays(self, count: int):
        """Vectorized form: (base counts, noise flags A, noise flags B)."""
        if count < 1:
            raise ValueError("count must be >= 1")
        n = self._sampler.draw(count)
        eps = self.cfg.noise_epsilon
        if eps > 0.0:
            noise_a = self._noise_rng.random(count) < eps
            noise_b = self._noise_rng.random(count) < eps
        else:
            noise_a = np.zeros(count, dtype=bool)
            noise_b = np.zeros(count, dtype=bool)
        return n, noise_a, noise_b

    def sample_pulse(self) -> PulseRecord:
        return self.sample_batch(1)[0]


def sample_pulses(cfg: SourceConfig, count: int, tail_eps: float = TAIL_EPS) -> list[PulseRecord]:
    """Convenience wrapper: a fresh sampler and `count` pulses from it."""
    return PulseSampler(cfg, tail_eps).sample_batch(count)


def correlation_report(pulses: Sequence[PulseRecord]) -> CorrelationReport:
    """Sample covariance g_AB and Pearson correlation rho_AB of (n_a, n_b).

    Returns degenerate=True (with rho_ab = nan) when either margin is
    constant, e.g. at zero intensity.
    """
    if len(pulses) < 2:
        raise ValueError("need at least 2 pulses")
    a = np.array([p.n_a for p in pulses], dtype=float)
    b = np.array([p.n_b for p in pulses], dtype=float)
    da = a - a.mean()
    db = b - b.mean()
    g_ab = float(np.dot(da, db)) / (len(pulses) - 1)
    sa = math.sqrt(float(np.dot(da, da)) / (len(pulses) - 1))
    sb = math.sqrt(float(np.dot(db, db)) / (len(pulses) - 1))
    if sa == 0.0 or sb == 0.0:
        return CorrelationReport(g_ab, math.nan, True)
    if np.array_equal(a, b):
        # identical margins correlate exactly; skip the lossy sqrt round trip
        return CorrelationReport(g_ab, 1.0, False)
    return CorrelationReport(g_ab, g_ab / (sa * sb), False)


def write_pulse_log(path, pulses: Iterable[PulseRecord]) -> None:
    """CSV pulse log: pulse_index,n_a,n_b,n_e,noise_a,noise_b."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pulse_index", "n_a", "n_b", "n_e", "noise_a", "noise_b"])
        for i, p in enumerate(pulses):
            writer.writerow([i, p.n_a, p.n_b, p.n_e, int(p.noise_a), int(p.noise_b)])
