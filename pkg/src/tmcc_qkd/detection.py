"""Bob-side eavesdropping detection from photon-count statistics.

Splitting diverts photons, so it shows up as a mean deficit; cloning
preserves the mean but broadens the counting statistics, so it shows up in
the Mandel parameter and in the matrix distances to the expected state.
Decision thresholds are calibrated empirically from clean Monte Carlo runs
(Bonferroni-split false-alarm budget across the four statistics).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .density_ops import DiagonalDensityMatrix, hs_distance_sq, weak_distance
from .photon_stats import (
    TAIL_EPS,
    IntensityParam,
    PhotonDistribution,
    tmcc_distribution,
    tmcc_moments,
)
from .source import InverseCdfSampler, derive_rng

MIN_PULSES = 1000
# hard floor: a mean deficit this large at >= 1e4 pulses is never CLEAN
_HARD_MEAN_RATIO = 0.75
_HARD_MEAN_PULSES = 10_000


class DetectionVerdict(enum.Enum):
    CLEAN = "clean"
    SUSPECT_SPLIT = "suspect-split"
    SUSPECT_CLONE = "suspect-clone"
    INSUFFICIENT_DATA = "insufficient-data"


@dataclass(frozen=True)
class DetectionThresholds:
    """Calibrated decision thresholds plus their calibration provenance."""

    mean_low: float
    mean_high: float
    mandel_q_dev_max: float
    hs_dist_sq_max: float
    weak_dist_max: float
    min_pulses: int = MIN_PULSES
    alpha: float = 0.01
    calibration_seed: int = 0
    calibration_trials: int = 0
    calibration_pulses: int = 0


@dataclass(frozen=True)
class DetectionReport:
    empirical_mean: float
    empirical_mandel_q: float
    hs_dist_sq: float
    weak_dist: float
    verdict: DetectionVerdict
    pulse_count: int

    def to_text(self) -> str:
        """Flat key=value serialization, 12 significant digits."""
        lines = [
            f"empirical_mean={self.empirical_mean:.12g}",
            f"empirical_mandel_q={self.empirical_mandel_q:.12g}",
            f"hs_dist_sq={self.hs_dist_sq:.12g}",
            f"weak_dist={self.weak_dist:.12g}",
            f"verdict={self.verdict.value}",
            f"pulse_count={self.pulse_count}",
        ]
        return "\n".join(lines) + "\n"


def empirical_distribution(counts: Sequence[int]) -> PhotonDistribution:
    """Normalized histogram of observed counts (tail mass zero)."""
    arr = np.asarray(counts, dtype=int)
    if arr.size == 0:
        raise ValueError("counts must be nonempty")
    if np.any(arr < 0):
        raise ValueError("counts must be >= 0")
    hist = np.bincount(arr).astype(float)
    return PhotonDistribution(hist / arr.size)


def _run_statistics(counts: np.ndarray, expected: DiagonalDensityMatrix, expected_q: float):
    emp = empirical_distribution(counts)
    emp_matrix = DiagonalDensityMatrix(emp)
    mean = emp.mean()
    q_dev = abs(emp.mandel_q() - expected_q) if mean > 0 else abs(expected_q)
    return mean, q_dev, hs_distance_sq(emp_matrix, expected), weak_distance(emp_matrix, expected), emp


def calibrate_thresholds(
    lam: IntensityParam,
    pulses: int,
    trials: int = 1000,
    seed: int = 0,
    alpha: float = 0.01,
) -> DetectionThresholds:
    """Set thresholds from the clean-run Monte Carlo null distribution.

    The false-alarm budget alpha is split Bonferroni-style: alpha/4 to each
    of the two-sided mean check, the Mandel deviation, and the two
    distances, so the union false-alarm rate stays at or below alpha.
    """
    if trials < 100:
        raise ValueError("need at least 100 calibration trials")
    analytic = tmcc_distribution(lam, TAIL_EPS)
    expected = DiagonalDensityMatrix(analytic)
    expected_q = tmcc_moments(lam).mandel_q
    means = np.empty(trials)
    q_devs = np.empty(trials)
    hs_vals = np.empty(trials)
    weak_vals = np.empty(trials)
    for t in range(trials):
        sampler = InverseCdfSampler(analytic, derive_rng(seed, 10, t))
        counts = sampler.draw(pulses)
        means[t], q_devs[t], hs_vals[t], weak_vals[t], _ = _run_statistics(
            counts, expected, expected_q
        )
    per_stat = alpha / 4.0
    return DetectionThresholds(
        mean_low=float(np.quantile(means, per_stat / 2.0)),
        mean_high=float(np.quantile(means, 1.0 - per_stat / 2.0)),
        mandel_q_dev_max=float(np.quantile(q_devs, 1.0 - per_stat)),
        hs_dist_sq_max=float(np.quantile(hs_vals, 1.0 - per_stat)),
        weak_dist_max=float(np.quantile(weak_vals, 1.0 - per_stat)),
        min_pulses=MIN_PULSES,
        alpha=alpha,
        calibration_seed=seed,
        calibration_trials=trials,
        calibration_pulses=pulses,
    )


def detect(
    counts: Sequence[int],
    expected_lambda: IntensityParam,
    thresholds: DetectionThresholds,
) -> DetectionReport:
    """Classify a stream of Bob-side counts against the declared source."""
    arr = np.asarray(counts, dtype=int)
    analytic = tmcc_distribution(expected_lambda, TAIL_EPS)
    expected = DiagonalDensityMatrix(analytic)
    moments = tmcc_moments(expected_lambda)
    mean, q_dev, hs_val, weak_val, emp = _run_statistics(arr, expected, moments.mandel_q)
    report_fields = dict(
        empirical_mean=mean,
        empirical_mandel_q=emp.mandel_q(),
        hs_dist_sq=hs_val,
        weak_dist=weak_val,
        pulse_count=int(arr.size),
    )
    if arr.size < thresholds.min_pulses:
        return DetectionReport(verdict=DetectionVerdict.INSUFFICIENT_DATA, **report_fields)
    mean_deficit = mean < thresholds.mean_low or (
        arr.size >= _HARD_MEAN_PULSES and mean < _HARD_MEAN_RATIO * moments.mean
    )
    if mean_deficit:
        return DetectionReport(verdict=DetectionVerdict.SUSPECT_SPLIT, **report_fields)
    shape_deviation = (
        mean > thresholds.mean_high
        or q_dev > thresholds.mandel_q_dev_max
        or hs_val > thresholds.hs_dist_sq_max
        or weak_val > thresholds.weak_dist_max
    )
    if shape_deviation:
        return DetectionReport(verdict=DetectionVerdict.SUSPECT_CLONE, **report_fields)
    return DetectionReport(verdict=DetectionVerdict.CLEAN, **report_fields)
