import math

import numpy as np
import pytest

from tmcc_qkd.photon_stats import IntensityParam, tmcc_distribution, tmcc_moments
from tmcc_qkd.source import (
    PulseRecord,
    PulseSampler,
    SourceConfig,
    correlation_report,
    sample_pulses,
    write_pulse_log,
)

LAM2 = IntensityParam(2.0)


class TestSourceConfig:
    def test_epsilon_bounds(self):
        with pytest.raises(ValueError):
            SourceConfig(LAM2, noise_epsilon=0.6)
        with pytest.raises(ValueError):
            SourceConfig(LAM2, noise_epsilon=-0.1)

    def test_seed_range(self):
        with pytest.raises(ValueError):
            SourceConfig(LAM2, seed=2**64)


class TestSampling:
    def test_zero_intensity_always_vacuum(self):
        pulses = sample_pulses(SourceConfig(IntensityParam(0.0), seed=1), 200)
        assert all(p.n_a == 0 and p.n_b == 0 for p in pulses)

    def test_determinism_bit_for_bit(self):
        cfg = SourceConfig(LAM2, noise_epsilon=0.1, seed=12345)
        assert sample_pulses(cfg, 5000) == sample_pulses(cfg, 5000)

    def test_noiseless_identity_large_sample(self):
        sampler = PulseSampler(SourceConfig(LAM2, seed=7))
        n, noise_a, noise_b = sampler.sample_arrays(1_000_000)
        assert not noise_a.any() and not noise_b.any()  # n_a == n_b == n follows

    def test_noise_marginal_rate(self):
        eps = 0.2
        sampler = PulseSampler(SourceConfig(LAM2, noise_epsilon=eps, seed=11))
        _, noise_a, noise_b = sampler.sample_arrays(100_000)
        se = math.sqrt(eps * (1 - eps) / 100_000)
        assert abs(noise_a.mean() - eps) < 3 * se
        assert abs(noise_b.mean() - eps) < 3 * se

    def test_mean_converges_with_noise(self):
        eps = 0.1
        sampler = PulseSampler(SourceConfig(LAM2, noise_epsilon=eps, seed=21))
        n, _, noise_b = sampler.sample_arrays(1_000_000)
        n_b = n + noise_b
        moments = tmcc_moments(LAM2)
        se = math.sqrt((moments.variance + eps * (1 - eps)) / 1_000_000)
        assert abs(n_b.mean() - (moments.mean + eps)) < 3 * se

    def test_empirical_distribution_total_variation(self):
        sampler = PulseSampler(SourceConfig(LAM2, seed=31))
        n, _, _ = sampler.sample_arrays(1_000_000)
        analytic = tmcc_distribution(LAM2)
        hist = np.bincount(n, minlength=analytic.probs.size) / n.size
        common = min(hist.size, analytic.probs.size)
        tv = 0.5 * (
            np.abs(hist[:common] - analytic.probs[:common]).sum()
            + hist[common:].sum()
            + analytic.probs[common:].sum()
        )
        assert tv < 0.01


class TestCorrelation:
    def test_noiseless_correlation_exactly_one(self):
        pulses = sample_pulses(SourceConfig(LAM2, seed=41), 20_000)
        report = correlation_report(pulses)
        assert report.rho_ab == 1.0
        assert not report.degenerate

    def test_independent_streams_decorrelate(self):
        rng = np.random.default_rng(5)
        mean = tmcc_moments(LAM2).mean
        pulses = [
            PulseRecord(int(a), int(b))
            for a, b in zip(rng.poisson(mean, 10_000), rng.poisson(mean, 10_000))
        ]
        assert abs(correlation_report(pulses).rho_ab) < 0.05

    def test_noise_partially_decorrelates(self):
        pulses = sample_pulses(SourceConfig(LAM2, noise_epsilon=0.2, seed=51), 50_000)
        report = correlation_report(pulses)
        assert 0.0 < report.rho_ab < 1.0

    def test_degenerate_margin(self):
        pulses = [PulseRecord(0, 0), PulseRecord(0, 0), PulseRecord(0, 0)]
        report = correlation_report(pulses)
        assert report.degenerate
        assert math.isnan(report.rho_ab)

    def test_needs_two_pulses(self):
        with pytest.raises(ValueError):
            correlation_report([PulseRecord(1, 1)])


class TestPulseLog:
    def test_csv_layout(self, tmp_path):
        path = tmp_path / "pulses.csv"
        write_pulse_log(path, [PulseRecord(2, 3, 1, False, True)])
        lines = path.read_text().splitlines()
        assert lines[0] == "pulse_index,n_a,n_b,n_e,noise_a,noise_b"
        assert lines[1] == "0,2,3,1,0,1"
