import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tmcc_qkd.photon_stats import (
    MAX_LAMBDA,
    IntensityParam,
    PhotonStatsError,
    bessel_i,
    log_bessel_i,
    poisson_distribution,
    tmcc_distribution,
    tmcc_moments,
    tmcc_pn,
)

# frozen from a 40-digit mpmath power-series oracle
I0_AT_2 = 2.2795853023360672674
INV_I0_AT_2 = 0.4386762798370487394
MEAN_AT_1 = 0.6977746579640079820
MEAN_AT_2 = 1.7270452220491011657


def series_bessel_i(order: int, x: float, terms: int = 200) -> float:
    """Independent oracle: direct power series in exact rational arithmetic."""
    from fractions import Fraction

    half = Fraction(x).limit_denominator(10**12) / 2
    total = Fraction(0)
    for k in range(terms):
        total += half ** (order + 2 * k) / (math.factorial(k) * math.factorial(order + k))
    return float(total)


def series_moment(lam: float, power: int, terms: int = 200) -> float:
    """Independent oracle: n^power moment by direct series summation."""
    from fractions import Fraction

    lam_sq = (Fraction(lam).limit_denominator(10**12)) ** 2
    i0 = Fraction(0)
    total = Fraction(0)
    for n in range(terms):
        term = lam_sq**n / math.factorial(n) ** 2
        i0 += term
        total += n**power * term
    return float(total / i0)


class TestIntensityParam:
    def test_rejects_negative(self):
        with pytest.raises(PhotonStatsError):
            IntensityParam(-0.1)

    def test_rejects_nan_and_inf(self):
        for bad in (math.nan, math.inf):
            with pytest.raises(PhotonStatsError):
                IntensityParam(bad)

    def test_rejects_above_ceiling(self):
        with pytest.raises(PhotonStatsError):
            IntensityParam(MAX_LAMBDA + 1)


class TestBessel:
    def test_at_zero(self):
        assert bessel_i(0, 0.0) == 1.0
        assert bessel_i(1, 0.0) == 0.0
        assert bessel_i(7, 0.0) == 0.0

    def test_i0_at_2(self):
        assert bessel_i(0, 2.0) == pytest.approx(I0_AT_2, rel=1e-12)

    def test_negative_argument_raises(self):
        with pytest.raises(PhotonStatsError):
            bessel_i(0, -1.0)
        with pytest.raises(PhotonStatsError):
            bessel_i(-1, 1.0)

    @pytest.mark.parametrize("order", [0, 1, 2, 5, 12, 30])
    @pytest.mark.parametrize("x", [0.1, 1.0, 4.0, 17.5, 60.0, 100.0])
    def test_against_series_oracle(self, order, x):
        assert bessel_i(order, x) == pytest.approx(series_bessel_i(order, x), rel=1e-12)

    @pytest.mark.parametrize("order,x", [(0, 1.0), (3, 8.0), (25, 60.0), (150, 40.0)])
    def test_log_form_consistent(self, order, x):
        assert math.exp(log_bessel_i(order, x)) == pytest.approx(bessel_i(order, x), rel=1e-12)

    def test_log_form_below_underflow(self):
        # order high enough that the linear-scale value underflows
        assert bessel_i(400, 10.0) == 0.0
        assert log_bessel_i(400, 10.0) < -700


class TestTmccPn:
    def test_vacuum(self):
        lam0 = IntensityParam(0.0)
        assert tmcc_pn(lam0, 0) == 1.0
        assert tmcc_pn(lam0, 1) == 0.0

    def test_ground_probability_at_1(self):
        assert tmcc_pn(IntensityParam(1.0), 0) == pytest.approx(INV_I0_AT_2, rel=1e-12)

    def test_log_domain_continuity(self):
        # values straddling the log-domain switch must agree with direct series
        lam = IntensityParam(4.0)
        i0 = series_bessel_i(0, 8.0)
        for n in (18, 19, 20, 21, 22, 40):
            expected = 4.0 ** (2 * n) / (i0 * math.factorial(n) ** 2)
            assert tmcc_pn(lam, n) == pytest.approx(expected, rel=1e-11)

    def test_negative_n_raises(self):
        with pytest.raises(PhotonStatsError):
            tmcc_pn(IntensityParam(1.0), -1)


class TestTmccDistribution:
    def test_vacuum_is_point_mass(self):
        d = tmcc_distribution(IntensityParam(0.0))
        assert d.cutoff == 0
        assert d.probs[0] == 1.0

    def test_normalization_grid(self):
        for lam in np.linspace(0.0, 10.0, 50):
            d = tmcc_distribution(IntensityParam(float(lam)))
            assert abs(float(d.probs.sum()) + d.tail_mass - 1.0) <= 1e-12

    def test_term_ratio_identity(self):
        d = tmcc_distribution(IntensityParam(2.0))
        for n in range(d.cutoff):
            if d.probs[n] > 1e-300 and d.probs[n + 1] > 1e-300:
                assert d.probs[n + 1] / d.probs[n] == pytest.approx(4.0 / (n + 1) ** 2, rel=1e-9)

    def test_unimodal_then_decreasing(self):
        d = tmcc_distribution(IntensityParam(2.0))
        diffs = np.sign(np.diff(d.probs))
        # once decreasing, stays decreasing
        first_down = np.argmax(diffs < 0)
        assert np.all(diffs[first_down:] <= 0)

    def test_tail_eps_validated(self):
        with pytest.raises(PhotonStatsError):
            tmcc_distribution(IntensityParam(1.0), tail_eps=1e-3)
        with pytest.raises(PhotonStatsError):
            tmcc_distribution(IntensityParam(1.0), tail_eps=0.0)

    @given(st.floats(min_value=0.0, max_value=10.0, allow_nan=False))
    @settings(max_examples=40, deadline=None)
    def test_normalization_property(self, lam):
        d = tmcc_distribution(IntensityParam(lam))
        assert abs(float(d.probs.sum()) + d.tail_mass - 1.0) <= 1e-12
        assert np.all(d.probs >= 0.0)


class TestMoments:
    def test_vacuum(self):
        m = tmcc_moments(IntensityParam(0.0))
        assert (m.mean, m.second_moment, m.variance, m.mandel_q) == (0.0, 0.0, 0.0, 0.0)
        assert m.degenerate

    def test_second_moment_exact(self):
        assert tmcc_moments(IntensityParam(2.0)).second_moment == 4.0

    def test_mean_at_1(self):
        assert tmcc_moments(IntensityParam(1.0)).mean == pytest.approx(MEAN_AT_1, rel=1e-12)

    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0, 4.0, 8.0])
    def test_closed_form_matches_series_oracle(self, lam):
        # the bare-series moments are the oracle for the closed forms
        m = tmcc_moments(IntensityParam(lam))
        assert m.mean == pytest.approx(series_moment(lam, 1), rel=1e-11)
        assert m.second_moment == pytest.approx(series_moment(lam, 2), rel=1e-11)

    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0, 4.0, 8.0])
    def test_moments_match_truncated_distribution(self, lam):
        m = tmcc_moments(IntensityParam(lam))
        d = tmcc_distribution(IntensityParam(lam))
        assert d.mean() == pytest.approx(m.mean, rel=1e-9)
        assert d.second_moment() == pytest.approx(m.second_moment, rel=1e-9)

    @pytest.mark.parametrize("lam", [0.3, 1.0, 2.5, 7.0, 10.0])
    def test_variance_identity(self, lam):
        m = tmcc_moments(IntensityParam(lam))
        assert m.variance == pytest.approx(m.second_moment - m.mean**2, rel=1e-12)
        assert m.variance >= 0.0

    def test_sub_poisson_everywhere(self):
        for lam in np.linspace(0.1, 10.0, 100):
            assert tmcc_moments(IntensityParam(float(lam))).mandel_q < 0.0


class TestPoisson:
    def test_zero_mean(self):
        d = poisson_distribution(0.0)
        assert d.cutoff == 0 and d.probs[0] == 1.0

    def test_ground_probability(self):
        assert poisson_distribution(1.0).prob(0) == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_mandel_q_zero(self):
        assert abs(poisson_distribution(3.0).mandel_q()) <= 1e-9

    def test_dispersion_ordering(self):
        from tmcc_qkd.attacks import lambda_for_mean

        for mean in np.linspace(8.0 / 50.0, 8.0, 50):
            m = tmcc_moments(lambda_for_mean(float(mean)))
            assert m.variance < m.mean  # Poisson variance equals the mean
