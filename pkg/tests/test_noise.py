import math
import sys
import os

import numpy as np
import pytest
from scipy import stats

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from core.errors import ValidationError
from core.noise import (
    NoiseModel,
    RngStream,
    empirical_moments,
    gaussian_moments,
    laplace_moments,
    sample,
    sample_many,
)


class TestRngStream:
    def test_same_seed_same_sequence(self):
        """같은 (seed, stream_id) 는 같은 수열"""
        a = RngStream(42, 3).uniform(5)
        b = RngStream(42, 3).uniform(5)

        np.testing.assert_array_equal(a, b)

    def test_streams_differ(self):
        a = RngStream(42, 0).uniform(5)
        b = RngStream(42, 1).uniform(5)

        assert not np.array_equal(a, b)

    def test_streams_uncorrelated(self):
        """서로 다른 스트림의 상관계수는 0 근처"""
        a = RngStream(7, 0).uniform(200_000)
        b = RngStream(7, 1).uniform(200_000)

        assert abs(np.corrcoef(a, b)[0, 1]) < 0.02

    @pytest.mark.parametrize("seed", [-1, 2**64])
    def test_invalid_seed(self, seed):
        with pytest.raises(ValidationError):
            RngStream(seed)


class TestLaplaceSampling:
    def test_moments(self):
        """Laplace(b): 평균 0, 분산 2b^2"""
        b = 2.0
        x = sample_many(NoiseModel.laplace(b), RngStream(1), 10**6)
        se_mean = math.sqrt(2 * b**2 / len(x))

        assert abs(x.mean()) < 4 * se_mean
        assert x.var() == pytest.approx(2 * b**2, rel=0.02)

    def test_distribution(self):
        """콜모고로프-스미르노프 검정"""
        x = sample_many(NoiseModel.laplace(0.5), RngStream(2), 100_000)
        result = stats.kstest(x, stats.laplace(scale=0.5).cdf)

        assert result.pvalue > 1e-4

    def test_scalar_sample(self):
        value = sample(NoiseModel.laplace(1.0), RngStream(3))
        assert isinstance(value, float)

    def test_invalid_scale(self):
        """스케일이 0 이하이면 오류"""
        with pytest.raises(ValidationError) as exc_info:
            NoiseModel.laplace(0.0)

        assert "양수" in str(exc_info.value)


class TestStudentT3Sampling:
    def test_quantiles(self):
        """t3 는 4차 모멘트가 없어 분산 대신 분위수로 비교"""
        x = sample_many(NoiseModel.student_t3(), RngStream(4), 10**6)
        for p in (0.1, 0.25, 0.75, 0.9, 0.99):
            assert np.quantile(x, p) == pytest.approx(stats.t(3).ppf(p), rel=0.02)

    def test_scale(self):
        x = sample_many(NoiseModel.student_t3(2.0), RngStream(5), 10**6)
        iqr = np.quantile(x, 0.75) - np.quantile(x, 0.25)

        assert iqr == pytest.approx(2.0 * 2 * stats.t(3).ppf(0.75), rel=0.02)

    def test_higher_moments_undefined(self):
        with pytest.raises(ValidationError):
            NoiseModel.student_t3().moment_vector(3)

    def test_variance(self):
        assert NoiseModel.student_t3().variance == 3.0


class TestMoments:
    def test_laplace_moments(self):
        """Laplace(0.5) 0~4차 모멘트"""
        np.testing.assert_allclose(laplace_moments(0.5, 4), [1, 0, 0.5, 0, 1.5])

    def test_gaussian_moments(self):
        np.testing.assert_allclose(gaussian_moments(2.0, 6), [1, 0, 4, 0, 48, 0, 960])

    def test_laplace_moments_match_samples(self):
        x = sample_many(NoiseModel.laplace(1.0), RngStream(6), 10**6)
        emp = empirical_moments(x, 4)

        assert emp[2] == pytest.approx(2.0, rel=0.02)
        assert emp[4] == pytest.approx(24.0, rel=0.05)

    def test_moments_only_requires_unit_mass(self):
        with pytest.raises(ValidationError):
            NoiseModel.moments_only([0.9, 0, 1])

    def test_moments_only_without_sampler(self):
        model = NoiseModel.moments_only([1, 0, 2])

        np.testing.assert_array_equal(model.moment_vector(2), [1, 0, 2])
        with pytest.raises(ValidationError):
            sample(model, RngStream(0))

    def test_moments_only_too_short(self):
        with pytest.raises(ValidationError) as exc_info:
            NoiseModel.moments_only([1, 0, 2]).moment_vector(4)

        assert "모멘트가 부족" in str(exc_info.value)
