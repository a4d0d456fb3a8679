import math
from dataclasses import dataclass

import numpy as np

from core.errors import ValidationError
from core.function_model import ArrayLike, SmoothFunction
from core.noise import NoiseModel, RngStream, sample_many
from core.quadrature import integrate

# 몬테카를로 편향 추정의 최소 표본 수
MIN_BIAS_SAMPLES = 10**4


@dataclass(frozen=True)
class LaplaceEstimator:
    """
    라플라스 노이즈 하에서 f(q) 의 불편 추정량 g = f - b^2 f''.

    f 는 실수 전체에서 두 번 미분 가능하고 다항식 이하로 증가해야 합니다.
    정의역이 유계인 f 는 extension_optimizer 로 확장한 뒤 사용합니다.
    """
    f: SmoothFunction
    b: float

    def __post_init__(self):
        if not self.b > 0:
            raise ValidationError(f"라플라스 스케일 b 는 양수여야 합니다: {self.b}")
        if not self.f.twice_differentiable:
            hint = " (절댓값 함수는 plug_in_bias_abs 로 편향을 계산하세요)" if self.f.name == "abs" else ""
            raise ValidationError(f"{self.f.label} 은(는) 실수 전체에서 두 번 미분 가능하지 않습니다{hint}")
        if not self.f.polynomial_growth:
            raise ValidationError(
                f"{self.f.label} 은(는) 다항식 증가 조건을 만족하지 않습니다 "
                "(하한이 있는 경우 extension_optimizer 를 사용하세요)"
            )

    def __call__(self, x_tilde: ArrayLike) -> ArrayLike:
        return estimate(self, x_tilde)


def estimate(estimator: LaplaceEstimator, x_tilde: ArrayLike) -> ArrayLike:
    """노이즈가 더해진 관측값에서 g(x) = f(x) - b^2 f''(x) 를 계산합니다."""
    f = estimator.f
    return f.value_at(x_tilde) - estimator.b**2 * f.d2_at(x_tilde)


def power_estimate(k: int, b: float, x_tilde: ArrayLike) -> ArrayLike:
    """
    q^k 의 불편 추정량 x^k - b^2 k(k-1) x^(k-2).

    Args:
        k: 0 이상의 정수 차수
        b: 라플라스 스케일
        x_tilde: 노이즈 관측값

    Returns:
        추정값
    """
    if k < 0 or int(k) != k:
        raise ValidationError(f"차수는 0 이상의 정수여야 합니다: {k}")
    if not b > 0:
        raise ValidationError(f"라플라스 스케일 b 는 양수여야 합니다: {b}")
    k = int(k)
    x = np.asarray(x_tilde, dtype=float)
    out = np.power(x, k)
    if k >= 2:
        out = out - b**2 * k * (k - 1) * np.power(x, k - 2)
    return float(out) if x.ndim == 0 else out


def plug_in_bias_abs(q: float, b: float) -> float:
    """E|q + Z| - |q| = b exp(-|q|/b), Z ~ Laplace(b)"""
    if not b > 0:
        raise ValidationError(f"라플라스 스케일 b 는 양수여야 합니다: {b}")
    return b * math.exp(-abs(q) / b)


def plug_in_bias_mc(
    f: SmoothFunction,
    q: float,
    b: float,
    n_samples: int,
    rng: RngStream,
) -> tuple[float, float]:
    """
    플러그인 추정 f(q + Z) 의 편향을 몬테카를로로 추정합니다.

    Returns:
        (편향 추정치, 표준오차)
    """
    if n_samples < MIN_BIAS_SAMPLES:
        raise ValidationError(f"표본 수는 {MIN_BIAS_SAMPLES} 이상이어야 합니다: {n_samples}")
    z = sample_many(NoiseModel.laplace(b), rng, n_samples)
    diffs = f.value_at(q + z) - f.value_at(q)
    return float(np.mean(diffs)), float(np.std(diffs, ddof=1) / math.sqrt(n_samples))


def plug_in_bias_quad(f: SmoothFunction, q: float, b: float) -> float:
    """
    두 번 미분 가능한 f 에 대해 E[f(q + Z)] - f(q) = b^2 E[f''(q + Z)] 를 적분으로 계산합니다.

    라플라스 밀도를 대칭으로 접어 [0, inf) 위의 e^{-s} 가중 적분 하나로 계산합니다.
    """
    if not b > 0:
        raise ValidationError(f"라플라스 스케일 b 는 양수여야 합니다: {b}")
    if not f.twice_differentiable:
        raise ValidationError(f"{f.label} 은(는) 두 번 미분 가능하지 않습니다")

    def integrand(s: float) -> float:
        return 0.5 * (f.d2_at(q + b * s) + f.d2_at(q - b * s)) * math.exp(-s)

    value, _ = integrate(integrand, 0.0, math.inf)
    return b**2 * value


def affine_self_estimator(f: SmoothFunction, b: float) -> tuple[float, float] | None:
    """
    불편 추정량이 플러그인의 아핀 변환 alpha * f + beta 인 함수의 (alpha, beta).

    선형 함수는 (1, 0), cos(ux) / sin(ux) 는 (1 + b^2 u^2, 0). 해당하지 않으면 None.
    """
    if f.name in ("cos", "sin"):
        u = f.params[0]
        return 1.0 + b**2 * u**2, 0.0
    if f.name == "identity":
        return 1.0, 0.0
    if f.name == "power" and f.params[0] <= 1:
        return 1.0, 0.0
    if f.name == "poly" and len(f.params) <= 2:
        return 1.0, 0.0
    return None
