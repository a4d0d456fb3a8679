import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

from core.config import MAX_MOMENT_DEGREE
from core.errors import ValidationError
from core.function_model import ArrayLike, Polynomial, poly_eval
from core.noise import NoiseModel

logger = logging.getLogger(__name__)

MomentsLike = Sequence[float] | np.ndarray | NoiseModel

# 이 이상의 조건수는 경고
_CONDITION_WARNING = 1e12


def _moment_array(mu: MomentsLike, p: int) -> np.ndarray:
    if isinstance(mu, NoiseModel):
        return mu.moment_vector(p)
    mu = np.asarray(mu, dtype=float)
    if mu.ndim != 1 or len(mu) == 0 or abs(mu[0] - 1.0) > 1e-12:
        raise ValidationError("모멘트 벡터는 mu_0 = 1 로 시작해야 합니다")
    if len(mu) < p + 1:
        raise ValidationError(
            f"모멘트가 부족합니다: {p}차까지 필요하지만 {len(mu) - 1}차까지만 주어짐"
        )
    return mu[: p + 1]


@dataclass(frozen=True)
class MomentMatrix:
    """
    M[j, i] = C(i, j) mu_{i-j} (i >= j) 인 상삼각 행렬.

    계수 a 인 다항식 g 에 대해 E[g(q + Z)] 의 q^j 계수가 (M a)_j 입니다.
    """
    matrix: np.ndarray

    @classmethod
    def from_moments(cls, mu: MomentsLike, p: int) -> "MomentMatrix":
        moments = _moment_array(mu, p)
        m = np.zeros((p + 1, p + 1))
        for i in range(p + 1):
            for j in range(i + 1):
                m[j, i] = math.comb(i, j) * moments[i - j]
        return cls(m)

    @property
    def degree(self) -> int:
        return self.matrix.shape[0] - 1

    @property
    def condition_number(self) -> float:
        return float(np.linalg.cond(self.matrix))


def moment_matrix(mu: MomentsLike, p: int) -> MomentMatrix:
    return MomentMatrix.from_moments(mu, p)


def debias_coeffs(target: Polynomial, mu: MomentsLike) -> Polynomial:
    """
    E[g(q + Z)] = f(q) 를 만족하는 다항식 g 의 계수를 후진 대입으로 구합니다.

    Args:
        target: 목표 다항식 f
        mu: 노이즈 원점 모멘트 (mu_0 = 1) 또는 NoiseModel

    Returns:
        불편 추정 다항식 g (f 와 같은 차수, 끝의 0 계수 제외)

    Raises:
        ValidationError: 차수가 한계를 넘거나 모멘트가 부족한 경우
    """
    target = target.trimmed()
    p = target.degree
    if p > MAX_MOMENT_DEGREE:
        raise ValidationError(f"다항식 차수는 {MAX_MOMENT_DEGREE} 이하여야 합니다: {p}")

    m = MomentMatrix.from_moments(mu, p)
    cond = m.condition_number
    if cond > _CONDITION_WARNING:
        logger.warning(f"모멘트 행렬 조건수가 큽니다: {cond:.3e} (차수 {p})")

    rhs = target.as_array()
    coeffs = solve_triangular(m.matrix, rhs, lower=False, unit_diagonal=True)

    residual = np.max(np.abs(m.matrix @ coeffs - rhs))
    scale = np.max(np.abs(rhs))
    if residual > 1e-10 * max(scale, 1e-300):
        logger.warning(f"후진 대입 잔차가 큽니다: {residual:.3e} (조건수 {cond:.3e})")

    return Polynomial(tuple(coeffs))


def debias_eval(target: Polynomial, mu: MomentsLike, x_tilde: ArrayLike) -> ArrayLike:
    """관측값에서 불편 추정 다항식을 계산합니다."""
    return poly_eval(debias_coeffs(target, mu), x_tilde)


def expected_value_coeffs(g: Polynomial, mu: MomentsLike) -> Polynomial:
    """g 가 불편하게 추정하는 다항식 q -> E[g(q + Z)] 의 계수 (M a)"""
    g = g.trimmed()
    m = MomentMatrix.from_moments(mu, g.degree)
    return Polynomial(tuple(m.matrix @ g.as_array()))


def multivariate_debias(
    targets: Sequence[Polynomial],
    mus: Sequence[MomentsLike],
    x_tildes: Sequence[ArrayLike],
) -> ArrayLike:
    """
    좌표별 독립 노이즈 하에서 곱 형태 f(q) = prod_i f_i(q_i) 의 불편 추정량.

    각 좌표의 불편 추정량을 곱합니다. x_tildes 의 원소가 배열이면 표본별로 계산합니다.
    """
    if not (len(targets) == len(mus) == len(x_tildes)):
        raise ValidationError(
            f"좌표 개수가 일치하지 않습니다: 목표 {len(targets)}, 모멘트 {len(mus)}, 관측 {len(x_tildes)}"
        )
    if not targets:
        raise ValidationError("최소 한 개의 좌표가 필요합니다")

    result = 1.0
    for target, mu, x in zip(targets, mus, x_tildes):
        result = result * np.asarray(debias_eval(target, mu, x))
    return float(result) if np.ndim(result) == 0 else result
