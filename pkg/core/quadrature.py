import logging
import math
import warnings
from typing import Callable

from scipy.integrate import IntegrationWarning, quad

from core.config import QUAD_EPSREL
from core.errors import QuadratureError

logger = logging.getLogger(__name__)

# 오차 추정치가 목표 허용오차의 이 배수를 넘으면 수렴 실패로 판단
_ACCEPT_FACTOR = 1e3


def integrate(
    func: Callable[[float], float],
    lower: float,
    upper: float,
    epsrel: float = QUAD_EPSREL,
    epsabs: float = 1e-13,
) -> tuple[float, float]:
    """
    적응형 구적법으로 적분합니다 (상한은 무한대 가능).

    Args:
        func: 피적분 함수
        lower: 적분 하한
        upper: 적분 상한 (math.inf 가능)
        epsrel: 상대 허용오차
        epsabs: 절대 허용오차

    Returns:
        (적분값, 오차 추정치)

    Raises:
        QuadratureError: 오차 추정치가 허용 범위를 벗어난 경우
    """
    if lower == upper:
        return 0.0, 0.0

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        value, error = quad(func, lower, upper, epsabs=epsabs, epsrel=epsrel, limit=200)

    tolerance = max(epsabs, epsrel * abs(value))
    if not math.isfinite(value) or error > _ACCEPT_FACTOR * tolerance:
        raise QuadratureError(f"적분 수렴 실패: [{lower}, {upper}] 값={value}", error)

    logger.debug(f"적분 [{lower}, {upper}] = {value:.12g} (오차 {error:.2e})")
    return value, error
