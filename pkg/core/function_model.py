import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from core.errors import ValidationError

ArrayLike = float | np.ndarray


def _evaluate(fn: Callable[[np.ndarray], np.ndarray], x: ArrayLike) -> ArrayLike:
    """스칼라 입력이면 float, 배열 입력이면 배열을 반환합니다."""
    arr = np.asarray(x, dtype=float)
    out = np.asarray(fn(arr), dtype=float)
    if arr.ndim == 0:
        return float(out)
    return np.broadcast_to(out, arr.shape).copy()


@dataclass(frozen=True)
class SmoothFunction:
    """
    값과 1, 2계 도함수를 함께 제공하는 실수 함수.

    value / d1 / d2 는 numpy 배열을 받아 원소별로 계산하는 호출 가능 객체입니다.

    Attributes:
        name: 카탈로그 이름 (예: "power")
        params: 생성 파라미터
        domain_lower: 정의역 하한. None 이면 호출자가 하한을 지정해야 함
        polynomial_growth: 실수 전체에서 다항식 이하로 증가하는지 여부
        twice_differentiable: 실수 전체에서 두 번 미분 가능한지 여부
    """
    name: str
    value: Callable[[np.ndarray], np.ndarray]
    d1: Callable[[np.ndarray], np.ndarray]
    d2: Callable[[np.ndarray], np.ndarray]
    params: tuple[float, ...] = ()
    domain_lower: float | None = -math.inf
    polynomial_growth: bool = True
    twice_differentiable: bool = True

    def value_at(self, x: ArrayLike) -> ArrayLike:
        return _evaluate(self.value, x)

    def d1_at(self, x: ArrayLike) -> ArrayLike:
        return _evaluate(self.d1, x)

    def d2_at(self, x: ArrayLike) -> ArrayLike:
        return _evaluate(self.d2, x)

    @property
    def label(self) -> str:
        """CLI 표기 형식 (예: "power:3")"""
        if not self.params:
            return self.name
        return self.name + ":" + ",".join(f"{p:g}" for p in self.params)


def _power(k: float) -> SmoothFunction:
    if k < 0 or int(k) != k:
        raise ValidationError(f"power 의 차수는 0 이상의 정수여야 합니다: {k}")
    k = int(k)

    def d1(x):
        return k * np.power(x, k - 1) if k >= 1 else np.zeros_like(x)

    def d2(x):
        return k * (k - 1) * np.power(x, k - 2) if k >= 2 else np.zeros_like(x)

    return SmoothFunction("power", lambda x: np.power(x, k), d1, d2, params=(float(k),))


def _inverse() -> SmoothFunction:
    # 0에서 발산하므로 하한 L > 0 은 호출자가 지정
    return SmoothFunction(
        "inverse",
        lambda x: 1.0 / x,
        lambda x: -1.0 / x**2,
        lambda x: 2.0 / x**3,
        domain_lower=None,
        polynomial_growth=False,
    )


def _kth_root(k: float) -> SmoothFunction:
    if k < 1 or int(k) != k:
        raise ValidationError(f"kth_root 의 k 는 1 이상의 정수여야 합니다: {k}")
    k = int(k)
    r = 1.0 / k
    return SmoothFunction(
        "kth_root",
        lambda x: np.power(x, r),
        lambda x: r * np.power(x, r - 1.0),
        lambda x: r * (r - 1.0) * np.power(x, r - 2.0),
        params=(float(k),),
        domain_lower=0.0,
        twice_differentiable=(k == 1),
    )


def _abs() -> SmoothFunction:
    # 0에서 미분 불가능 (2계 도함수는 거의 모든 점에서 0)
    return SmoothFunction(
        "abs",
        np.abs,
        np.sign,
        np.zeros_like,
        twice_differentiable=False,
    )


def _cos(u: float) -> SmoothFunction:
    return SmoothFunction(
        "cos",
        lambda x: np.cos(u * x),
        lambda x: -u * np.sin(u * x),
        lambda x: -u * u * np.cos(u * x),
        params=(float(u),),
    )


def _sin(u: float) -> SmoothFunction:
    return SmoothFunction(
        "sin",
        lambda x: np.sin(u * x),
        lambda x: u * np.cos(u * x),
        lambda x: -u * u * np.sin(u * x),
        params=(float(u),),
    )


def _identity(c: float = 1.0) -> SmoothFunction:
    return SmoothFunction(
        "identity",
        lambda x: c * x,
        lambda x: np.full_like(x, c),
        np.zeros_like,
        params=(float(c),) if c != 1.0 else (),
    )


def _poly(*coeffs: float) -> SmoothFunction:
    if not coeffs:
        raise ValidationError("poly 에는 최소 한 개의 계수가 필요합니다")
    return Polynomial(tuple(coeffs)).to_function()


# 카탈로그: 이름 -> (생성자, 허용 파라미터 개수)
_CATALOGUE: dict[str, tuple[Callable[..., SmoothFunction], tuple[int, ...]]] = {
    "power": (_power, (1,)),
    "inverse": (_inverse, (0,)),
    "kth_root": (_kth_root, (1,)),
    "abs": (_abs, (0,)),
    "cos": (_cos, (1,)),
    "sin": (_sin, (1,)),
    "identity": (_identity, (0, 1)),
}


def builtin(name: str, params: Sequence[float] = ()) -> SmoothFunction:
    """
    카탈로그에서 함수를 생성합니다.

    Args:
        name: 함수 이름 (power, inverse, kth_root, abs, cos, sin, identity, poly)
        params: 함수 파라미터 (예: power 의 차수)

    Returns:
        SmoothFunction

    Raises:
        ValidationError: 알 수 없는 이름이거나 파라미터가 올바르지 않은 경우
    """
    params = tuple(float(p) for p in params)
    if name == "poly":
        return _poly(*params)
    if name not in _CATALOGUE:
        known = ", ".join(sorted([*_CATALOGUE, "poly"]))
        raise ValidationError(f"알 수 없는 함수 이름입니다: {name} (사용 가능: {known})")

    constructor, arities = _CATALOGUE[name]
    if len(params) not in arities:
        raise ValidationError(
            f"{name} 의 파라미터 개수가 올바르지 않습니다: {len(params)}개 (허용: {arities})"
        )
    return constructor(*params)


def reflect(f: SmoothFunction) -> SmoothFunction:
    """x -> f(-x). 상한만 주어진 문제를 하한 문제로 바꿀 때 사용합니다."""
    return SmoothFunction(
        f"reflect({f.name})",
        lambda x: f.value(-x),
        lambda x: -f.d1(-x),
        lambda x: f.d2(-x),
        params=f.params,
        domain_lower=-math.inf if f.domain_lower == -math.inf else None,
        polynomial_growth=f.polynomial_growth,
        twice_differentiable=f.twice_differentiable,
    )


@dataclass(frozen=True)
class Polynomial:
    """
    계수 리스트 다항식. coeffs[i] 는 x^i 의 계수입니다.
    """
    coeffs: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs if coeffs else (0.0,))

    @property
    def degree(self) -> int:
        """0 이 아닌 최고차 계수의 차수. 영다항식은 0"""
        nonzero = np.flatnonzero(self.as_array())
        return int(nonzero[-1]) if nonzero.size else 0

    def trimmed(self) -> "Polynomial":
        """끝의 0 계수를 뺀 다항식"""
        return Polynomial(self.coeffs[: self.degree + 1])

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return poly_eval(self, x)

    def as_array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=float)

    def derivative(self, order: int = 1) -> "Polynomial":
        return poly_derivative(self, order)

    def to_function(self) -> SmoothFunction:
        d1 = poly_derivative(self, 1)
        d2 = poly_derivative(self, 2)
        return SmoothFunction(
            "poly",
            lambda x: poly_eval(self, x),
            lambda x: poly_eval(d1, x),
            lambda x: poly_eval(d2, x),
            params=self.coeffs,
        )


def poly_eval(p: Polynomial, x: ArrayLike) -> ArrayLike:
    arr = np.asarray(x, dtype=float)
    values = npoly.polyval(arr, p.as_array())
    return float(values) if arr.ndim == 0 else np.asarray(values, dtype=float)


def poly_derivative(p: Polynomial, order: int = 1) -> Polynomial:
    """
    계수 이동으로 정확한 도함수를 구합니다.

    Args:
        p: 다항식
        order: 미분 횟수 (0 이상)

    Returns:
        도함수 다항식. 상수의 도함수는 [0]
    """
    if order < 0:
        raise ValidationError(f"미분 차수는 0 이상이어야 합니다: {order}")

    if order >= len(p.coeffs):
        return Polynomial((0.0,))
    return Polynomial(tuple(npoly.polyder(p.as_array(), m=order)))
