import itertools
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from core.errors import ValidationError
from core.function_model import SmoothFunction, builtin
from core.laplace_debias import LaplaceEstimator
from core.noise import NoiseModel, RngStream, sample, sample_many
from models.release import PolicyEntry, PrdpRelease

logger = logging.getLogger(__name__)

# 변환 함수 검사용 격자 (a 기준 오프셋)
_CHECK_OFFSETS = np.concatenate([[0.0], np.geomspace(1e-3, 1e4, 64)])


@dataclass(frozen=True)
class TransformSpec:
    """
    변환 메커니즘 설정: v = f(q + a), v~ = v + Lap(b), S~ = g(v~) - a.

    f 는 [a, inf) 에서 오목하고 순증가해야 하며, g_inverse 는 f 의 역함수에 대한
    라플라스 불편 추정량입니다.
    """
    f: SmoothFunction
    a: float
    b: float
    g_inverse: LaplaceEstimator

    def __post_init__(self):
        if not self.a >= 0:
            raise ValidationError(f"오프셋 a 는 0 이상이어야 합니다: {self.a}")
        if not self.b > 0:
            raise ValidationError(f"라플라스 스케일 b 는 양수여야 합니다: {self.b}")
        if not math.isclose(self.g_inverse.b, self.b):
            raise ValidationError(f"역추정량 스케일 {self.g_inverse.b} 이 b={self.b} 와 다릅니다")

        x = self.a + _CHECK_OFFSETS
        v = np.asarray(self.f.value_at(x))
        if not np.all(np.diff(v) > 0):
            raise ValidationError(f"{self.f.label} 이(가) [a, inf) 에서 순증가하지 않습니다")
        slopes = np.diff(v) / np.diff(x)
        if np.any(np.diff(slopes) > 1e-9 * np.abs(slopes[:-1])):
            raise ValidationError(f"{self.f.label} 이(가) [a, inf) 에서 오목하지 않습니다")
        back = np.asarray(self.g_inverse.f.value_at(v))
        if np.any(np.abs(back - x) > 1e-9 * np.maximum(1.0, np.abs(x))):
            raise ValidationError(f"{self.g_inverse.f.label} 이(가) {self.f.label} 의 역함수가 아닙니다")

    @classmethod
    def kth_root(cls, k: int, a: float, b: float) -> "TransformSpec":
        """f = x^(1/k), g = power(k) 추정량"""
        return cls(builtin("kth_root", [k]), a, b, LaplaceEstimator(builtin("power", [k]), b))

    @classmethod
    def identity(cls, a: float, b: float) -> "TransformSpec":
        return cls(builtin("identity"), a, b, LaplaceEstimator(builtin("identity"), b))


class RatioCheck(NamedTuple):
    max_log_ratio: float
    bound: float
    slack: float
    exact_shift: float


def _check_query(q: float):
    if not q >= 0:
        raise ValidationError(f"질의 값은 0 이상이어야 합니다: {q}")


def transform_release(q: float, spec: TransformSpec, rng: RngStream) -> PrdpRelease:
    """
    합 질의 값 q 를 변환 메커니즘으로 공개합니다. E[S~] = q.

    Args:
        q: 참 질의 값 (0 이상)
        spec: 변환 설정
        rng: 난수 스트림

    Returns:
        PrdpRelease (참값은 포함하지 않음)
    """
    _check_query(q)
    v = spec.f.value_at(q + spec.a)
    v_tilde = v + sample(NoiseModel.laplace(spec.b), rng)
    return PrdpRelease(
        v_tilde=v_tilde,
        S_tilde=spec.g_inverse(v_tilde) - spec.a,
        transform=spec.f.label,
        a=spec.a,
        b=spec.b,
        seed=rng.seed,
        stream_id=rng.stream_id,
    )


def transform_release_many(q: float, spec: TransformSpec, rng: RngStream, runs: int) -> np.ndarray:
    """transform_release 를 runs 번 독립 실행한 S~ 배열"""
    _check_query(q)
    v_tilde = spec.f.value_at(q + spec.a) + sample_many(NoiseModel.laplace(spec.b), rng, runs)
    return spec.g_inverse(v_tilde) - spec.a


def policy(r_c: float, spec: TransformSpec) -> float:
    """기록별 프라이버시 손실 P(r) = [f(r_c + a) - f(a)] / b"""
    if not r_c >= 0:
        raise ValidationError(f"기록 값은 0 이상이어야 합니다: {r_c}")
    return (spec.f.value_at(r_c + spec.a) - spec.f.value_at(spec.a)) / spec.b


def policy_table(spec: TransformSpec, values: Sequence[float]) -> list[PolicyEntry]:
    return [PolicyEntry(c=c, P=policy(c, spec)) for c in values]


def per_record_sensitivity_bruteforce(
    r_c: float,
    spec: TransformSpec,
    value_grid: Sequence[float],
    max_db_size: int,
) -> float:
    """
    크기 max_db_size 이하의 모든 데이터베이스를 열거해 기록 r 의 변환 민감도를 구합니다.

    sup_D |f(q(D) + r_c + a) - f(q(D) + a)| (오목 f 는 빈 데이터베이스에서 최대)
    """
    if any(v < 0 for v in value_grid):
        raise ValidationError("격자 값은 0 이상이어야 합니다")
    best = 0.0
    for size in range(max_db_size + 1):
        for database in itertools.combinations_with_replacement(value_grid, size):
            total = float(sum(database))
            gap = abs(spec.f.value_at(total + r_c + spec.a) - spec.f.value_at(total + spec.a))
            best = max(best, gap)
    return best


def _merge_sparse_bins(c1: np.ndarray, c2: np.ndarray, min_count: int) -> tuple[np.ndarray, np.ndarray]:
    """두 히스토그램 모두 min_count 이상이 되도록 인접 구간을 합칩니다."""
    merged1, merged2 = [], []
    acc1 = acc2 = 0
    for n1, n2 in zip(c1, c2):
        acc1 += n1
        acc2 += n2
        if acc1 >= min_count and acc2 >= min_count:
            merged1.append(acc1)
            merged2.append(acc2)
            acc1 = acc2 = 0
    if acc1 or acc2:
        if merged1:
            merged1[-1] += acc1
            merged2[-1] += acc2
        else:
            merged1.append(acc1)
            merged2.append(acc2)
    return np.array(merged1, dtype=float), np.array(merged2, dtype=float)


def dp_ratio_check(
    q0: float,
    r_c: float,
    spec: TransformSpec,
    n_samples: int,
    bins: int,
    rng: RngStream,
    min_count: int = 100,
) -> RatioCheck:
    """
    이웃 데이터베이스 (q0, q0 + r_c) 에서 v~ 히스토그램의 최대 로그 밀도비를 구합니다.

    통계적 진단이며 증명이 아닙니다. 표본이 부족한 구간은 버리지 않고 이웃 구간과 합칩니다.

    Returns:
        RatioCheck(max_log_ratio, bound=P(r), slack=3 * 구간 표준오차 최댓값, exact_shift)
    """
    _check_query(q0)
    if n_samples < 10**6:
        raise ValidationError(f"표본 수는 10^6 이상이어야 합니다: {n_samples}")
    if bins < 1:
        raise ValidationError(f"구간 수는 1 이상이어야 합니다: {bins}")

    noise = NoiseModel.laplace(spec.b)
    v1 = spec.f.value_at(q0 + spec.a)
    v2 = spec.f.value_at(q0 + r_c + spec.a)
    x1 = v1 + sample_many(noise, rng, n_samples)
    x2 = v2 + sample_many(noise, rng, n_samples)

    lo, hi = np.quantile(np.concatenate([x1, x2]), [0.005, 0.995])
    edges = np.concatenate([[-np.inf], np.linspace(lo, hi, bins + 1), [np.inf]])
    c1, _ = np.histogram(x1, edges)
    c2, _ = np.histogram(x2, edges)
    c1, c2 = _merge_sparse_bins(c1, c2, min_count)

    log_ratio = np.log(c1 / n_samples) - np.log(c2 / n_samples)
    std_err = np.sqrt(1.0 / c1 + 1.0 / c2)
    result = RatioCheck(
        max_log_ratio=float(np.max(np.abs(log_ratio))),
        bound=policy(r_c, spec),
        slack=float(3.0 * np.max(std_err)),
        exact_shift=abs(v2 - v1) / spec.b,
    )
    logger.info(
        f"밀도비 검사 q0={q0}, r_c={r_c}: 최대 로그비 {result.max_log_ratio:.4f}, "
        f"한계 {result.bound:.4f} (+{result.slack:.4f}), 정확한 이동 {result.exact_shift:.4f}"
    )
    return result
