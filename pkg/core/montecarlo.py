import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from joblib import Parallel, delayed

from core.config import MC_TOLERANCE_SE, N_JOBS
from core.errors import ValidationError
from core.noise import RngStream

logger = logging.getLogger(__name__)

# (난수 스트림, 표본 수) -> 표본 배열
Draw = Callable[[RngStream, int], np.ndarray]

_BATCH = 1_000_000


@dataclass(frozen=True)
class McEstimate:
    """몬테카를로 평균과 표준오차"""
    mean: float
    std_err: float
    n_samples: int
    variance: float

    def z_score(self, target: float) -> float:
        if self.std_err == 0:
            return 0.0 if self.mean == target else math.inf
        return (self.mean - target) / self.std_err


def _merge(a: tuple[int, float, float], b: tuple[int, float, float]) -> tuple[int, float, float]:
    """(개수, 평균, 편차제곱합) 병합"""
    n_a, mean_a, m2_a = a
    n_b, mean_b, m2_b = b
    n = n_a + n_b
    if n == 0:
        return 0, 0.0, 0.0
    delta = mean_b - mean_a
    mean = mean_a + delta * n_b / n
    return n, mean, m2_a + m2_b + delta**2 * n_a * n_b / n


def _stream_stats(draw: Draw, seed: int, stream_id: int, n_samples: int) -> tuple[int, float, float]:
    rng = RngStream(seed, stream_id)
    stats = (0, 0.0, 0.0)
    remaining = n_samples
    while remaining > 0:
        batch = min(remaining, _BATCH)
        x = np.asarray(draw(rng, batch), dtype=float)
        if not np.all(np.isfinite(x)):
            raise ValidationError(f"표본에 유한하지 않은 값이 있습니다 (스트림 {stream_id})")
        stats = _merge(stats, (len(x), float(x.mean()), float(((x - x.mean()) ** 2).sum())))
        remaining -= batch
    return stats


def mc_mean(
    draw: Draw,
    n_samples: int,
    seed: int,
    streams: int = 1,
    n_jobs: int = N_JOBS,
    stream_offset: int = 0,
) -> McEstimate:
    """
    독립 난수 스트림으로 표본 평균과 표준오차를 구합니다.

    표본 수를 스트림에 나눠 joblib 으로 실행하고, 스트림 순서대로 합쳐
    같은 (seed, streams) 이면 항상 같은 결과가 나옵니다.

    Args:
        draw: (RngStream, 개수) -> 표본 배열
        n_samples: 전체 표본 수
        seed: 기준 시드
        streams: 스트림 개수
        n_jobs: joblib 워커 수
        stream_offset: 첫 스트림 번호 (여러 검사가 같은 시드를 나눠 쓸 때)

    Returns:
        McEstimate
    """
    if n_samples < 2:
        raise ValidationError(f"표본 수는 2 이상이어야 합니다: {n_samples}")
    if streams < 1:
        raise ValidationError(f"스트림 수는 1 이상이어야 합니다: {streams}")

    shares = [n_samples // streams + (1 if i < n_samples % streams else 0) for i in range(streams)]
    results = Parallel(n_jobs=n_jobs)(
        delayed(_stream_stats)(draw, seed, stream_offset + i, share)
        for i, share in enumerate(shares)
    )

    stats = (0, 0.0, 0.0)
    for partial in results:
        stats = _merge(stats, partial)
    n, mean, m2 = stats
    variance = m2 / (n - 1)
    logger.debug(f"몬테카를로 {n}개 표본 (스트림 {streams}): 평균 {mean:.6g}, 분산 {variance:.6g}")
    return McEstimate(mean=mean, std_err=math.sqrt(variance / n), n_samples=n, variance=variance)


def within_tolerance(estimate: McEstimate, target: float, n_se: float = MC_TOLERANCE_SE) -> bool:
    """|평균 - 목표| <= n_se * 표준오차"""
    return abs(estimate.mean - target) <= n_se * estimate.std_err + 1e-12 * max(1.0, abs(target))


def moment_stability_ratio(draw: Draw, order: float, n_samples: int, seed: int) -> float:
    """
    2N 개 표본의 절대 모멘트와 앞 N 개 표본의 절대 모멘트 비율.

    모멘트가 유한하면 1 근처, 무한하면 표본이 늘수록 커지는 경향이 있습니다.
    """
    x = np.asarray(draw(RngStream(seed), 2 * n_samples), dtype=float)
    first = np.mean(np.abs(x[:n_samples]) ** order)
    full = np.mean(np.abs(x) ** order)
    return float(full / first)
