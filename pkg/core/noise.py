import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from core.errors import ValidationError


class NoiseKind(str, Enum):
    """노이즈 분포 종류"""
    LAPLACE = "laplace"
    STUDENT_T3 = "student_t3"
    GAUSSIAN = "gaussian"
    MOMENTS_ONLY = "moments_only"


class RngStream:
    """
    시드와 스트림 번호로 결정되는 독립 난수 스트림.

    같은 (seed, stream_id) 는 항상 같은 수열을 만들고, 서로 다른 stream_id 는
    SeedSequence 의 spawn_key 로 분리되어 독립입니다. 한 스트림은 한 소유자만 사용합니다.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if not 0 <= int(seed) < 2**64:
            raise ValidationError(f"시드는 0 이상 2^64 미만의 정수여야 합니다: {seed}")
        if int(stream_id) < 0:
            raise ValidationError(f"stream_id 는 0 이상이어야 합니다: {stream_id}")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def uniform(self, size: int | None = None) -> float | np.ndarray:
        """[0, 1) 균등 난수"""
        return self.generator.random(size)

    def __repr__(self):
        return f"<RngStream(seed={self.seed}, stream_id={self.stream_id})>"


@dataclass(frozen=True)
class NoiseModel:
    """
    덧셈 노이즈 모델.

    Attributes:
        kind: 분포 종류
        scale: 라플라스 b, t3 배율, 가우시안 sigma
        moments: moments_only 인 경우 원점 모멘트 (mu_0 = 1)
        sampler: moments_only 에 선택적으로 붙이는 표본 추출기 (generator, size) -> 배열
    """
    kind: NoiseKind
    scale: float = 1.0
    moments: tuple[float, ...] | None = None
    sampler: Callable[[np.random.Generator, int | None], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind != NoiseKind.MOMENTS_ONLY and not self.scale > 0:
            raise ValidationError(f"노이즈 스케일은 양수여야 합니다: {self.scale}")
        if self.kind == NoiseKind.MOMENTS_ONLY:
            if not self.moments or abs(self.moments[0] - 1.0) > 1e-12:
                raise ValidationError("모멘트 벡터는 mu_0 = 1 로 시작해야 합니다")

    @classmethod
    def laplace(cls, b: float) -> "NoiseModel":
        return cls(NoiseKind.LAPLACE, float(b))

    @classmethod
    def student_t3(cls, scale: float = 1.0) -> "NoiseModel":
        return cls(NoiseKind.STUDENT_T3, float(scale))

    @classmethod
    def gaussian(cls, sigma: float) -> "NoiseModel":
        return cls(NoiseKind.GAUSSIAN, float(sigma))

    @classmethod
    def moments_only(cls, moments: Sequence[float], sampler=None) -> "NoiseModel":
        return cls(NoiseKind.MOMENTS_ONLY, 1.0, tuple(float(m) for m in moments), sampler)

    def moment_vector(self, p: int) -> np.ndarray:
        """
        0 ~ p 차 원점 모멘트를 반환합니다.

        Raises:
            ValidationError: 모멘트가 정의되지 않거나 (t3 의 3차 이상) 부족한 경우
        """
        if self.kind == NoiseKind.LAPLACE:
            return laplace_moments(self.scale, p)
        if self.kind == NoiseKind.GAUSSIAN:
            return gaussian_moments(self.scale, p)
        if self.kind == NoiseKind.STUDENT_T3:
            # 자유도 3: 분산 3, 3차 이상 모멘트는 존재하지 않음
            if p > 2:
                raise ValidationError("t3 분포는 3차 이상의 모멘트가 없습니다")
            return np.array([1.0, 0.0, 3.0 * self.scale**2])[: p + 1]
        if len(self.moments) < p + 1:
            raise ValidationError(
                f"모멘트가 부족합니다: {p}차까지 필요하지만 {len(self.moments) - 1}차까지만 주어짐"
            )
        return np.array(self.moments[: p + 1], dtype=float)

    @property
    def variance(self) -> float:
        m = self.moment_vector(2)
        return float(m[2] - m[1] ** 2)


def sample_many(model: NoiseModel, rng: RngStream, size: int | None) -> float | np.ndarray:
    """
    노이즈 표본을 추출합니다.

    Args:
        model: 노이즈 모델
        rng: 난수 스트림 (상태가 전진함)
        size: 표본 개수. None 이면 스칼라

    Returns:
        표본 (float 또는 배열)
    """
    gen = rng.generator
    if model.kind == NoiseKind.LAPLACE:
        # 역누적분포: u ~ U(-1/2, 1/2), x = -b sign(u) ln(1 - 2|u|)
        u = gen.random(size) - 0.5
        tail = np.maximum(1.0 - 2.0 * np.abs(u), np.finfo(float).tiny)
        out = -model.scale * np.sign(u) * np.log(tail)
    elif model.kind == NoiseKind.STUDENT_T3:
        # 표준정규 / sqrt(카이제곱(3) / 3)
        z = gen.standard_normal(size)
        chi = gen.chisquare(3, size)
        out = model.scale * z / np.sqrt(chi / 3.0)
    elif model.kind == NoiseKind.GAUSSIAN:
        out = model.scale * gen.standard_normal(size)
    else:
        if model.sampler is None:
            raise ValidationError("moments_only 노이즈에는 표본 추출기가 없습니다")
        out = model.sampler(gen, size)

    if size is None:
        return float(out)
    return np.asarray(out, dtype=float)


def sample(model: NoiseModel, rng: RngStream) -> float:
    """노이즈 표본 하나를 추출합니다."""
    return sample_many(model, rng, None)


def laplace_moments(b: float, p: int) -> np.ndarray:
    """Laplace(b) 원점 모멘트: 짝수 r 에서 r! b^r, 홀수는 0"""
    if not b > 0:
        raise ValidationError(f"라플라스 스케일은 양수여야 합니다: {b}")
    return np.array(
        [math.factorial(r) * b**r if r % 2 == 0 else 0.0 for r in range(p + 1)],
        dtype=float,
    )


def gaussian_moments(sigma: float, p: int) -> np.ndarray:
    """N(0, sigma^2) 원점 모멘트: 짝수 r 에서 (r-1)!! sigma^r"""
    if not sigma > 0:
        raise ValidationError(f"가우시안 표준편차는 양수여야 합니다: {sigma}")
    moments = []
    for r in range(p + 1):
        if r % 2:
            moments.append(0.0)
        else:
            moments.append(float(math.prod(range(r - 1, 0, -2))) * sigma**r)
    return np.array(moments, dtype=float)


def empirical_moments(samples: np.ndarray, p: int) -> np.ndarray:
    """표본 원점 모멘트 (0 ~ p 차)"""
    samples = np.asarray(samples, dtype=float)
    return np.array([np.mean(samples**r) for r in range(p + 1)])
