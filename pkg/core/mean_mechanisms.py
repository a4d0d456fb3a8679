"""
표본 크기와 평균을 함께 공개하는 두 메커니즘.

M_U: n~ = n + Lap(1/eps1), s~ = s + Lap(1/eps2), m~ = s~ * g(n~) (g 는 1/n 의 확장 추정량)
M_SS: n~ 는 같고, m~ = m_SS + T3 * tau * max(e^{-beta(n-1)}, 1/max(n,1))
"""
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed

from core.config import N_JOBS
from core.errors import ValidationError
from core.extension_optimizer import (
    ExtensionProblem,
    ExtensionSolution,
    PriorMeasure,
    estimator_variance,
    g_full,
    solve,
)
from core.function_model import builtin
from core.noise import NoiseModel, RngStream, sample, sample_many
from models.release import MeanRelease, Mechanism

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dataset:
    """레코드 수 n 과 속성 합 s (각 레코드 값은 [0, 1])"""
    n: int
    s: float

    def __post_init__(self):
        if self.n < 0 or int(self.n) != self.n:
            raise ValidationError(f"레코드 수는 0 이상의 정수여야 합니다: {self.n}")
        if not 0 <= self.s <= self.n:
            raise ValidationError(f"합 s 는 0 이상 n 이하여야 합니다: s={self.s}, n={self.n}")


def _check_budget(eps1: float, eps2: float):
    if not (eps1 > 0 and eps2 > 0):
        raise ValidationError(f"프라이버시 예산은 양수여야 합니다: eps1={eps1}, eps2={eps2}")


@dataclass(frozen=True)
class MuParams:
    eps1: float
    eps2: float
    k: int
    L: float
    extension: ExtensionSolution

    def __post_init__(self):
        _check_budget(self.eps1, self.eps2)
        problem = self.extension.problem
        if problem.f.name != "inverse" or self.extension.reflected:
            raise ValidationError(f"M_U 의 확장은 1/n 에 대한 것이어야 합니다: {problem.f.label}")
        if not math.isclose(problem.b, 1.0 / self.eps1, rel_tol=1e-12):
            raise ValidationError(f"확장 스케일 b={problem.b} 이 1/eps1={1.0 / self.eps1} 과 다릅니다")
        if problem.L != self.L or problem.k != self.k:
            raise ValidationError(
                f"확장 문제 (L={problem.L}, k={problem.k}) 가 파라미터 (L={self.L}, k={self.k}) 와 다릅니다"
            )

    @classmethod
    def build(
        cls,
        eps1: float,
        eps2: float,
        k: int = 10,
        L: float = 1.0,
        prior: PriorMeasure | None = None,
    ) -> "MuParams":
        """
        1/n 확장을 풀어 파라미터를 만듭니다.

        최적 확장은 사전분포와 무관하므로 기본값은 L 의 한 점 분포입니다.
        """
        _check_budget(eps1, eps2)
        if not L > 0:
            raise ValidationError(f"1/n 확장의 하한 L 은 양수여야 합니다: {L}")
        problem = ExtensionProblem(
            f=builtin("inverse"),
            L=L,
            k=k,
            b=1.0 / eps1,
            prior=prior or PriorMeasure.discrete([(L, 1.0)]),
        )
        return cls(eps1=eps1, eps2=eps2, k=k, L=L, extension=solve(problem))


@dataclass(frozen=True)
class MssParams:
    eps1: float
    eps2: float
    beta: float
    tau: float

    def __post_init__(self):
        _check_budget(self.eps1, self.eps2)
        if not (self.beta > 0 and self.tau > 0):
            raise ValidationError(f"beta, tau 는 양수여야 합니다: beta={self.beta}, tau={self.tau}")
        implied = 4.0 * self.beta + 2.0 / (math.sqrt(3.0) * self.tau)
        if not math.isclose(implied, self.eps2, rel_tol=1e-12):
            raise ValidationError(
                f"eps2={self.eps2} 가 4 beta + 2/(sqrt(3) tau) = {implied} 와 일치하지 않습니다"
            )

    @classmethod
    def from_budget(cls, eps1: float, eps2: float) -> "MssParams":
        """beta = eps2 / 12, tau = sqrt(3) / eps2"""
        _check_budget(eps1, eps2)
        return cls(eps1=eps1, eps2=eps2, beta=eps2 / 12.0, tau=math.sqrt(3.0) / eps2)


@dataclass(frozen=True)
class SweepRow:
    n: int
    sd_mu: float
    sd_mss: float

    @property
    def ratio(self) -> float:
        return self.sd_mss / self.sd_mu if self.sd_mu > 0 else math.inf


def run_mu(d: Dataset, p: MuParams, rng: RngStream) -> MeanRelease:
    """
    M_U 로 (n~, m~_U) 를 공개합니다. n >= L 이면 m~_U 는 s/n 의 불편 추정량입니다.

    난수는 n~ 노이즈, s~ 노이즈 순서로 소비합니다.
    """
    n_tilde = d.n + sample(NoiseModel.laplace(1.0 / p.eps1), rng)
    s_tilde = d.s + sample(NoiseModel.laplace(1.0 / p.eps2), rng)
    v_tilde = g_full(p.extension, n_tilde)
    return MeanRelease(
        n_tilde=n_tilde,
        m_tilde=s_tilde * v_tilde,
        mechanism=Mechanism.M_U,
        seed=rng.seed,
        stream_id=rng.stream_id,
        eps1=p.eps1,
        eps2=p.eps2,
    )


def run_mu_many(d: Dataset, p: MuParams, rng: RngStream, runs: int) -> tuple[np.ndarray, np.ndarray]:
    """M_U 를 runs 번 독립 실행한 (n~, m~) 배열"""
    n_tilde = d.n + sample_many(NoiseModel.laplace(1.0 / p.eps1), rng, runs)
    s_tilde = d.s + sample_many(NoiseModel.laplace(1.0 / p.eps2), rng, runs)
    return n_tilde, s_tilde * g_full(p.extension, n_tilde)


def mu_variance(d: Dataset, p: MuParams) -> float:
    """
    V[m~_U] = (s^2 + V[s~]) (1/n^2 + V[g(n~)]) - s^2/n^2.

    s~ 와 n~ 이 독립이라 곱의 분산 공식이 성립합니다. V[s~] = 2/eps2^2.

    Raises:
        ValidationError: n < L
    """
    if d.n < p.L:
        raise ValidationError(f"n={d.n} 이 하한 L={p.L} 보다 작습니다")
    var_g = estimator_variance(p.extension, float(d.n))
    second_s = d.s**2 + 2.0 / p.eps2**2
    variance = second_s * (1.0 / d.n**2 + var_g) - d.s**2 / d.n**2
    return max(variance, 0.0)


def mss_noise_multiplier(n: int, beta: float) -> float:
    """max(e^{-beta(n-1)}, 1/max(n, 1))"""
    return max(math.exp(-beta * (n - 1)), 1.0 / max(n, 1))


def _mss_center(d: Dataset) -> float:
    return d.s / d.n if d.n >= 1 else 1.0


def run_mss(d: Dataset, p: MssParams, rng: RngStream) -> MeanRelease:
    """M_SS 로 (n~, m~_SS) 를 공개합니다. n >= 1 이면 m~_SS 는 s/n 의 불편 추정량입니다."""
    n_tilde = d.n + sample(NoiseModel.laplace(1.0 / p.eps1), rng)
    scale = p.tau * mss_noise_multiplier(d.n, p.beta)
    m_tilde = _mss_center(d) + scale * sample(NoiseModel.student_t3(), rng)
    return MeanRelease(
        n_tilde=n_tilde,
        m_tilde=m_tilde,
        mechanism=Mechanism.M_SS,
        seed=rng.seed,
        stream_id=rng.stream_id,
        eps1=p.eps1,
        eps2=p.eps2,
    )


def run_mss_many(d: Dataset, p: MssParams, rng: RngStream, runs: int) -> tuple[np.ndarray, np.ndarray]:
    n_tilde = d.n + sample_many(NoiseModel.laplace(1.0 / p.eps1), rng, runs)
    scale = p.tau * mss_noise_multiplier(d.n, p.beta)
    return n_tilde, _mss_center(d) + scale * sample_many(NoiseModel.student_t3(), rng, runs)


def mss_variance(d: Dataset, p: MssParams) -> float:
    """V[m~_SS] = 3 tau^2 max(e^{-beta(n-1)}, 1/max(n,1))^2 (t3 분산 3)"""
    return 3.0 * p.tau**2 * mss_noise_multiplier(d.n, p.beta) ** 2


def _sweep_row(n: int, m_fixed: float, mu: MuParams, mss: MssParams) -> SweepRow:
    d = Dataset(n=n, s=m_fixed * n)
    return SweepRow(n=n, sd_mu=math.sqrt(mu_variance(d, mu)), sd_mss=math.sqrt(mss_variance(d, mss)))


def sd_sweep(
    n_grid: Sequence[int],
    m_fixed: float,
    mu: MuParams,
    mss: MssParams,
    n_jobs: int = N_JOBS,
) -> list[SweepRow]:
    """
    n 격자에서 두 메커니즘의 해석적 표준편차를 비교합니다.

    Args:
        n_grid: 레코드 수 격자 (각각 L 이상)
        m_fixed: 고정 평균 (s = m_fixed * n)
        mu: M_U 파라미터
        mss: M_SS 파라미터
        n_jobs: joblib 워커 수

    Returns:
        격자 순서의 SweepRow 목록
    """
    if not 0 <= m_fixed <= 1:
        raise ValidationError(f"평균은 [0, 1] 안에 있어야 합니다: {m_fixed}")
    if not n_grid:
        raise ValidationError("n 격자가 비어 있습니다")

    logger.info(f"표준편차 비교: n {min(n_grid)}~{max(n_grid)} ({len(n_grid)}개), k={mu.k}, L={mu.L}")
    return Parallel(n_jobs=n_jobs)(delayed(_sweep_row)(int(n), m_fixed, mu, mss) for n in n_grid)


def crossover(rows: Sequence[SweepRow]) -> int | None:
    """sd_mss > sd_mu 가 되는 가장 작은 n"""
    for row in sorted(rows, key=lambda r: r.n):
        if row.sd_mss > row.sd_mu:
            return row.n
    return None
