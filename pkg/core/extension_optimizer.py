"""
하한이 있는 함수의 다항식 확장과 라플라스 불편 추정량.

f 가 [L, inf) 에서만 주어지면 (-inf, L) 쪽을 차수 k 다항식 h 로 이어 붙이고
(h(L), h'(L), h''(L) 이 f 와 일치), 왼쪽 추정량 g = h - b^2 h'' 의
사전분포 mu 에 대한 기대 제곱오차를 최소화합니다.

내부 계산은 이동 좌표 t = (L - x) / b >= 0 에서 합니다. 이 좌표에서 G = H - H'' 이고
목적함수의 가중치가 e^{-t} 가 되므로 G 를 정규직교 라게르 기저로 표현하면
다항식 쪽 적분이 모두 정확해지고 조건수도 작아집니다.
"""
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

import numpy as np
from numpy.polynomial import laguerre
from numpy.polynomial import polynomial as P
from scipy.linalg import LinAlgError, cho_factor, cho_solve, lstsq, solve_triangular

from core.config import MAX_EXTENSION_DEGREE
from core.errors import ValidationError
from core.function_model import ArrayLike, Polynomial, SmoothFunction, poly_derivative, reflect
from core.quadrature import integrate

logger = logging.getLogger(__name__)


class PriorKind(str, Enum):
    DISCRETE = "discrete"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class PriorMeasure:
    """
    목적함수에서 q 에 대한 가중 사전분포.

    Attributes:
        kind: discrete 또는 uniform
        atoms: discrete 인 경우 (q, 가중치) 목록 (합이 1 로 정규화됨)
        lo, hi: uniform 인 경우 구간
    """
    kind: PriorKind
    atoms: tuple[tuple[float, float], ...] = ()
    lo: float | None = None
    hi: float | None = None

    @classmethod
    def discrete(cls, points: Sequence[tuple[float, float]]) -> "PriorMeasure":
        if not points:
            raise ValidationError("이산 사전분포에는 최소 한 개의 점이 필요합니다")
        for q, w in points:
            if not (math.isfinite(q) and w > 0):
                raise ValidationError(f"사전분포 점은 유한하고 가중치는 양수여야 합니다: ({q}, {w})")
        total = sum(w for _, w in points)
        return cls(PriorKind.DISCRETE, tuple((float(q), float(w) / total) for q, w in points))

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "PriorMeasure":
        if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
            raise ValidationError(f"균등 사전분포 구간이 올바르지 않습니다: [{lo}, {hi}]")
        return cls(PriorKind.UNIFORM, lo=float(lo), hi=float(hi))

    @property
    def support_min(self) -> float:
        if self.kind == PriorKind.DISCRETE:
            return min(q for q, _ in self.atoms)
        return self.lo

    def reflected(self) -> "PriorMeasure":
        """q -> -q"""
        if self.kind == PriorKind.DISCRETE:
            return PriorMeasure(PriorKind.DISCRETE, tuple((-q, w) for q, w in self.atoms))
        return PriorMeasure.uniform(-self.hi, -self.lo)

    def exp_weighted_moments(self, f: SmoothFunction, L: float, b: float) -> tuple[float, float, float]:
        """
        W_j = E_mu[f(q)^j e^{(L-q)/b}], j = 0, 1, 2.

        이산 분포는 정확한 합, 균등 분포는 W_0 닫힌 형태와 W_1, W_2 적응형 구적법.
        """
        if self.kind == PriorKind.DISCRETE:
            w = np.array([wt for _, wt in self.atoms])
            q = np.array([q for q, _ in self.atoms])
            decay = w * np.exp((L - q) / b)
            fq = np.asarray(f.value_at(q), dtype=float)
            return float(decay.sum()), float((decay * fq).sum()), float((decay * fq**2).sum())

        width = self.hi - self.lo
        w0 = b / width * (math.exp((L - self.lo) / b) - math.exp((L - self.hi) / b))
        w1, _ = integrate(lambda q: f.value_at(q) * math.exp((L - q) / b) / width, self.lo, self.hi)
        w2, _ = integrate(lambda q: f.value_at(q) ** 2 * math.exp((L - q) / b) / width, self.lo, self.hi)
        return w0, w1, w2


@dataclass(frozen=True)
class ExtensionProblem:
    f: SmoothFunction
    L: float
    k: int
    b: float
    prior: PriorMeasure

    def __post_init__(self):
        if not self.b > 0:
            raise ValidationError(f"라플라스 스케일 b 는 양수여야 합니다: {self.b}")
        if int(self.k) != self.k or self.k < 2:
            raise ValidationError(f"확장 차수 k 는 2 이상의 정수여야 합니다 (제약 3개): {self.k}")
        if self.k > MAX_EXTENSION_DEGREE:
            raise ValidationError(f"확장 차수 k 는 {MAX_EXTENSION_DEGREE} 이하여야 합니다: {self.k}")
        if not math.isfinite(self.L):
            raise ValidationError(f"하한 L 은 유한해야 합니다: {self.L}")
        lower = self.f.domain_lower
        if lower is not None and self.L < lower:
            raise ValidationError(f"하한 L={self.L} 이 {self.f.label} 의 정의역 하한 {lower} 보다 작습니다")
        targets = self.pasting_targets()
        if not all(math.isfinite(v) for v in targets):
            raise ValidationError(f"{self.f.label} 이(가) L={self.L} 에서 두 번 미분 가능하지 않습니다")
        if self.prior.support_min < self.L:
            raise ValidationError(
                f"사전분포의 지지집합이 L={self.L} 아래로 내려갑니다: {self.prior.support_min}"
            )

    def pasting_targets(self) -> tuple[float, float, float]:
        """(f(L), f'(L), f''(L))"""
        return self.f.value_at(self.L), self.f.d1_at(self.L), self.f.d2_at(self.L)


@dataclass(frozen=True)
class ReducedQP:
    """
    자유 라게르 계수 y = c_3..c_k 에 대한 목적함수 1/2 y^T Q y + c^T y + const.

    고정 계수는 affine map c_{0..2} = offset + T y 로 결정됩니다.
    """
    Q: np.ndarray
    c: np.ndarray
    const_term: float
    offset: np.ndarray
    T: np.ndarray

    @property
    def n_free(self) -> int:
        return self.Q.shape[0]

    def objective(self, y: np.ndarray) -> float:
        y = np.asarray(y, dtype=float)
        return float(0.5 * y @ self.Q @ y + self.c @ y + self.const_term)

    def gradient(self, y: np.ndarray) -> np.ndarray:
        return self.Q @ np.asarray(y, dtype=float) + self.c

    def full_coefficients(self, y: np.ndarray) -> np.ndarray:
        """라게르 계수 c_0..c_k"""
        y = np.asarray(y, dtype=float)
        return np.concatenate([self.offset + self.T @ y, y])


@dataclass(frozen=True)
class ExtensionSolution:
    """
    최적 확장 결과.

    g, h 는 원래 x 좌표의 계수 (reflected 이면 x -> -x 좌표), laguerre 는 이동 좌표
    t = (L - x) / b 에서 g 의 라게르 계수입니다.
    """
    g: Polynomial
    h: Polynomial
    objective: float
    grad_norm: float
    problem: ExtensionProblem
    laguerre: tuple[float, ...]
    taylor_objective: float
    condition_number: float
    singular: bool = False
    reflected: bool = False

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return g_full(self, x)

    def constraint_residuals(self) -> tuple[float, float, float]:
        """h 와 f 의 L 에서의 값, 1계, 2계 도함수 차이"""
        L = self.problem.L
        h1 = poly_derivative(self.h, 1)
        h2 = poly_derivative(self.h, 2)
        f_l, d1_l, d2_l = self.problem.pasting_targets()
        return self.h(L) - f_l, h1(L) - d1_l, h2(L) - d2_l


def tail_moment(m: int, L: float, b: float) -> float:
    """
    int_{-inf}^{L} x^m e^{(x-L)/b} dx 를 부분적분 점화식으로 계산합니다.

    M_0 = b, M_m = b L^m - m b M_{m-1}
    """
    if m < 0 or int(m) != m:
        raise ValidationError(f"모멘트 차수는 0 이상의 정수여야 합니다: {m}")
    if not b > 0:
        raise ValidationError(f"라플라스 스케일 b 는 양수여야 합니다: {b}")
    value = b
    for i in range(1, int(m) + 1):
        value = b * L**i - i * b * value
    return value


def _h_from_g_shifted(g_t: np.ndarray) -> np.ndarray:
    """이동 좌표에서 G = H - H'' 의 역: H = sum_m D^{2m} G"""
    h_t = np.array(g_t, dtype=float)
    term = np.array(g_t, dtype=float)
    while len(term) > 2:
        term = P.polyder(term, 2)
        h_t[: len(term)] += term
    return h_t


def _pasting_matrix(k: int) -> np.ndarray:
    """라게르 기저 j 에 대한 (H(0), H'(0), H''(0)) 열들"""
    rows = np.zeros((3, k + 1))
    for j in range(k + 1):
        basis = np.zeros(j + 1)
        basis[j] = 1.0
        h_t = np.pad(_h_from_g_shifted(laguerre.lag2poly(basis)), (0, 3))
        rows[:, j] = h_t[0], h_t[1], 2.0 * h_t[2]
    return rows


def build_reduced_qp(problem: ExtensionProblem) -> ReducedQP:
    """
    제약을 소거한 (k - 2) 변수 이차 목적함수를 만듭니다.

    목적함수는 1/2 [W0 ||c||^2 - 2 W1 c_0 + W2] 이고, 제약 세 개로 c_0..c_2 를
    c_3..c_k 의 아핀 함수로 표현합니다. k = 2 이면 자유 변수가 없습니다.
    """
    f_l, d1_l, d2_l = problem.pasting_targets()
    b = problem.b
    w0, w1, w2 = problem.prior.exp_weighted_moments(problem.f, problem.L, b)

    # t 좌표 도함수: dH/dt = -b h'(x), d2H/dt2 = b^2 h''(x)
    targets = np.array([f_l, -b * d1_l, b**2 * d2_l])
    a = _pasting_matrix(problem.k)
    a_fixed, a_free = a[:, :3], a[:, 3:]

    n_free = problem.k - 2
    offset = solve_triangular(a_fixed, targets, lower=False)
    T = -solve_triangular(a_fixed, a_free, lower=False) if n_free else np.zeros((3, 0))

    Q = w0 * (T.T @ T + np.eye(n_free))
    c = w0 * (T.T @ offset) - w1 * T[0, :]
    const_term = 0.5 * (w0 * offset @ offset - 2.0 * w1 * offset[0] + w2)
    return ReducedQP(Q=Q, c=c, const_term=float(const_term), offset=offset, T=T)


def _raw_polynomials(coeffs: np.ndarray, L: float, b: float) -> tuple[Polynomial, Polynomial]:
    """라게르 계수에서 원래 x 좌표의 (g, h) 를 구합니다."""
    k = len(coeffs) - 1
    h_t = _h_from_g_shifted(laguerre.lag2poly(coeffs))
    shift = P.Polynomial([L / b, -1.0 / b])
    h_raw = np.zeros(k + 1)
    composed = P.Polynomial(h_t)(shift).coef[: k + 1]
    h_raw[: len(composed)] = composed
    h = Polynomial(tuple(h_raw))
    return g_from_h(h, b), h


def solve(problem: ExtensionProblem) -> ExtensionSolution:
    """
    테일러 확장 (자유 변수 0) 에서 출발해 뉴턴 한 단계로 최적해를 구합니다.

    Args:
        problem: 확장 문제

    Returns:
        ExtensionSolution

    Notes:
        Q 가 수치적으로 특이하면 최소 노름 해로 대체하고 singular 를 표시합니다.
    """
    qp = build_reduced_qp(problem)
    y0 = np.zeros(qp.n_free)
    taylor_objective = qp.objective(y0)
    singular = False
    cond = 1.0

    if qp.n_free:
        cond = float(np.linalg.cond(qp.Q))
        grad0 = qp.gradient(y0)
        try:
            step = cho_solve(cho_factor(qp.Q), grad0)
        except LinAlgError:
            logger.warning(f"축소 이차계획 행렬이 특이합니다 (조건수 {cond:.3e}): 최소 노름 해 사용")
            step = lstsq(qp.Q, grad0)[0]
            singular = True
        y = y0 - step
    else:
        y = y0

    coeffs = qp.full_coefficients(y)
    g, h = _raw_polynomials(coeffs, problem.L, problem.b)
    objective = qp.objective(y)
    grad_norm = float(np.linalg.norm(qp.gradient(y))) if qp.n_free else 0.0

    logger.debug(
        f"확장 최적화 k={problem.k}: 목적함수 {objective:.6g} (테일러 {taylor_objective:.6g}), "
        f"기울기 노름 {grad_norm:.2e}, 조건수 {cond:.2e}"
    )
    return ExtensionSolution(
        g=g,
        h=h,
        objective=objective,
        grad_norm=grad_norm,
        problem=problem,
        laguerre=tuple(coeffs),
        taylor_objective=taylor_objective,
        condition_number=cond,
        singular=singular,
    )


def solve_upper(
    f: SmoothFunction,
    U: float,
    k: int,
    b: float,
    prior: PriorMeasure,
) -> ExtensionSolution:
    """
    q <= U 만 알려진 경우의 확장. x -> -x 로 뒤집어 하한 문제로 풉니다.

    prior 는 (-inf, U] 위의 분포여야 합니다.
    """
    problem = ExtensionProblem(f=reflect(f), L=-U, k=k, b=b, prior=prior.reflected())
    solution = solve(problem)
    return replace(solution, reflected=True)


def g_full(solution: ExtensionSolution, x: ArrayLike) -> ArrayLike:
    """
    전체 추정량: x < L 에서는 다항식 g, x >= L 에서는 f(x) - b^2 f''(x).
    """
    problem = solution.problem
    arr = np.asarray(x, dtype=float)
    if solution.reflected:
        arr = -arr
    flat = np.atleast_1d(arr)
    out = np.empty_like(flat)

    left = flat < problem.L
    t = (problem.L - flat[left]) / problem.b
    out[left] = laguerre.lagval(t, np.array(solution.laguerre))
    right = ~left
    if right.any():
        xr = flat[right]
        out[right] = problem.f.value_at(xr) - problem.b**2 * problem.f.d2_at(xr)

    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def _right_region_integral(solution: ExtensionSolution, q: float, power: int) -> float:
    """int_L^inf r(x)^power p_b(x - q) dx, r = f - b^2 f''. q 를 중심으로 양쪽 e^{-s} 가중 적분"""
    problem = solution.problem
    f, b = problem.f, problem.b

    def r(x: float) -> float:
        return (f.value_at(x) - b**2 * f.d2_at(x)) ** power

    inner, _ = integrate(lambda s: r(q - b * s) * math.exp(-s), 0.0, (q - problem.L) / b)
    outer, _ = integrate(lambda s: r(q + b * s) * math.exp(-s), 0.0, math.inf)
    return 0.5 * (inner + outer)


def _moments(solution: ExtensionSolution, q: float) -> tuple[float, float]:
    problem = solution.problem
    if solution.reflected:
        q = -q
    if q < problem.L:
        raise ValidationError(f"q={q} 가 정의역 하한 L={problem.L} 보다 작습니다")

    coeffs = np.array(solution.laguerre)
    # 왼쪽 영역 질량 1/2 e^{(L-q)/b}; 정규직교 기저라 1, 2차 적분이 c_0, ||c||^2
    left_mass = 0.5 * math.exp((problem.L - q) / problem.b)
    first = left_mass * coeffs[0] + _right_region_integral(solution, q, 1)
    second = left_mass * float(coeffs @ coeffs) + _right_region_integral(solution, q, 2)
    return first, second


def estimator_expectation(solution: ExtensionSolution, q: float) -> float:
    """E[g_full(q + Z)] (불편성 수치 검증용, f(q) 와 같아야 함)"""
    return _moments(solution, q)[0]


def estimator_variance(solution: ExtensionSolution, q: float) -> float:
    """V[g_full(q + Z)] (음수가 되지 않도록 0 에서 자름)"""
    first, second = _moments(solution, q)
    return max(second - first**2, 0.0)


def raw_objective(problem: ExtensionProblem, g: Polynomial) -> float:
    """
    원래 좌표 계수로 계산한 목적함수.

    (1 / 2b) [W0 sum a_i a_j M_{i+j} - 2 W1 sum a_i M_i + W2 M_0], M_m = tail_moment(m, L, b)
    """
    w0, w1, w2 = problem.prior.exp_weighted_moments(problem.f, problem.L, problem.b)
    a = g.as_array()
    moments = np.array([tail_moment(m, problem.L, problem.b) for m in range(2 * len(a) - 1)])
    idx = np.add.outer(np.arange(len(a)), np.arange(len(a)))
    quad_term = a @ moments[idx] @ a
    lin_term = a @ moments[: len(a)]
    return float((w0 * quad_term - 2.0 * w1 * lin_term + w2 * moments[0]) / (2.0 * problem.b))


def g_from_h(h: Polynomial, b: float) -> Polynomial:
    """a_i = b_i - b^2 (i+2)(i+1) b_{i+2}"""
    h2 = poly_derivative(h, 2).as_array()
    a = h.as_array().copy()
    a[: len(h2)] -= b**2 * h2
    return Polynomial(tuple(a))


def h_from_g(g: Polynomial, b: float) -> Polynomial:
    """g = (I - b^2 D^2) h 를 상삼각 시스템으로 풀어 h 를 구합니다."""
    n = len(g.coeffs)
    system = np.eye(n)
    for i in range(n - 2):
        system[i, i + 2] = -(b**2) * (i + 2) * (i + 1)
    return Polynomial(tuple(solve_triangular(system, g.as_array(), lower=False, unit_diagonal=True)))


def h_from_g_series(g: Polynomial, b: float) -> Polynomial:
    """b_i = sum_l b^{2l} (i+2l)!/i! a_{i+2l}"""
    a = g.as_array()
    n = len(a)
    h = np.zeros(n)
    for i in range(n):
        for l in range(0, (n - 1 - i) // 2 + 1):
            j = i + 2 * l
            h[i] += b ** (2 * l) * math.perm(j, 2 * l) * a[j]
    return Polynomial(tuple(h))
