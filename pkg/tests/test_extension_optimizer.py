import math
import sys
import os

import numpy as np
import pytest
from scipy import integrate as sp_integrate
from scipy.linalg import LinAlgError

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from core.errors import ValidationError
from core.extension_optimizer import (
    ExtensionProblem,
    PriorMeasure,
    build_reduced_qp,
    estimator_expectation,
    estimator_variance,
    g_from_h,
    g_full,
    h_from_g,
    h_from_g_series,
    raw_objective,
    solve,
    solve_upper,
    tail_moment,
)
from core.function_model import Polynomial, builtin
from core.noise import NoiseModel, RngStream, sample_many


def inverse_problem(k=10, L=1.0, b=1.0, prior=None) -> ExtensionProblem:
    return ExtensionProblem(
        f=builtin("inverse"),
        L=L,
        k=k,
        b=b,
        prior=prior or PriorMeasure.discrete([(L, 1.0)]),
    )


@pytest.fixture(scope="module")
def inverse_solution():
    """1/q, L=1, b=1, k=10, 사전분포 {1}"""
    return solve(inverse_problem())


def kkt_oracle(problem: ExtensionProblem) -> np.ndarray:
    """
    u = (x - L) / b, 기저 u^i / i! 에서 등식 제약 이차계획을 KKT 로 직접 풉니다.

    Returns:
        기저 계수 a (g(x) = sum a_i u^i / i!)
    """
    n = problem.k + 1
    w0, w1, _ = problem.prior.exp_weighted_moments(problem.f, problem.L, problem.b)
    idx = np.add.outer(np.arange(n), np.arange(n))
    sign = (-1.0) ** idx
    gram = sign * np.array([[math.comb(i + j, i) for j in range(n)] for i in range(n)])
    linear = (-1.0) ** np.arange(n)

    # H = sum D^{2l} G 이므로 u^i / i! 의 H(0), H'(0), H''(0) 기여는 짝홀에 따라 1
    A = np.zeros((3, n))
    A[0, 0::2] = 1.0
    A[1, 1::2] = 1.0
    A[2, 2::2] = 1.0
    f_l, d1_l, d2_l = problem.pasting_targets()
    targets = np.array([f_l, problem.b * d1_l, problem.b**2 * d2_l])

    kkt = np.block([[w0 * gram, A.T], [A, np.zeros((3, 3))]])
    rhs = np.concatenate([w1 * linear, targets])
    return np.linalg.solve(kkt, rhs)[:n]


class TestTailMoment:
    def test_zeroth(self):
        assert tail_moment(0, 3.0, 0.7) == 0.7

    def test_first(self):
        """int_{-inf}^0 x e^x dx = -1"""
        assert tail_moment(1, 0.0, 1.0) == pytest.approx(-1.0)

    def test_matches_quadrature(self):
        expected, _ = sp_integrate.quad(lambda x: x**4 * math.exp((x - 1.0) / 0.5), -math.inf, 1.0)
        assert tail_moment(4, 1.0, 0.5) == pytest.approx(expected, rel=1e-9)

    def test_negative_order(self):
        with pytest.raises(ValidationError):
            tail_moment(-1, 0.0, 1.0)


class TestPriorMeasure:
    def test_discrete_normalized(self):
        prior = PriorMeasure.discrete([(1.0, 2.0), (3.0, 6.0)])
        assert prior.atoms == ((1.0, 0.25), (3.0, 0.75))
        assert prior.support_min == 1.0

    def test_uniform_weights(self):
        """균등 [1, 3], b=1: W0 = (1 - e^{-2}) / 2"""
        f = builtin("inverse")
        w0, w1, w2 = PriorMeasure.uniform(1.0, 3.0).exp_weighted_moments(f, 1.0, 1.0)
        expected_w1, _ = sp_integrate.quad(lambda q: math.exp(1.0 - q) / q / 2.0, 1.0, 3.0)

        assert w0 == pytest.approx((1 - math.exp(-2.0)) / 2.0)
        assert w1 == pytest.approx(expected_w1, rel=1e-9)
        assert w2 < w1 < w0

    def test_reflected(self):
        prior = PriorMeasure.uniform(1.0, 4.0).reflected()
        assert (prior.lo, prior.hi) == (-4.0, -1.0)

    @pytest.mark.parametrize("points", [[], [(1.0, 0.0)], [(math.inf, 1.0)]])
    def test_invalid_discrete(self, points):
        with pytest.raises(ValidationError):
            PriorMeasure.discrete(points)

    def test_invalid_uniform(self):
        with pytest.raises(ValidationError):
            PriorMeasure.uniform(2.0, 1.0)


class TestReducedQP:
    def test_taylor_when_no_free_coefficients(self):
        """k=2 이면 제약만으로 결정: 1/x 의 L=1 테일러 다항식 3 - 3x + x^2"""
        solution = solve(inverse_problem(k=2))

        np.testing.assert_allclose(solution.h.coeffs, [3.0, -3.0, 1.0], atol=1e-12)
        assert solution.objective == pytest.approx(solution.taylor_objective)

    def test_single_free_coefficient(self):
        """k=3: 1x1 행렬, 양수"""
        qp = build_reduced_qp(inverse_problem(k=3, prior=PriorMeasure.discrete([(2.0, 1.0)])))

        assert qp.Q.shape == (1, 1)
        assert qp.Q[0, 0] > 0

    def test_positive_definite(self):
        qp = build_reduced_qp(inverse_problem(k=8))

        np.testing.assert_allclose(qp.Q, qp.Q.T)
        assert np.linalg.eigvalsh(qp.Q).min() > 0

    def test_gradient_matches_finite_differences(self):
        qp = build_reduced_qp(inverse_problem(k=6))
        y = np.random.default_rng(0).normal(size=qp.n_free)
        h = 1e-5
        numeric = np.array([
            (qp.objective(y + h * e) - qp.objective(y - h * e)) / (2 * h)
            for e in np.eye(qp.n_free)
        ])

        np.testing.assert_allclose(qp.gradient(y), numeric, rtol=1e-6, atol=1e-8)


class TestSolve:
    def test_beats_taylor(self, inverse_solution):
        qp = build_reduced_qp(inverse_solution.problem)
        y = np.array(inverse_solution.laguerre[3:])

        assert inverse_solution.objective <= inverse_solution.taylor_objective + 1e-12
        assert inverse_solution.grad_norm <= 1e-9 * np.linalg.norm(qp.Q) * (1 + np.linalg.norm(y))

    def test_constraints_hold(self, inverse_solution):
        h = inverse_solution.h.as_array()
        scale = sum(abs(c) * (i + 1) ** 2 for i, c in enumerate(h))

        for residual in inverse_solution.constraint_residuals():
            assert abs(residual) <= 1e-10 * scale

    def test_first_coefficient_fixed_by_constraints(self, inverse_solution):
        """c_0 = f(L) - b f'(L) = 2"""
        assert inverse_solution.laguerre[0] == pytest.approx(2.0)

    @pytest.mark.parametrize("problem", [
        inverse_problem(k=6, prior=PriorMeasure.discrete([(5.0, 1.0)])),
        inverse_problem(k=4, b=2.0, prior=PriorMeasure.discrete([(3.0, 1.0)])),
        inverse_problem(k=5, L=2.0, b=0.5, prior=PriorMeasure.uniform(2.0, 6.0)),
        ExtensionProblem(builtin("kth_root", [2]), 1.0, 6, 1.0, PriorMeasure.discrete([(4.0, 1.0)])),
        ExtensionProblem(builtin("kth_root", [3]), 0.5, 3, 1.5, PriorMeasure.discrete([(2.0, 1.0)])),
    ])
    def test_matches_kkt_oracle(self, problem):
        """자유 계수 소거 해와 KKT 직접 풀이가 같은 g"""
        solution = solve(problem)
        oracle = kkt_oracle(problem)

        u = np.linspace(-7.0, 0.0, 15)
        x = problem.L + problem.b * u
        expected = sum(a * u**i / math.factorial(i) for i, a in enumerate(oracle))
        np.testing.assert_allclose(solution.g(x), expected, rtol=1e-6, atol=1e-6)

    def test_raw_objective_agrees(self):
        """원래 좌표 계수로 다시 계산해도 같은 목적함수 값"""
        solution = solve(inverse_problem(k=6))
        assert raw_objective(solution.problem, solution.g) == pytest.approx(solution.objective, rel=1e-6)

    def test_prior_does_not_change_minimizer(self):
        """W0, W1 은 상수배와 c_0 에만 곱해져 최적 계수는 사전분포와 무관"""
        point = solve(inverse_problem(k=8, prior=PriorMeasure.discrete([(5.0, 1.0)])))
        spread = solve(inverse_problem(k=8, prior=PriorMeasure.uniform(1.0, 10.0)))

        np.testing.assert_allclose(point.laguerre, spread.laguerre, rtol=1e-6, atol=1e-7)
        assert point.objective != spread.objective

    def test_singular_fallback(self, mocker):
        """촐레스키 실패 시 최소 노름 해로 대체"""
        mocker.patch("core.extension_optimizer.cho_factor", side_effect=LinAlgError("not positive definite"))
        solution = solve(inverse_problem(k=5))

        qp = build_reduced_qp(solution.problem)

        assert solution.singular
        assert solution.grad_norm <= 1e-9 * np.linalg.norm(qp.Q) * (1 + np.linalg.norm(solution.laguerre))


class TestEstimator:
    @pytest.mark.parametrize("q", [1.0, 2.0, 5.0, 20.0])
    def test_unbiased(self, inverse_solution, q):
        """E[g(q + Z)] = 1/q"""
        assert estimator_expectation(inverse_solution, q) == pytest.approx(1.0 / q, abs=1e-6)

    def test_right_region_is_plug_in_correction(self, inverse_solution):
        """x >= L 에서 f(x) - b^2 f''(x)"""
        x = np.array([1.0, 2.0, 4.0])
        np.testing.assert_allclose(g_full(inverse_solution, x), 1 / x - 2 / x**3)

    def test_left_region_is_polynomial(self, inverse_solution):
        x = np.array([-3.0, -0.5, 0.9])
        np.testing.assert_allclose(inverse_solution(x), inverse_solution.g(x), rtol=1e-8, atol=1e-8)

    def test_scalar_evaluation(self, inverse_solution):
        assert isinstance(inverse_solution(0.5), float)

    def test_variance_matches_quadrature(self, inverse_solution):
        q, L = 2.0, 1.0
        g = inverse_solution.g

        def density(x):
            return 0.5 * math.exp(-abs(x - q))

        def r(x):
            return 1 / x - 2 / x**3

        left, _ = sp_integrate.quad(lambda x: g(x) ** 2 * density(x), -math.inf, L, limit=200)
        mid, _ = sp_integrate.quad(lambda x: r(x) ** 2 * density(x), L, q)
        right, _ = sp_integrate.quad(lambda x: r(x) ** 2 * density(x), q, math.inf)
        expected = left + mid + right - (1 / q) ** 2

        assert estimator_variance(inverse_solution, q) == pytest.approx(expected, rel=1e-5)

    def test_variance_far_from_bound_matches_samples(self, inverse_solution):
        """q = 200 에서는 사실상 f - f'' 의 분산"""
        q = 200.0
        x = q + sample_many(NoiseModel.laplace(1.0), RngStream(9), 10**6)
        sampled = np.var(inverse_solution(x))

        assert estimator_variance(inverse_solution, q) == pytest.approx(sampled, rel=0.05)

    def test_below_bound_rejected(self, inverse_solution):
        with pytest.raises(ValidationError):
            estimator_expectation(inverse_solution, 0.5)


class TestSolveUpper:
    def test_reflected_extension(self):
        """q <= -1 에서 1/q, 다항식은 x > -1 쪽"""
        solution = solve_upper(builtin("inverse"), -1.0, 8, 1.0, PriorMeasure.discrete([(-2.0, 1.0)]))

        assert solution.reflected
        assert solution(-2.0) == pytest.approx(-0.5 + 0.25)
        assert estimator_expectation(solution, -2.0) == pytest.approx(-0.5, abs=1e-6)
        assert estimator_expectation(solution, -1.0) == pytest.approx(-1.0, abs=1e-6)


class TestCoefficientMaps:
    @pytest.mark.parametrize("degree", [2, 5, 9, 12])
    def test_inverse_maps_agree(self, degree):
        """h_from_g 삼각 풀이와 급수 표현이 일치, g_from_h 로 되돌아옴"""
        g = Polynomial(tuple(np.random.default_rng(degree).normal(size=degree + 1)))
        b = 0.7

        by_solve = h_from_g(g, b).as_array()
        by_series = h_from_g_series(g, b).as_array()
        np.testing.assert_allclose(by_solve, by_series, rtol=1e-9, atol=1e-9 * np.abs(by_series).max())

        back = g_from_h(Polynomial(tuple(by_series)), b).as_array()
        np.testing.assert_allclose(back, g.as_array(), atol=1e-8 * np.abs(by_series).max())

    def test_g_from_h_example(self):
        """h = x^3, b=1 -> x^3 - 6x"""
        assert g_from_h(Polynomial((0, 0, 0, 1)), 1.0).coeffs == (0.0, -6.0, 0.0, 1.0)


class TestValidation:
    @pytest.mark.parametrize("k", [1, 31, 2.5])
    def test_degree_bounds(self, k):
        with pytest.raises(ValidationError):
            inverse_problem(k=k)

    def test_non_positive_scale(self):
        with pytest.raises(ValidationError):
            inverse_problem(b=0.0)

    def test_bound_below_domain(self):
        """kth_root 의 정의역 하한 0 아래"""
        with pytest.raises(ValidationError):
            ExtensionProblem(builtin("kth_root", [2]), -1.0, 4, 1.0, PriorMeasure.discrete([(1.0, 1.0)]))

    def test_prior_below_bound(self):
        with pytest.raises(ValidationError) as exc_info:
            inverse_problem(prior=PriorMeasure.discrete([(0.5, 1.0)]))

        assert "지지집합" in str(exc_info.value)


class TestRandomProblems:
    def test_reduced_hessian_and_dominance(self):
        """임의 문제 50개: Q 양의 정부호, 기울기 차분 검사, 제약 만족, 최적값 <= 테일러"""
        rng = np.random.default_rng(123)
        for _ in range(50):
            L = float(rng.uniform(0.5, 5.0))
            problem = inverse_problem(
                k=int(rng.integers(2, 13)),
                L=L,
                b=float(rng.uniform(0.5, 3.0)),
                prior=PriorMeasure.discrete([(L + float(rng.exponential(2.0)), 1.0)]),
            )
            qp = build_reduced_qp(problem)
            if qp.n_free:
                np.linalg.cholesky(qp.Q)
                for _ in range(10):
                    y = rng.normal(size=qp.n_free)
                    step = 1e-5
                    numeric = np.array([
                        (qp.objective(y + step * e) - qp.objective(y - step * e)) / (2 * step)
                        for e in np.eye(qp.n_free)
                    ])
                    size = np.abs(y) @ np.abs(qp.Q) @ np.abs(y) + np.abs(qp.c) @ np.abs(y) + abs(qp.const_term)
                    np.testing.assert_allclose(qp.gradient(y), numeric, rtol=1e-6, atol=1e-6 * (1.0 + size))

            solution = solve(problem)
            assert solution.objective <= solution.taylor_objective + 1e-9 * max(1.0, abs(solution.taylor_objective))

            h = solution.h.as_array()
            scale = sum(abs(c) * max(1.0, 2 * L) ** i * (i + 1) ** 2 for i, c in enumerate(h))
            for residual in solution.constraint_residuals():
                assert abs(residual) <= 1e-9 * scale

    @pytest.mark.parametrize("k", [2, 10])
    def test_inverse_unbiased_on_grid(self, k):
        """L=1, b=2: q 20개 격자에서 E[g(q + Z)] = 1/q"""
        solution = solve(inverse_problem(k=k, b=2.0))

        for q in np.linspace(1.0, 101.0, 20):
            assert estimator_expectation(solution, float(q)) == pytest.approx(1.0 / q, abs=1e-6)
