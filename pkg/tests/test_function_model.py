import math
import sys
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

# 상위 디렉토리의 core 모듈을 import하기 위해 경로 추가
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from core.errors import ValidationError
from core.function_model import Polynomial, builtin, poly_derivative, poly_eval, reflect


class TestBuiltin:
    @pytest.mark.parametrize("name,params,lo,hi", [
        ("power", [2], -3.0, 3.0),
        ("power", [3], -3.0, 3.0),
        ("power", [5], -2.0, 2.0),
        ("inverse", [], 0.5, 5.0),
        ("kth_root", [3], 0.5, 5.0),
        ("cos", [0.8], -3.0, 3.0),
        ("sin", [1.5], -3.0, 3.0),
        ("identity", [2.0], -3.0, 3.0),
        ("poly", [1, -2, 0.5, 0.25], -2.0, 2.0),
    ])
    def test_derivatives_match_finite_differences(self, name, params, lo, hi):
        """100개 격자점에서 1, 2계 도함수가 중앙 차분과 일치"""
        f = builtin(name, params)
        x = np.linspace(lo, hi, 100)
        h = 1e-4
        d1 = (f.value_at(x + h) - f.value_at(x - h)) / (2 * h)
        d2 = (f.value_at(x + h) - 2 * f.value_at(x) + f.value_at(x - h)) / h**2

        np.testing.assert_allclose(f.d1_at(x), d1, rtol=1e-6, atol=1e-7)
        np.testing.assert_allclose(f.d2_at(x), d2, rtol=1e-4, atol=1e-5)

    def test_power_values(self):
        """power(3) 값과 도함수"""
        f = builtin("power", [3])

        assert f.value_at(2) == 8.0
        assert f.d1_at(2) == 12.0
        assert f.d2_at(2) == 12.0

    def test_inverse_second_derivative(self):
        """inverse 의 f''(1) = 2, 정의역 하한은 호출자가 지정"""
        f = builtin("inverse")

        assert f.d2_at(1) == 2.0
        assert f.domain_lower is None
        assert not f.polynomial_growth

    def test_abs_is_flagged(self):
        """절댓값은 두 번 미분 가능하지 않음으로 표시"""
        f = builtin("abs")

        assert not f.twice_differentiable
        assert f.value_at(-3) == 3.0

    def test_kth_root_domain(self):
        """kth_root 는 [0, inf) 정의역, k >= 2 이면 0 에서 미분 불가능"""
        assert builtin("kth_root", [2]).domain_lower == 0.0
        assert not builtin("kth_root", [2]).twice_differentiable
        assert builtin("kth_root", [1]).twice_differentiable

    def test_array_input(self):
        """배열 입력은 같은 모양의 배열 반환"""
        f = builtin("power", [2])
        x = np.array([[1.0, 2.0], [3.0, 4.0]])

        np.testing.assert_allclose(f.value_at(x), x**2)
        np.testing.assert_allclose(f.d2_at(x), np.full_like(x, 2.0))

    def test_label(self):
        assert builtin("power", [3]).label == "power:3"
        assert builtin("identity").label == "identity"
        assert builtin("cos", [0.5]).label == "cos:0.5"

    def test_unknown_name(self):
        """알 수 없는 함수 이름"""
        with pytest.raises(ValidationError) as exc_info:
            builtin("tan", [1])

        assert "알 수 없는 함수" in str(exc_info.value)

    @pytest.mark.parametrize("k", [0, -1, 1.5])
    def test_kth_root_invalid_k(self, k):
        with pytest.raises(ValidationError):
            builtin("kth_root", [k])

    def test_wrong_param_count(self):
        with pytest.raises(ValidationError) as exc_info:
            builtin("power", [])

        assert "파라미터 개수" in str(exc_info.value)


class TestReflect:
    def test_reflected_values(self):
        """reflect(f)(x) = f(-x), 도함수 부호"""
        f = builtin("power", [3])
        r = reflect(f)

        assert r.value_at(2) == -8.0
        assert r.d1_at(2) == -12.0
        assert r.d2_at(2) == -12.0


class TestPolynomial:
    def test_derivative(self):
        assert poly_derivative(Polynomial((1, 2, 3)), 1).coeffs == (2.0, 6.0)

    def test_derivative_of_constant(self):
        """상수의 도함수는 [0]"""
        assert poly_derivative(Polynomial((5,)), 1).coeffs == (0.0,)

    def test_derivative_order_beyond_degree(self):
        assert poly_derivative(Polynomial((1, 2, 3)), 5).coeffs == (0.0,)

    def test_derivative_order_zero(self):
        p = Polynomial((1, 2, 3))
        assert poly_derivative(p, 0) == p

    def test_negative_order(self):
        with pytest.raises(ValidationError):
            poly_derivative(Polynomial((1, 2)), -1)

    def test_eval(self):
        """호너 계산"""
        p = Polynomial((1, -2, 3))

        assert poly_eval(p, 2.0) == 9.0
        np.testing.assert_allclose(p(np.array([0.0, 1.0])), [1.0, 2.0])

    def test_empty_coefficients(self):
        assert Polynomial(()).coeffs == (0.0,)

    def test_degree_ignores_trailing_zeros(self):
        """차수는 0 이 아닌 최고차 계수, 영다항식은 0"""
        assert Polynomial((1, 0, 0)).degree == 0
        assert Polynomial((0, 0, 1, 0)).degree == 2
        assert Polynomial((0.0, 0.0)).degree == 0
        assert Polynomial((0, 0, 1, 0)).trimmed().coeffs == (0.0, 0.0, 1.0)

    def test_to_function(self):
        f = Polynomial((0, 0, 1)).to_function()

        assert f.value_at(3) == 9.0
        assert f.d2_at(3) == 2.0

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(-50, 50), min_size=1, max_size=10), st.integers(0, 4), st.integers(0, 4))
    def test_derivative_orders_compose(self, coeffs, i, j):
        """D^i D^j = D^(i+j) (정수 계수라 정확히 일치)"""
        p = Polynomial(tuple(coeffs))
        assert poly_derivative(poly_derivative(p, i), j) == poly_derivative(p, i + j)

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.floats(-10, 10), min_size=1, max_size=8),
        st.floats(-3, 3),
    )
    def test_eval_matches_numpy(self, coeffs, x):
        expected = np.polynomial.polynomial.polyval(x, coeffs)
        assert poly_eval(Polynomial(tuple(coeffs)), x) == pytest.approx(expected, rel=1e-9, abs=1e-9)
