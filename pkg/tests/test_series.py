import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from accelsum.errors import ConstraintError
from accelsum.series import (
    TruncatedSeries,
    cauchy_product,
    euler_series,
    expand_irregular,
    falling_factorial,
    gevrey_fit,
    irregular_apply,
    rising_by_k,
    series_add,
)


def coeffs(s):
    return np.array([complex(c) for c in s.coeffs])


def test_cauchy_product_monomials():
    t = TruncatedSeries([1.0])
    prod = cauchy_product(t, t)
    assert np.allclose(coeffs(prod), [0.0, 1.0])


def test_cauchy_product_binomial():
    a = TruncatedSeries([1.0, 1.0])  # T + T^2
    b = TruncatedSeries([1.0])  # T
    prod = cauchy_product(a, b)
    assert np.allclose(coeffs(prod), [0.0, 1.0, 1.0])


def test_cauchy_product_associative_random():
    rng = np.random.default_rng(0)
    a = TruncatedSeries(list(rng.normal(size=10) + 1j * rng.normal(size=10)))
    b = TruncatedSeries(list(rng.normal(size=10) + 1j * rng.normal(size=10)))
    c = TruncatedSeries(list(rng.normal(size=10) + 1j * rng.normal(size=10)))
    left = cauchy_product(cauchy_product(a, b), c)
    right = cauchy_product(a, cauchy_product(b, c))
    assert np.max(np.abs(coeffs(left) - coeffs(right))) < 1e-12


small_floats = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(small_floats, min_size=1, max_size=6),
    st.lists(small_floats, min_size=1, max_size=6),
)
def test_cauchy_product_commutative(xs, ys):
    a = TruncatedSeries([complex(v) for v in xs])
    b = TruncatedSeries([complex(v) for v in ys])
    ab = coeffs(cauchy_product(a, b))
    ba = coeffs(cauchy_product(b, a))
    assert np.allclose(ab, ba, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(small_floats, min_size=1, max_size=5),
    st.lists(small_floats, min_size=1, max_size=5),
    st.lists(small_floats, min_size=1, max_size=5),
)
def test_cauchy_product_bilinear(xs, ys, zs):
    a = TruncatedSeries([complex(v) for v in xs])
    b = TruncatedSeries([complex(v) for v in ys])
    c = TruncatedSeries([complex(v) for v in zs])
    lhs = coeffs(cauchy_product(series_add(a, b), c))
    n = lhs.size
    ac = coeffs(cauchy_product(a, c))
    bc = coeffs(cauchy_product(b, c))
    rhs = np.zeros(n, dtype=complex)
    rhs[: ac.size] += ac
    rhs[: bc.size] += bc
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_irregular_apply_monomials():
    s = TruncatedSeries([0.0, 1.0])  # T^2
    out = irregular_apply(s, 3, 1)
    assert np.allclose(coeffs(out), [0.0, 0.0, 0.0, 2.0])
    s3 = TruncatedSeries([0.0, 0.0, 1.0])  # T^3
    out2 = irregular_apply(s3, 4, 2)
    assert np.allclose(coeffs(out2), [0.0, 0.0, 0.0, 0.0, 6.0])


def test_irregular_apply_requires_valid_exponents():
    s = TruncatedSeries([1.0])
    with pytest.raises(ConstraintError):
        irregular_apply(s, 1, 2)


def test_expand_irregular_trivial():
    exp = expand_irregular(1, 3)
    assert exp.A == {}


def test_expand_irregular_delta2_k1():
    exp = expand_irregular(2, 1)
    # matching n(n-1) = n(n+1) + A n forces A = -2
    assert exp.A[1] == pytest.approx(-2.0, abs=1e-12)


def test_expand_irregular_delta3_k2_monomials():
    exp = expand_irregular(3, 2)
    for n in range(1, 10):
        lhs = falling_factorial(n, 3)
        rhs = rising_by_k(n, 3, 2) + sum(
            a * rising_by_k(n, p, 2) for p, a in exp.A.items()
        )
        assert lhs == pytest.approx(rhs, abs=1e-9)


def test_expand_irregular_sweep():
    for delta in range(1, 6):
        for k in range(1, 4):
            exp = expand_irregular(delta, k)
            for n in range(1, 3 * delta + 1):
                denom = max(1.0, abs(falling_factorial(n, delta)))
                assert abs(exp.monomial_residual(n)) / denom < 1e-10


def test_gevrey_fit_half_order():
    cs = [complex(math.gamma(n / 2.0)) for n in range(1, 31)]
    est = gevrey_fit(TruncatedSeries(cs))
    assert est == pytest.approx(0.5, abs=0.05)


def test_gevrey_fit_convergent():
    est = gevrey_fit(TruncatedSeries([1.0 + 0.0j] * 30))
    assert abs(est) <= 0.05


def test_gevrey_fit_euler():
    est = gevrey_fit(euler_series(30))
    assert est == pytest.approx(1.0, abs=0.05)


def test_gevrey_fit_scale_invariant():
    s = euler_series(24)
    base = gevrey_fit(s)
    scaled = gevrey_fit(s.scaled(3.7e5))
    assert abs(base - scaled) < 1e-9


def test_gevrey_fit_needs_enough_coefficients():
    with pytest.raises(ConstraintError):
        gevrey_fit(TruncatedSeries([1.0] * 11))


def test_series_record_roundtrip():
    s = TruncatedSeries([1.0 + 2.0j, -0.5])
    back = TruncatedSeries.from_record(s.to_record())
    assert np.allclose(coeffs(back), coeffs(s))
    assert back.variable == s.variable
