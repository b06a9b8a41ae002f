import cmath
import math

import numpy as np
import pytest
from scipy.integrate import quad

from accelsum.errors import DirectionError
from accelsum.series import TruncatedSeries, cauchy_product, euler_series
from accelsum.transforms import (
    DirectionalFunction,
    analytic_borel,
    formal_borel,
    formal_laplace,
    laplace_borel_roundtrip,
    laplace_mk,
    select_ray,
)


def coeffs(s):
    return np.array([complex(c) for c in s.coeffs])


def test_formal_borel_monomial():
    s = TruncatedSeries([0.0, 0.0, 2.0])  # 2 T^3
    b = formal_borel(s, 1)
    # Gamma(3) = 2, so the tau^3 coefficient is 1
    assert np.allclose(coeffs(b), [0.0, 0.0, 1.0])
    assert b.variable == "tau"


def test_formal_borel_euler_geometric():
    b = formal_borel(euler_series(12), 1)
    # (-1)^n n! / Gamma(n+1) = (-1)^n: geometric series tau/(1+tau)
    expect = [(-1.0) ** n for n in range(12)]
    assert np.allclose(coeffs(b), expect)


def test_formal_laplace_inverts_borel():
    rng = np.random.default_rng(1)
    s = TruncatedSeries(list(rng.normal(size=9) + 1j * rng.normal(size=9)))
    for k in (1, 2, 3):
        back = formal_laplace(formal_borel(s, k), k)
        assert np.max(np.abs(coeffs(back) - coeffs(s))) < 1e-12


def test_borel_diff_identity_random():
    # B(t^{k+1} d_t f)(tau) = k tau^k B(f)(tau) coefficientwise
    rng = np.random.default_rng(2)
    for k in (1, 2, 3):
        s = TruncatedSeries(list(rng.normal(size=10)))
        lhs = formal_borel(irregular_apply_shim(s, k + 1, 1), k)
        rhs = formal_borel(s, k)
        shifted = np.zeros(lhs.order, dtype=complex)
        rc = coeffs(rhs)
        shifted[k : k + rc.size] = k * rc
        assert np.max(np.abs(coeffs(lhs) - shifted)) < 1e-12


def irregular_apply_shim(s, q1, q2):
    from accelsum.series import irregular_apply

    return irregular_apply(s, q1, q2)


def test_borel_mult_monomial_beta_integral():
    # Coefficientwise, B(t^m f) has coefficient f_n / Gamma((m+n)/k); the
    # contour form reduces to this through the Beta integral.
    rng = np.random.default_rng(3)
    k, m = 2, 3
    s = TruncatedSeries(list(rng.normal(size=10)))
    shifted = TruncatedSeries([0.0] * m + list(coeffs(s)))
    lhs = coeffs(formal_borel(shifted, k))
    expect = np.zeros(m + s.order, dtype=complex)
    for n in range(1, s.order + 1):
        expect[m + n - 1] = coeffs(s)[n - 1] / math.gamma((m + n) / k)
    assert np.max(np.abs(lhs - expect)) < 1e-12


def test_borel_product_identity():
    # B(f * g) agrees with the Beta-integral mixture of B(f) and B(g):
    # coefficientwise sum_{i+j=n} f_i g_j / Gamma(n/k).
    rng = np.random.default_rng(4)
    for k in (1, 2):
        f = TruncatedSeries(list(rng.normal(size=12)))
        g = TruncatedSeries(list(rng.normal(size=12)))
        lhs = coeffs(formal_borel(cauchy_product(f, g, order=12), k))
        fg = coeffs(cauchy_product(f, g, order=12))
        expect = np.array([fg[n - 1] / math.gamma(n / k) for n in range(1, 13)])
        assert np.max(np.abs(lhs - expect)) < 1e-10


def test_laplace_mk_monomials():
    for k in (1, 2):
        for n in range(1, 7):
            w = DirectionalFunction.from_function(
                lambda u, n=n: u**n, 0.0, k, 0.0, aperture=0.6
            )
            T = 0.3 * cmath.exp(0.1j)
            got = laplace_mk(w, k, T)
            expect = math.gamma(n / k) * T**n
            assert abs(got - expect) < 1e-8 * max(1.0, abs(expect))


def test_laplace_mk_euler_oracle():
    w = DirectionalFunction.from_function(lambda u: u / (1.0 + u), 0.0, 1, 0.0, aperture=0.6)
    got = laplace_mk(w, 1, 0.1)
    oracle, err = quad(lambda r: math.exp(-r / 0.1) / (1.0 + r), 0.0, 60.0, limit=200)
    assert err < 1e-12
    assert abs(got - oracle) < 1e-6
    assert got.real == pytest.approx(0.0915633, abs=5e-7)


def test_laplace_mk_zero():
    w = DirectionalFunction.from_function(lambda u: 0.0 * u, 0.0, 1, 0.0, aperture=0.5)
    assert laplace_mk(w, 1, 0.2) == pytest.approx(0.0, abs=1e-15)


def test_laplace_of_formal_borel_is_identity_on_polynomials():
    rng = np.random.default_rng(5)
    cs = rng.normal(size=5)
    for k in (1, 2):
        borel = formal_borel(TruncatedSeries(list(cs)), k)
        bc = coeffs(borel)

        def w_fn(u, bc=bc):
            return sum(c * u ** (j + 1) for j, c in enumerate(bc))

        w = DirectionalFunction.from_function(w_fn, 0.0, k, 0.0, aperture=0.6)
        T = 0.25
        got = laplace_mk(w, k, T)
        expect = sum(c * T ** (j + 1) for j, c in enumerate(cs))
        assert abs(got - expect) < 1e-8 * max(1.0, abs(expect))


def test_select_ray_rejects_far_directions():
    with pytest.raises(DirectionError):
        select_ray(0.0, 2, math.pi / 2, 0.2, 0.5)


def test_analytic_borel_monomials():
    # |Z| stays within ~2x the contour radius: beyond that the Hankel
    # representation's condition number e^{|Z/(rho/2)|^k} eats digits.
    ktilde = 2
    for n in range(1, 5):
        borel = analytic_borel(lambda z, n=n: z**n, ktilde, 0.0, 1.0, 1.0)
        for Z in (0.3, 0.7 + 0.2j, 1.2):
            got = borel(Z)
            expect = Z**n / math.gamma(n / ktilde)
            assert abs(got - expect) < 1e-6 * max(1.0, abs(expect))


def test_analytic_borel_zero():
    borel = analytic_borel(lambda z: 0.0 * z, 2, 0.0, 1.0, 1.0)
    assert borel(0.7) == pytest.approx(0.0, abs=1e-14)


def test_laplace_borel_inversion():
    fixtures = [
        lambda z: z / (1.0 - z / 4.0),
        lambda z: np.exp(z) - 1.0,
        lambda z: np.sin(z),
    ]
    pts = [0.05 * cmath.exp(0.08j * j) * (1.0 + 0.4 * j) for j in range(10)]
    for F in fixtures:
        got = laplace_borel_roundtrip(F, 2, 0.0, 1.0, 1.0, pts)
        for g, T in zip(got, pts):
            assert abs(g - F(T)) < 1e-6 * max(1.0, abs(F(T)))


def test_gevrey_remainder_shape_euler():
    # |L(B(Euler))(T) - partial sums| <= C M^n Gamma(1 + n/k) |T|^n:
    # the fitted per-step growth of the normalized remainder stays bounded.
    w = DirectionalFunction.from_function(lambda u: u / (1.0 + u), 0.0, 1, 0.0, aperture=0.6)
    T = 0.05
    total = laplace_mk(w, 1, T)
    cs = coeffs(euler_series(14))
    ratios = []
    partial = 0.0
    for n in range(1, 13):
        rem = abs(total - partial)  # remainder after n-1 terms
        ratios.append(rem / (math.gamma(1.0 + n) * T**n))
        partial += cs[n - 1] * T**n
    ratios = np.array(ratios)
    # normalized remainders should be ~ C M^n: log-increments bounded
    incs = np.diff(np.log(ratios))
    assert np.all(np.abs(incs) < 5.0)
    assert np.isfinite(ratios).all()


def test_directional_function_growth_report():
    w = DirectionalFunction.from_function(
        lambda u: u * np.exp(0.5 * u**2) / (1.0 + u**4), 0.0, 2, 0.5
    )
    rep = w.check_growth()
    assert rep["violations"] == 0
    spiky = DirectionalFunction(
        0.0, np.array([0.1, 1.0, 4.0]), np.array([0.01, 0.01, 1e9]), 2, 0.5
    )
    assert spiky.check_growth()["violations"] >= 1


def test_directional_function_record_roundtrip():
    w = DirectionalFunction.from_function(lambda u: u / (1.0 + u), 0.3, 1, 0.0)
    rec = w.to_record()
    assert set(rec) == {"direction", "nodes", "values_re", "values_im", "k", "nu"}
    back = DirectionalFunction.from_record(rec)
    assert np.allclose(back.values, w.values)
    assert back.direction == w.direction
    # sample-backed interpolation agrees with the exact evaluator inside
    u = 0.37 * cmath.exp(0.3j)
    assert abs(back(u) - w(u)) < 2e-3 * abs(w(u))
