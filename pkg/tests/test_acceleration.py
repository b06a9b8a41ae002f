import cmath
import math

import numpy as np
import pytest

from accelsum.acceleration import (
    AccelPlan,
    KernelLog,
    accelerate_formal,
    accelerate_numeric,
    fit_kernel_decay,
    kernel_G,
    kernel_ratio,
)
from accelsum.errors import ConstraintError, DivergenceError, GeometryError
from accelsum.series import TruncatedSeries
from accelsum.transforms import DirectionalFunction, analytic_borel, formal_borel, formal_laplace


def test_plan_validation():
    plan = AccelPlan(1, 2)
    assert plan.kappa == pytest.approx(2.0)
    with pytest.raises(ConstraintError):
        AccelPlan(2, 2)
    with pytest.raises(ConstraintError):
        AccelPlan(3, 2)


def test_kernel_scaling_invariance():
    plan = AccelPlan(1, 2)
    z = 0.6 * cmath.exp(0.2j)
    base = kernel_G(z, 1.0, plan)
    for lam in (0.5, 2.0, 7.0):
        assert abs(kernel_G(lam * z, lam, plan) - base) < 1e-8 * abs(base)


def test_kernel_is_borel_transform_of_exponential():
    # G(xi, h) = k * (analytic Borel of exp(-u^{-k}))(xi/h); the ratio grid
    # stays where the Hankel representation is well conditioned.
    ratio_grid = {2: (0.45, 0.7, 0.95, 1.3, 1.8), 3: (0.45, 0.7, 0.95, 1.2, 1.3)}
    for k, kt in ((1, 2), (2, 3)):
        plan = AccelPlan(k, kt)
        delta = 0.99 * math.pi / plan.kappa
        borel = analytic_borel(
            lambda u, k=k: np.exp(-u ** (-k)), kt, 0.0, 1.0, delta,
            delta_prime=plan.delta_prime,
        )
        for ratio in ratio_grid[kt]:
            g = kernel_ratio(ratio, k, kt, plan.delta_prime)
            b = k * borel(ratio)
            assert abs(g - b) < 1e-6 * max(1e-3, abs(g))


def test_kernel_decay_exponent_matches_kappa():
    for k, kt in ((1, 2), (1, 3), (2, 3)):
        plan = AccelPlan(k, kt)
        fit = fit_kernel_decay(plan)
        assert fit["exponent"] == pytest.approx(plan.kappa, rel=0.05)
        assert plan.c1 > 0 and plan.c2 > 0
        # measured c2 should sit near the saddle-point constant
        assert fit["c2"] == pytest.approx(plan.saddle_constant, rel=0.05)


def test_kernel_wedge_guard():
    plan = AccelPlan(1, 2)
    with pytest.raises(GeometryError):
        kernel_ratio(0.5 * cmath.exp(1.4j), 1, 2, plan.delta_prime)


def test_accelerate_numeric_monomial_law():
    xi = 0.15 * cmath.exp(0.1j)
    for k, kt in ((1, 2), (1, 3), (2, 3)):
        plan = AccelPlan(k, kt)
        for n in range(1, 9):
            f = DirectionalFunction.from_function(
                lambda h, n=n: h**n, 0.0, 1, 0.0, aperture=0.3
            )
            got = accelerate_numeric(f, plan, xi)
            expect = math.gamma(n / k) / math.gamma(n / kt) * xi**n
            assert abs(got - expect) <= 1e-5 * max(1e-12, abs(expect))


def test_accelerate_numeric_trivial_cases():
    plan = AccelPlan(1, 2)
    f0 = DirectionalFunction.from_function(lambda h: 0.0 * h, 0.0, 1, 0.0)
    assert accelerate_numeric(f0, plan, 0.1) == 0.0
    f2 = DirectionalFunction.from_function(lambda h: h**2, 0.0, 1, 0.0)
    got = accelerate_numeric(f2, plan, 0.1)
    assert abs(got - 0.1**2) < 1e-6 * 0.01  # Gamma(2)/Gamma(1) = 1


def test_accelerate_numeric_radius_guard():
    plan = AccelPlan(1, 2)
    fit_kernel_decay(plan)
    # growth order kappa with a rate too large for this |xi|
    f = DirectionalFunction.from_function(
        lambda h: np.exp(3.0 * h**2), 0.0, 2, 3.0, n_samples=24, r_max=2.0
    )
    with pytest.raises(DivergenceError):
        accelerate_numeric(f, plan, 1.5)


def test_accelerate_formal_gamma_ratios():
    plan = AccelPlan(1, 2)
    s = TruncatedSeries([1.0, 1.0, 1.0])
    acc = accelerate_formal(s, plan)
    # coefficient of xi^2 is Gamma(2)/Gamma(1) = 1: unchanged
    assert complex(acc.coeffs[1]) == pytest.approx(1.0)
    assert complex(acc.coeffs[2]) == pytest.approx(
        math.gamma(3.0) / math.gamma(1.5), rel=1e-12
    )


def test_accelerate_formal_is_borel_after_laplace():
    rng = np.random.default_rng(8)
    s = TruncatedSeries(list(rng.normal(size=9)))
    for k, kt in ((1, 2), (2, 3)):
        plan = AccelPlan(k, kt)
        via_ops = formal_borel(formal_laplace(s, k), kt)
        direct = accelerate_formal(s, plan)
        a = np.array([complex(c) for c in via_ops.coeffs])
        b = np.array([complex(c) for c in direct.coeffs])
        assert np.max(np.abs(a - b)) < 1e-12 * max(1.0, np.max(np.abs(a)))


def test_numeric_matches_formal_on_truncation():
    rng = np.random.default_rng(9)
    cs = 0.5 * rng.normal(size=8)
    plan = AccelPlan(1, 2)
    s = TruncatedSeries(list(cs))
    acc = accelerate_formal(s, plan)
    f = DirectionalFunction.from_function(
        lambda h: sum(c * h ** (j + 1) for j, c in enumerate(cs)), 0.0, 1, 0.0,
        aperture=0.3,
    )
    for xi in (0.05, 0.12 * cmath.exp(0.15j), 0.2):
        got = accelerate_numeric(f, plan, xi)
        expect = acc.eval_at(xi)
        assert abs(got - expect) < 1e-5 * max(1e-6, abs(expect))


def test_kernel_log_matches_direct_in_overlap():
    plan = AccelPlan(1, 2)
    klog = KernelLog(plan)
    assert klog.fit_residual < 1e-6
    for zarg in (-0.5, 0.0, 0.5):
        z = 0.7 * klog.switch * cmath.exp(1j * zarg)
        lg = klog.log_kernel(z)
        direct = kernel_ratio(z, 1, 2, plan.delta_prime)
        assert abs(lg.real - math.log(abs(direct))) < 1e-8
        dphase = abs((lg.imag - cmath.phase(direct) + math.pi) % (2 * math.pi) - math.pi)
        assert dphase < 1e-8


def test_kernel_log_deep_decay_values():
    # far below the switch the log-kernel follows the saddle exponent
    plan = AccelPlan(1, 2)
    klog = KernelLog(plan)
    for z in (0.05, 0.02):
        lg = klog.log_kernel(z)
        assert lg.real == pytest.approx(-0.25 / z**2, rel=0.05)


def test_kappa_gevrey_remainder_on_euler_fixture():
    """Remainders of the accelerated Euler function against its formal
    acceleration follow the kappa-level envelope C K^N Gamma(1 + N/kappa)."""
    from accelsum.series import euler_series
    from accelsum.acceleration import accelerate_formal

    plan = AccelPlan(1, 2)
    f = DirectionalFunction.from_function(
        lambda h: h / (1.0 + h), 0.0, 1, 0.0, aperture=0.3
    )
    acc_series = accelerate_formal(euler_series(12), plan)
    cs = [complex(c) for c in acc_series.coeffs]
    xis = (0.05, 0.08, 0.12)
    ratios = []
    for n in range(2, 11):
        worst = 0.0
        for xi in xis:
            got = accelerate_numeric(f, plan, xi)
            partial = sum(cs[j] * xi ** (j + 1) for j in range(n - 1))
            envelope = math.gamma(1.0 + n / plan.kappa) * abs(xi) ** n
            worst = max(worst, abs(got - partial) / envelope)
        ratios.append(worst)
    # normalized remainders grow at most geometrically: bounded increments
    incs = np.diff(np.log(ratios))
    assert np.all(incs < 6.0)
    assert np.all(np.isfinite(ratios))
