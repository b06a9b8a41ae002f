import json

import numpy as np
import pytest

from accelsum.coeffspace import (
    CoeffGrid,
    WeightParams,
    convolve,
    emu_norm,
    inverse_fourier,
    make_m_grid,
    pick_m_max,
    polyval_im,
    smooth_profile,
    star_product,
    unit_profile,
)
from accelsum.errors import ConstraintError, InputError, PoleError, StripError

ONE = [1.0]


def grid_for(beta, mu, count=961, m_max=None):
    w = WeightParams(beta, mu)
    if m_max is None:
        m_max = pick_m_max(beta, mu)
    return make_m_grid(m_max, count), w


def test_emu_norm_zero():
    nodes, w = grid_for(1.0, 2.5, count=241)
    f = CoeffGrid(nodes, np.zeros_like(nodes), w)
    assert emu_norm(f) == 0.0


def test_emu_norm_unit_profile_attained_at_origin():
    nodes, w = grid_for(1.0, 2.5, count=241)
    f = CoeffGrid(nodes, unit_profile(w)(nodes), w)
    assert emu_norm(f) == pytest.approx(1.0, abs=1e-14)


def test_emu_norm_faster_decay():
    # f = e^{-2 beta |m|} (1+|m|)^{-mu} with beta = 1: weighted value e^{-|m|},
    # supremum 1 attained at the origin node.
    nodes, w = grid_for(1.0, 2.5, count=241)
    am = np.abs(nodes)
    f = CoeffGrid(nodes, np.exp(-2.0 * am) * (1.0 + am) ** (-2.5), w)
    assert emu_norm(f) == pytest.approx(1.0, abs=1e-14)


def test_emu_norm_rejects_nonfinite():
    nodes, w = grid_for(1.0, 2.5, count=241)
    vals = np.zeros_like(nodes)
    vals[3] = np.inf
    with pytest.raises(InputError):
        CoeffGrid(nodes, vals, w)


def test_norm_homogeneity_and_triangle():
    rng = np.random.default_rng(7)
    nodes, w = grid_for(1.0, 2.5, count=241)
    for _ in range(100):
        a = rng.normal(size=nodes.size) * np.exp(-0.3 * nodes**2)
        b = rng.normal(size=nodes.size) * np.exp(-0.3 * nodes**2)
        fa = CoeffGrid(nodes, a, w)
        fb = CoeffGrid(nodes, b, w)
        fab = CoeffGrid(nodes, a + b, w)
        c = -2.7 + 1.3j
        assert emu_norm(fa.with_values(c * a)) == pytest.approx(abs(c) * emu_norm(fa), rel=1e-13)
        assert emu_norm(fab) <= emu_norm(fa) + emu_norm(fb) + 1e-13


def test_star_product_annihilator():
    nodes, w = grid_for(0.5, 1.5, count=1201, m_max=38.0)
    f = CoeffGrid(nodes, np.zeros_like(nodes), w)
    g = CoeffGrid(nodes, np.exp(-np.abs(nodes)), w)
    out = star_product(f, g, ONE, ONE, ONE)
    assert np.max(np.abs(out.values)) == 0.0


def test_star_product_exponential_closed_form():
    # Q1 = Q2 = R = 1 and f = g = e^{-|m|}: the convolution integral is
    # (1 + |m|) e^{-|m|} exactly.
    nodes, w = grid_for(0.5, 1.5, count=1601, m_max=40.0)
    f = CoeffGrid(nodes, np.exp(-np.abs(nodes)), w)
    out = star_product(f, f, ONE, ONE, ONE)
    expect = (1.0 + np.abs(nodes)) * np.exp(-np.abs(nodes))
    assert np.max(np.abs(out.values - expect)) < 1e-3


def test_star_product_algebra_constant_recorded():
    rng = np.random.default_rng(12)
    nodes, w = grid_for(1.0, 2.5, count=241)
    q1, q2, r = [0.0, 1.0], [1.0, 1.0], [2.0, 0.0, 1.0]
    worst = 0.0
    for _ in range(50):
        a = rng.normal(size=3)
        b = rng.normal(size=3)
        fa = CoeffGrid(nodes, (a[0] + a[1] * nodes) * np.exp(-a[2] ** 2 * nodes**2 - 0.2 * nodes**2), w)
        fb = CoeffGrid(nodes, (b[0] + b[1] * nodes) * np.exp(-b[2] ** 2 * nodes**2 - 0.2 * nodes**2), w)
        na, nb = emu_norm(fa), emu_norm(fb)
        if na == 0.0 or nb == 0.0:
            continue
        nprod = emu_norm(star_product(fa, fb, q1, q2, r))
        worst = max(worst, nprod / (na * nb))
    assert 0.0 < worst < np.inf
    print(f"empirical algebra constant C = {worst:.6g}")


def test_star_product_preconditions():
    nodes, w = grid_for(1.0, 1.2, count=241)
    f = CoeffGrid(nodes, np.exp(-nodes**2), w)
    with pytest.raises(ConstraintError):
        # mu = 1.2 < deg(Q1) + 1 with deg Q1 = 1
        star_product(f, f, [0.0, 1.0], ONE, [0.0, 1.0, 1.0])
    with pytest.raises(ConstraintError):
        # deg R < deg Q1
        nodes2, w2 = grid_for(1.0, 3.5, count=241)
        g = CoeffGrid(nodes2, np.exp(-nodes2**2), w2)
        star_product(g, g, [0.0, 0.0, 1.0], ONE, [0.0, 1.0])


def test_star_product_pole_detection():
    nodes, w = grid_for(1.0, 2.5, count=241)
    f = CoeffGrid(nodes, np.exp(-nodes**2), w)
    # R(X) = X vanishes at the center node m = 0
    with pytest.raises(PoleError):
        star_product(f, f, ONE, ONE, [0.0, 1.0])


def test_plain_convolution_stays_representable():
    nodes, w = grid_for(1.0, 2.5, count=481)
    prof = unit_profile(w)(nodes)
    f = CoeffGrid(nodes, prof, w)
    out = convolve(f, f)
    n = emu_norm(out)
    assert np.isfinite(n) and n > 0.0


def test_inverse_fourier_gaussian():
    nodes, w = grid_for(1.0, 2.5, count=521, m_max=26.0)
    f = CoeffGrid(nodes, np.exp(-(nodes**2) / 2.0), w)
    val = inverse_fourier(f, 0.0)
    assert abs(val - 1.0) < 1e-8


def test_inverse_fourier_strip_guard():
    nodes, w = grid_for(1.0, 2.5, count=241)
    f = CoeffGrid(nodes, np.exp(-(nodes**2)), w)
    with pytest.raises(StripError):
        inverse_fourier(f, 0.3 + 1.0j)


def _random_smooth_grid(rng, nodes, w):
    a = rng.normal(size=4)
    vals = (a[0] + a[1] * nodes + a[2] * nodes**2) * np.exp(-(0.4 + a[3] ** 2) * nodes**2)
    return CoeffGrid(nodes, vals, w)


def test_fourier_derivative_identity_random():
    rng = np.random.default_rng(3)
    nodes, w = grid_for(1.0, 2.5, count=521, m_max=26.0)
    h = 3e-4
    for _ in range(20):
        f = _random_smooth_grid(rng, nodes, w)
        z = complex(rng.uniform(-1, 1), rng.uniform(-0.4, 0.4))
        fd = (inverse_fourier(f, z + h) - inverse_fourier(f, z - h)) / (2.0 * h)
        phi = f.with_values(1j * nodes * f.values)
        assert abs(fd - inverse_fourier(phi, z)) < 1e-6


def test_fourier_product_identity_random():
    rng = np.random.default_rng(5)
    nodes, w = grid_for(1.0, 2.5, count=521, m_max=26.0)
    for _ in range(20):
        f = _random_smooth_grid(rng, nodes, w)
        g = _random_smooth_grid(rng, nodes, w)
        z = complex(rng.uniform(-1, 1), rng.uniform(-0.4, 0.4))
        lhs = inverse_fourier(f, z) * inverse_fourier(g, z)
        psi = convolve(f, g)
        psi = psi.with_values(psi.values / np.sqrt(2.0 * np.pi))
        assert abs(lhs - inverse_fourier(psi, z)) < 1e-7


def test_json_roundtrip():
    nodes, w = grid_for(1.0, 2.5, count=241)
    f = CoeffGrid(nodes, np.exp(-(nodes**2)) * (1.0 + 2j), w)
    rec = json.loads(f.to_json())
    assert set(rec) == {"beta", "mu", "m_nodes", "values_re", "values_im"}
    g = CoeffGrid.from_json(f.to_json())
    assert np.allclose(g.values, f.values)
    assert g.weights == f.weights


def test_polyval_im_horner():
    m = np.array([0.0, 1.0, -2.0])
    # P(X) = 2 + 3X + X^2 at X = im
    vals = polyval_im([2.0, 3.0, 1.0], m)
    expect = 2.0 + 3.0 * 1j * m + (1j * m) ** 2
    assert np.allclose(vals, expect)


def test_smooth_profile_membership():
    nodes, w = grid_for(1.0, 2.5, count=521, m_max=26.0)
    f = CoeffGrid(nodes, smooth_profile(w)(nodes), w)
    assert np.isfinite(emu_norm(f))
