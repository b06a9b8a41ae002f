"""Borel and Laplace transforms of index ``m_k``.

The formal transforms act coefficientwise through Gamma factors; the
numerical Laplace transform integrates along a halfline with truncation
radius derived from the declared exponential growth, and the analytic
Borel transform uses a finite Hankel contour inside the sampled sector.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import AccuracyError, ConstraintError, DirectionError, GeometryError
from .series import TruncatedSeries

TRUNCATION_EXPONENT = 37.0


def _gamma_map(s, k, power):
    if k < 1:
        raise ConstraintError("k must be a positive integer")

    def fn(n, c):
        factor = math.gamma(n / k) ** power
        if hasattr(c, "with_values"):
            return c.with_values(c.values * factor)
        return c * factor

    return s.map_coeffs(fn)


def formal_borel(s: TruncatedSeries, k: int) -> TruncatedSeries:
    """Divide the n-th coefficient by Gamma(n/k); maps T-series to tau-series."""
    out = _gamma_map(s, k, -1)
    out.variable = "tau"
    return out


def formal_laplace(s: TruncatedSeries, k: int) -> TruncatedSeries:
    """Multiply the n-th coefficient by Gamma(n/k); inverse of formal_borel."""
    out = _gamma_map(s, k, +1)
    out.variable = "T"
    return out


def _angdiff(a, b):
    return (a - b + math.pi) % (2.0 * math.pi) - math.pi


def gauss_panels(lo, hi, n_panels, pts=12):
    """Gauss-Legendre nodes/weights on geometric panels of [lo, hi]."""
    x, w = leggauss(pts)
    edges = np.geomspace(lo, hi, n_panels + 1)
    nodes = []
    weights = []
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        nodes.append(0.5 * (a + b) + half * x)
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


@dataclass
class DirectionalFunction:
    """Function of ``tau`` along a ray, or a thin sector around it.

    Backed either by an exact evaluator (fixtures) or by radial samples
    with interpolation of ``w(tau)/tau`` linear in ``log r``; carries the
    declared exponential growth data used to set truncation radii.
    """

    direction: float
    radial_nodes: np.ndarray
    values: np.ndarray
    growth_order: int
    rate: float
    aperture: float = 0.0
    evaluator: object = None

    def __post_init__(self):
        self.radial_nodes = np.asarray(self.radial_nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=np.complex128)

    @classmethod
    def from_function(cls, fn, direction, growth_order, rate, aperture=0.0,
                      r_max=10.0, n_samples=96):
        rs = np.geomspace(1e-4, r_max, n_samples)
        vals = np.array([fn(r * cmath.exp(1j * direction)) for r in rs])
        return cls(direction, rs, vals, growth_order, rate, aperture, evaluator=fn)

    def __call__(self, u):
        if self.evaluator is not None:
            return self.evaluator(u)
        r = abs(u)
        rs = self.radial_nodes
        r_clip = min(max(r, rs[0]), rs[-1])
        i = int(np.searchsorted(rs, r_clip) - 1)
        i = min(max(i, 0), rs.size - 2)
        t = math.log(r_clip / rs[i]) / math.log(rs[i + 1] / rs[i])
        w0 = self.values[i] / rs[i]
        w1 = self.values[i + 1] / rs[i + 1]
        return ((1.0 - t) * w0 + t * w1) * r

    def check_growth(self, margin=2.0):
        """Report nodes violating |w| <= scale * r e^{nu r^k}/(1 + r^{2k})."""
        r = self.radial_nodes
        envelope = r * np.exp(self.rate * r**self.growth_order) / (
            1.0 + r ** (2 * self.growth_order)
        )
        ratios = np.abs(self.values) / envelope
        scale = float(np.max(ratios)) if ratios.size else 0.0
        median = float(np.median(ratios)) if ratios.size else 0.0
        violations = int(np.sum(ratios > margin * max(median, 1e-300)))
        return {"scale": scale, "median": median, "violations": violations}

    def to_record(self):
        return {
            "direction": self.direction,
            "nodes": self.radial_nodes.tolist(),
            "values_re": self.values.real.tolist(),
            "values_im": self.values.imag.tolist(),
            "k": self.growth_order,
            "nu": self.rate,
        }

    @classmethod
    def from_record(cls, rec):
        vals = np.asarray(rec["values_re"]) + 1j * np.asarray(rec["values_im"])
        return cls(rec["direction"], np.asarray(rec["nodes"]), vals, rec["k"], rec["nu"])


def select_ray(arg_t, k, direction, aperture, delta1):
    """Bisect the admissible ray interval, tie-break toward the bisector.

    Admissibility means ``cos(k (gamma - arg T)) >= delta1`` and gamma
    inside the declared sector around ``direction``.
    """
    half = math.acos(min(1.0, delta1)) / k
    center = _angdiff(arg_t, direction)
    lo = max(center - half, -aperture / 2.0)
    hi = min(center + half, aperture / 2.0)
    if lo > hi + 1e-12:
        raise DirectionError("no admissible integration ray for this T")
    mid = 0.0 if lo <= 0.0 <= hi else 0.5 * (lo + hi)
    return direction + mid


def _truncation_radius(rate, go, decay_rate, k):
    """Radius where rate*r^go - decay_rate*r^k drops below the working exponent."""
    if k > go:
        r = (2.0 * TRUNCATION_EXPONENT / decay_rate) ** (1.0 / k)
        for _ in range(60):
            val = rate * r**go - decay_rate * r**k
            if val <= -TRUNCATION_EXPONENT:
                return r
            r *= 1.3
        raise AccuracyError("cannot reach truncation tolerance")
    if decay_rate <= rate:
        raise AccuracyError("integrand does not decay; point outside radius bound")
    return (TRUNCATION_EXPONENT / (decay_rate - rate)) ** (1.0 / k)


def laplace_mk(w: DirectionalFunction, k: int, T, delta1=0.5,
               n_panels=30, pts=12):
    """m_k-Laplace transform ``k * integral_{L_gamma} w(u) exp(-(u/T)^k) du/u``.

    The ray is chosen by :func:`select_ray`; radial Gauss-Legendre panels
    run to the radius where the integrand bound from the declared growth
    data falls below the working tolerance.
    """
    T = complex(T)
    if T == 0:
        return 0.0 + 0.0j
    gamma = select_ray(cmath.phase(T), k, w.direction, w.aperture, delta1)
    r_star = _truncation_radius(w.rate, w.growth_order, delta1 / abs(T) ** k, k)
    nodes, weights = gauss_panels(r_star * 1e-10, r_star, n_panels, pts)
    e_dir = cmath.exp(1j * gamma)
    c = (e_dir / T) ** k
    samples = np.array([w(r * e_dir) for r in nodes])
    kernel = weights * np.exp(-c * nodes**k) / nodes
    return k * np.tensordot(kernel, samples, axes=(0, 0))


def hankel_path(d, ktilde, rho_half, delta_prime, n_panels=22, pts=12, n_arc=64):
    """Nodes and complex measure of the closed Hankel contour.

    Outward segment along ``d + a``, arc at radius ``rho_half`` from
    ``d + a`` down to ``d - a``, inward segment along ``d - a``, with
    ``a = pi/(2 ktilde) + delta_prime / 2``; radial panels cluster
    geometrically at the origin where the factor exp((Z/u)^k) dies.
    """
    a = math.pi / (2.0 * ktilde) + delta_prime / 2.0
    rr, rw = gauss_panels(rho_half * 1e-9, rho_half, n_panels, pts)
    e_in = cmath.exp(1j * (d + a))
    e_out = cmath.exp(1j * (d - a))
    nodes = [rr * e_in]
    weights = [rw * e_in]
    x, wleg = leggauss(8)
    th_edges = np.linspace(d + a, d - a, n_arc + 1)
    for t0, t1 in zip(th_edges[:-1], th_edges[1:]):
        half = 0.5 * (t1 - t0)
        ang = 0.5 * (t0 + t1) + half * x
        u = rho_half * np.exp(1j * ang)
        nodes.append(u)
        weights.append(half * wleg * 1j * u)
    nodes.append(rr * e_out)
    weights.append(-rw * e_out)
    return np.concatenate(nodes), np.concatenate(weights)


def _laguerre_segment(F, Z, ktilde, theta, rho_half, n_lag=48):
    """Straight Hankel segment from the origin to rho_half * e^{i theta}.

    Integrated in x = (|Z|/r)^ktilde, where the kernel is exp(c1 x) with
    |c1| = 1 and Re(c1) < 0.  The smooth stretch x in [x0, 1] is handled
    by Gauss panels in r; the oscillatory-decaying tail x >= max(x0, 1)
    by Gauss-Laguerre.
    """
    c1 = cmath.exp(1j * ktilde * (cmath.phase(Z) - theta))
    if c1.real >= -1e-3:
        raise GeometryError("segment does not decay for this Z; sector violated")
    e_th = cmath.exp(1j * theta)
    x0 = (abs(Z) / rho_half) ** ktilde
    x1 = max(x0, 1.0)
    total = 0.0 + 0.0j
    if x0 < 1.0:
        # outer piece r in [|Z|, rho_half]: exponent magnitude <= 1, smooth
        rr, rw = gauss_panels(abs(Z), rho_half, 14, 10)
        u = rr * e_th
        fv = np.array([F(ui) for ui in u])
        core = np.exp((Z / u) ** ktilde) * Z**ktilde / u ** (ktilde + 1)
        total += np.sum(rw * fv * core * e_th)
    # inner piece in the x variable from x1
    t, wl = np.polynomial.laguerre.laggauss(n_lag)
    s = t / (-c1.real)
    x = x1 + s
    r = abs(Z) * x ** (-1.0 / ktilde)
    fv = np.array([F(r_i * e_th) for r_i in r])
    osc = np.exp(1j * c1.imag * s)
    integral = np.sum(wl * fv * osc) / (-c1.real)
    pref = (Z / abs(Z)) ** ktilde / ktilde * cmath.exp(-1j * ktilde * theta)
    total += pref * cmath.exp(c1 * x1) * integral
    return total


def analytic_borel(F, ktilde, d, rho, delta, delta_prime=None, n_arc=64):
    """Analytic m_ktilde-Borel transform of a sector function.

    ``F`` is a callable analytic on the sector of direction ``d``, aperture
    ``pi/ktilde + delta`` and radius ``rho``; the result is a callable on
    the unbounded sector ``S(d, delta'')`` given by the Hankel-contour
    integral with contour radius ``rho / 2``.
    """
    if delta_prime is None:
        delta_prime = 0.9 * delta
    if not (0.0 < delta_prime < delta):
        raise GeometryError("need 0 < delta_prime < delta")
    a = math.pi / (2.0 * ktilde) + delta_prime / 2.0
    if 2.0 * a >= math.pi / ktilde + delta:
        raise GeometryError("contour opening leaves the sampled sector")
    rho_half = rho / 2.0
    x, wleg = leggauss(10)
    arc_nodes = []
    arc_weights = []
    th_edges = np.linspace(d + a, d - a, n_arc + 1)
    for t0, t1 in zip(th_edges[:-1], th_edges[1:]):
        half = 0.5 * (t1 - t0)
        ang = 0.5 * (t0 + t1) + half * x
        u = rho_half * np.exp(1j * ang)
        arc_nodes.append(u)
        arc_weights.append(half * wleg * 1j * u)
    arc_nodes = np.concatenate(arc_nodes)
    arc_weights = np.concatenate(arc_weights)
    arc_f = np.array([F(u) for u in arc_nodes])
    pref = -ktilde / (2j * math.pi)

    def transform(Z):
        Z = complex(Z)
        if Z == 0:
            return 0.0 + 0.0j
        expo = (Z / arc_nodes) ** ktilde
        if np.max(expo.real) > 700.0:
            raise GeometryError("Z outside the admissible sector of the transform")
        arc = np.sum(arc_weights * arc_f * np.exp(expo) * Z**ktilde
                     / arc_nodes ** (ktilde + 1))
        seg_in = _laguerre_segment(F, Z, ktilde, d + a, rho_half)
        seg_out = _laguerre_segment(F, Z, ktilde, d - a, rho_half)
        return complex(pref * (arc + seg_in - seg_out))

    return transform


def laplace_borel_roundtrip(F, ktilde, d, rho, delta, T, delta1=0.45):
    """Laplace transform of the analytic Borel transform, back at T.

    ``T`` may be a single point or a sequence (the transform is built
    once).  The ray sector is restricted to directions where both
    Hankel-contour segments of the Borel transform still decay with a
    solid margin.
    """
    delta_prime = 0.9 * delta
    borel = analytic_borel(F, ktilde, d, rho, delta, delta_prime=delta_prime)
    growth_rate = (2.0 / rho) ** ktilde
    wrapped = DirectionalFunction.from_function(
        borel, d, ktilde, growth_rate, aperture=0.6 * delta_prime, n_samples=8
    )
    if np.isscalar(T) or isinstance(T, complex):
        return laplace_mk(wrapped, ktilde, T, delta1=delta1, n_panels=26, pts=10)
    return [laplace_mk(wrapped, ktilde, t, delta1=delta1, n_panels=26, pts=10)
            for t in T]
