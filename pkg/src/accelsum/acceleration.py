"""Acceleration between Borel levels: the kernel G and the operators.

The kernel bridging levels ``k -> ktilde`` is a wedge-contour integral
that depends on the ratio ``xi / h`` only; its modulus decays like
``exp(-c2 (|h|/|xi|)^kappa)`` with ``1/kappa = 1/k - 1/ktilde``.  Two
evaluation paths are provided: direct contour quadrature (accurate while
the decay exponent is moderate) and a saddle-point form calibrated
against the direct path, which stays meaningful in the log domain far
beyond double-precision underflow.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ConstraintError, DivergenceError, GeometryError
from .series import TruncatedSeries
from .transforms import DirectionalFunction

_TRUNC = 38.0


@dataclass
class AccelPlan:
    """Index data for one acceleration step ``k -> k_tilde``."""

    k: int
    k_tilde: int
    delta_prime: float = None
    direction: float = 0.0
    c1: float = field(default=None)
    c2: float = field(default=None)

    def __post_init__(self):
        if not (self.k_tilde > self.k >= 1):
            raise ConstraintError("need k_tilde > k >= 1")
        if self.delta_prime is None:
            self.delta_prime = 0.9 * math.pi / self.kappa
        if not (0.0 < self.delta_prime < math.pi / self.kappa):
            raise ConstraintError("contour opening must lie in (0, pi/kappa)")

    @property
    def kappa(self):
        return 1.0 / (1.0 / self.k - 1.0 / self.k_tilde)

    @property
    def saddle_constant(self):
        """Constant C with G ~ exp(-C (h/xi)^kappa) along rays."""
        k, kt = self.k, self.k_tilde
        return (kt - k) / kt * (k / kt) ** (k / (kt - k))


def _ray_angle(plan):
    return math.pi / (2.0 * plan.k_tilde) + plan.delta_prime / 2.0


def _wedge_ray_integral(zeta, k, kt, theta_v, pts=10):
    """integral_0^inf exp(-v^k + (zeta v)^kt) v^(kt-1) dv along arg v = theta_v.

    Parameterized by y = r^k, where the slow factor exp(-v^k) is a pure
    complex exponential in y; panel count adapts to the total phase sweep
    so the oscillation is resolved to quadrature accuracy.
    """
    q = kt / k
    w_kt = (zeta * cmath.exp(1j * theta_v)) ** kt
    decay = -w_kt.real
    if decay <= 1e-300:
        raise GeometryError("ratio argument outside the kernel wedge")
    slow = cmath.exp(1j * k * theta_v)  # coefficient of y in the exponent
    cth = slow.real
    # truncation point of E(y) = -cth y - decay y^q, decreasing since cth > 0
    y_hi = max(_TRUNC / cth, (_TRUNC / decay) ** (1.0 / q))
    y_lo = 0.0
    for _ in range(80):
        y_mid = 0.5 * (y_lo + y_hi)
        if -cth * y_mid - decay * y_mid**q > -_TRUNC:
            y_lo = y_mid
        else:
            y_hi = y_mid
    y_star = y_hi
    phase_span = abs(slow.imag) * y_star + abs(w_kt.imag) * y_star**q
    n_lin = int(min(700, max(40, phase_span / 1.1)))
    edges = np.concatenate(
        [
            np.geomspace(y_star * 1e-9, y_star * 1e-2, 10),
            np.linspace(y_star * 1e-2, y_star, n_lin)[1:],
        ]
    )
    x, wleg = leggauss(pts)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    ys = (mid[:, None] + half[:, None] * x).ravel()
    wq = (half[:, None] * wleg).ravel()
    vals = np.exp(-slow * ys + w_kt * ys**q) * ys ** (q - 1.0)
    total = np.sum(wq * vals) / k
    return total * cmath.exp(1j * kt * theta_v)


def kernel_ratio(zeta, k, kt, delta_prime):
    """Kernel profile G(zeta) with h = 1 by direct contour quadrature."""
    a = math.pi / (2.0 * kt) + delta_prime / 2.0
    up = _wedge_ray_integral(zeta, k, kt, -a)
    down = _wedge_ray_integral(zeta, k, kt, +a)
    return -(kt * k) / (2j * math.pi) * zeta**kt * (up - down)


def kernel_G(xi, h, plan: AccelPlan):
    """Acceleration kernel; depends on xi/h only (exact scaling)."""
    return kernel_ratio(complex(xi) / complex(h), plan.k, plan.k_tilde, plan.delta_prime)


def _saddle_terms(zeta, k, kt):
    """(log-prefactor, exponent) of the saddle-point form of G(zeta)."""
    kappa = 1.0 / (1.0 / k - 1.0 / kt)
    lz = cmath.log(zeta)
    v_star = cmath.exp((math.log(k / kt) - kt * lz) / (kt - k))
    phi = -((kt - k) / kt) * v_star**k
    phi2 = (kt - k) * k * v_star ** (k - 2)
    logpref = kt * lz + (kt - 1) * cmath.log(v_star) - 0.5 * cmath.log(phi2)
    return logpref, phi


class KernelLog:
    """Log-domain kernel evaluator for ratios far inside the decay regime.

    The saddle-point form is calibrated against direct quadrature on a
    ratio window where both are reliable; the correction is fitted as a
    quadratic in zeta^kappa, so it extrapolates smoothly to smaller |zeta|
    where the direct path has no precision left.
    """

    def __init__(self, plan: AccelPlan, arg_range=None, n_arg=7):
        if arg_range is None:
            # the wedge rays keep decaying for |arg| < pi/kt - delta'/2 and
            # the saddle exponent keeps a positive real part within pi/(2 kappa)
            half = 0.8 * min(
                math.pi / plan.k_tilde - plan.delta_prime / 2.0,
                0.45 * math.pi / plan.kappa,
            )
            arg_range = (-half, half)
        self.plan = plan
        k, kt = plan.k, plan.k_tilde
        kappa = plan.kappa
        c_edge = plan.saddle_constant * min(
            math.cos(kappa * arg_range[0]), math.cos(kappa * arg_range[1])
        )
        if c_edge <= 0.0:
            raise GeometryError("calibration arg range leaves the kernel decay wedge")
        # binding sample for quadrature cancellation is the on-axis one
        w_lo = (plan.saddle_constant / 20.0) ** (1.0 / kappa)
        w_hi = min(4.0 * w_lo, 0.75)
        self.switch = 0.8 * w_hi
        radii = np.geomspace(w_lo, w_hi, 12)
        args = np.linspace(arg_range[0], arg_range[1], n_arg)
        zs, ratios = [], []
        for r in radii:
            for t in args:
                z = r * cmath.exp(1j * t)
                logpref, phi = _saddle_terms(z, k, kt)
                direct = kernel_ratio(z, k, kt, plan.delta_prime)
                if direct == 0.0:
                    continue
                zs.append(z)
                ratios.append(direct * cmath.exp(-logpref - phi))
        zs = np.asarray(zs)
        w = zs**kappa
        design = np.column_stack([np.ones_like(w), w, w * w])
        sol, *_ = np.linalg.lstsq(design, np.asarray(ratios), rcond=None)
        self.corr = sol
        resid = design @ sol - np.asarray(ratios)
        self.fit_residual = float(np.max(np.abs(resid)) / np.max(np.abs(ratios)))

    def log_kernel(self, zeta):
        """log G(zeta) as a complex number (real part = log |G|)."""
        zeta = complex(zeta)
        if abs(zeta) >= self.switch:
            val = kernel_ratio(zeta, self.plan.k, self.plan.k_tilde, self.plan.delta_prime)
            return cmath.log(val)
        logpref, phi = _saddle_terms(zeta, self.plan.k, self.plan.k_tilde)
        w = zeta**self.plan.kappa
        corr = self.corr[0] + self.corr[1] * w + self.corr[2] * w * w
        return logpref + phi + cmath.log(corr)

    def log_kernel_array(self, zetas):
        """Vectorized log G; direct quadrature above the switch radius,
        saddle form below (the usual regime for these calls)."""
        zetas = np.atleast_1d(np.asarray(zetas, dtype=complex))
        out = np.empty(zetas.shape, dtype=complex)
        small = np.abs(zetas) < self.switch
        k, kt = self.plan.k, self.plan.k_tilde
        kappa = self.plan.kappa
        if np.any(small):
            z = zetas[small]
            lz = np.log(z)
            v_star = np.exp((math.log(k / kt) - kt * lz) / (kt - k))
            phi = -((kt - k) / kt) * v_star**k
            phi2 = (kt - k) * k * v_star ** (k - 2)
            logpref = kt * lz + (kt - 1) * np.log(v_star) - 0.5 * np.log(phi2)
            w = z**kappa
            corr = self.corr[0] + self.corr[1] * w + self.corr[2] * w * w
            out[small] = logpref + phi + np.log(corr)
        for idx in np.nonzero(~small)[0]:
            out[idx] = cmath.log(
                kernel_ratio(zetas[idx], k, kt, self.plan.delta_prime)
            )
        return out


class KernelGrid:
    """Fast interpolated kernel values on the moderate-ratio region.

    Tabulates G on a (log |zeta|, arg zeta) grid where direct quadrature
    is reliable and interpolates with bivariate splines; below the inner
    radius callers should switch to the log-domain evaluator.
    """

    def __init__(self, plan: AccelPlan, z_lo=None, z_hi=1e4, arg_half=None,
                 n_rad=140, n_arg=15):
        from scipy.interpolate import RectBivariateSpline

        self.plan = plan
        if arg_half is None:
            arg_half = 0.8 * min(
                math.pi / plan.k_tilde - plan.delta_prime / 2.0,
                0.45 * math.pi / plan.kappa,
            )
        if z_lo is None:
            z_lo = (plan.saddle_constant / 24.0) ** (1.0 / plan.kappa)
        self.z_lo, self.arg_half = z_lo, arg_half
        lr = np.linspace(math.log(z_lo), math.log(z_hi), n_rad)
        aa = np.linspace(-arg_half, arg_half, n_arg)
        vals = np.empty((n_rad, n_arg), dtype=complex)
        kappa = plan.kappa
        c_sad = plan.saddle_constant
        for i, l in enumerate(lr):
            for j, a in enumerate(aa):
                z = cmath.exp(complex(l, a))
                # strip the saddle exponent: the remaining factor is a
                # slowly varying algebraic function, spline-friendly
                vals[i, j] = kernel_ratio(
                    z, plan.k, plan.k_tilde, plan.delta_prime
                ) * cmath.exp(c_sad * z**-kappa)
        self._re = RectBivariateSpline(lr, aa, vals.real, kx=3, ky=3)
        self._im = RectBivariateSpline(lr, aa, vals.imag, kx=3, ky=3)

    def values(self, zetas):
        zetas = np.atleast_1d(np.asarray(zetas, dtype=complex))
        lr = np.log(np.abs(zetas))
        aa = np.angle(zetas)
        if np.any(lr < math.log(self.z_lo) - 1e-9) or np.any(
            np.abs(aa) > self.arg_half + 1e-9
        ):
            raise GeometryError("ratio outside the tabulated kernel region")
        lr = np.clip(lr, None, math.log(1e4))
        smooth = self._re(lr, aa, grid=False) + 1j * self._im(lr, aa, grid=False)
        return smooth * np.exp(-self.plan.saddle_constant * zetas**-self.plan.kappa)


def fit_kernel_decay(plan: AccelPlan, xi=None, r_lo=None, r_hi=None, n=25):
    """Measure (c1, c2) and the decay exponent of |G(xi, r e^{id})|.

    The sampling window is placed where the decay exponent runs from ~2
    to ~24 so direct quadrature still has digits; the algebraic prefactor
    is absorbed by a log-r term and the exponent is read off the
    remaining pure power law.  Fitted constants are stored on the plan.
    """
    kappa = plan.kappa
    c_theory = plan.saddle_constant
    if xi is None:
        xi = 0.5 if r_lo is not None else 1.0
    if r_lo is None:
        r_lo = abs(xi) * (2.0 / c_theory) ** (1.0 / kappa)
    if r_hi is None:
        r_hi = abs(xi) * (24.0 / c_theory) ** (1.0 / kappa)
    rs = np.geomspace(r_lo, r_hi, n)
    vals = np.array(
        [abs(kernel_G(xi, r * cmath.exp(1j * plan.direction), plan)) for r in rs]
    )
    y = -np.log(vals)
    design = np.column_stack([np.ones_like(rs), np.log(rs), (rs / abs(xi)) ** kappa])
    sol, *_ = np.linalg.lstsq(design, y, rcond=None)
    c1 = math.exp(-sol[0])
    c2 = float(sol[2])
    inner = y - sol[0] - sol[1] * np.log(rs)
    mask = inner > 0.5
    slope = np.polyfit(np.log(rs[mask]), np.log(inner[mask]), 1)[0]
    plan.c1, plan.c2 = c1, c2
    return {"c1": c1, "c2": c2, "exponent": float(slope), "kappa": kappa}


def accelerate_numeric(f: DirectionalFunction, plan: AccelPlan, xi,
                       n_panels=26, pts=12):
    """Numerical acceleration ``integral_{L_d} f(h) G(xi, h) dh / h``.

    The declared growth of ``f`` at order kappa bounds the admissible
    |xi|; the radial quadrature stops where the kernel decay beats the
    declared growth by the working tolerance.
    """
    xi = complex(xi)
    if xi == 0:
        return 0.0 + 0.0j
    d = plan.direction
    kappa = plan.kappa
    c2_ray = plan.saddle_constant * math.cos(kappa * (cmath.phase(xi) - d))
    if c2_ray <= 0.0:
        raise GeometryError("xi outside the admissible opening of the kernel")
    rate = f.rate if f.growth_order >= kappa else 0.0
    if f.growth_order > kappa or (f.growth_order == kappa and rate >= c2_ray / abs(xi) ** kappa):
        raise DivergenceError("|xi| beyond the radius bound for this growth rate")
    r_star = (30.0 / (c2_ray / abs(xi) ** kappa - rate)) ** (1.0 / kappa)
    # geometric panels resolve the h -> 0 shape; exponent-uniform panels
    # resolve the super-exponential kernel cutoff near r_star
    r_knee = r_star * (1.0 / 30.0) ** (1.0 / kappa)
    x, wleg = leggauss(pts)
    edges = np.concatenate(
        [
            np.geomspace(r_star * 1e-8, r_knee, n_panels),
            r_star * (np.linspace(1.0, 30.0, 46)[1:] / 30.0) ** (1.0 / kappa),
        ]
    )
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * wleg).ravel()
    e_d = cmath.exp(1j * d)
    fv = np.array([f(r * e_d) for r in nodes])
    gv = np.array([kernel_G(xi, r * e_d, plan) for r in nodes])
    return complex(np.sum(weights * fv * gv / nodes))


def accelerate_formal(s: TruncatedSeries, plan: AccelPlan) -> TruncatedSeries:
    """Formal acceleration: coefficient n multiplied by Gamma(n/k)/Gamma(n/ktilde)."""

    def fn(n, c):
        factor = math.gamma(n / plan.k) / math.gamma(n / plan.k_tilde)
        if hasattr(c, "with_values"):
            return c.with_values(c.values * factor)
        return c * factor

    return s.map_coeffs(fn)
