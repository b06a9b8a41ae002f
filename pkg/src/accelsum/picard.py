"""Fixed points of the Borel-plane convolution operators on ray grids.

Every Volterra integral in the three operator families couples points of
one ray only: written in the real variable ``y = r^k`` along the ray of
direction gamma, each term becomes

    e^{i k gamma (c+q-1)} * Y^{c+q-1} integral_0^1 (1-u)^{c-1} u^{q-1}
                                      w((Y u)^{1/k} e^{i gamma}) du,

handled by Gauss-Jacobi rules with the vanishing of ``w`` at the origin
absorbed into the weight exponent.  The quadratic and coefficient
convolutions reduce to an inner integral precomputed on the shared
radial grid plus the same outer Volterra shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import roots_jacobi

from ._kernels import conv_center_batch
from .cauchy import SQRT2PI, ProblemSpec, eps_ratio
from .coeffspace import polyval_im
from .errors import DivergenceError, GeometryError
from .series import expand_irregular

NQ = 20


@lru_cache(maxsize=64)
def jacobi01(n, alpha, beta):
    """Nodes/weights with sum w_i g(u_i) = integral_0^1 (1-u)^a u^b g(u) du."""
    x, w = roots_jacobi(n, alpha, beta)
    return 0.5 * (x + 1.0), w * 0.5 ** (alpha + beta + 1)


@dataclass
class RayGrid:
    gamma: float
    radii: np.ndarray
    m_nodes: np.ndarray

    @classmethod
    def build(cls, gamma, m_nodes, r_min=1e-3, r_max=6.0, count=64):
        return cls(gamma, np.geomspace(r_min, r_max, count), np.asarray(m_nodes))

    @property
    def points(self):
        return self.radii * np.exp(1j * self.gamma)


@dataclass
class TauGridFunction:
    """Samples w(r e^{i gamma}, m) with the weight metadata of its space."""

    grid: RayGrid
    values: np.ndarray          # (n_r, n_m)
    k: int
    kappa_exp: float
    rate: float
    beta: float
    mu: float

    def norm(self):
        return weighted_norm(self)

    def interp(self):
        return RayInterp(self.grid.radii, self.values)


def weighted_norm(w: TauGridFunction):
    """sup (1+|m|)^mu e^{beta|m| - nu r^kappa} (1 + r^{2k}) / r * |w|."""
    r = w.grid.radii[:, None]
    m = np.abs(w.grid.m_nodes)[None, :]
    weight = (
        (1.0 + m) ** w.mu
        * np.exp(w.beta * m - w.rate * r**w.kappa_exp)
        * (1.0 + r ** (2 * w.k))
        / r
    )
    return float(np.max(weight * np.abs(w.values)))


class RayInterp:
    """Interpolates w/r in log r (complex, vectorized over m).

    Below the innermost grid radius the ratio w/r is continued linearly
    in r from its boundary value and slope: w/r is analytic in the ray
    radius at the origin, while the log-r spline cannot reach it.
    """

    def __init__(self, radii, values):
        self.radii = radii
        self.log_r = np.log(radii)
        ratio = values / radii[:, None] if values.ndim == 2 else values / radii
        self.spline = CubicSpline(self.log_r, ratio, axis=0)
        self._r0 = radii[0]
        self._ratio0 = ratio[0]
        # d(w/r)/dr at r0 from the log-r spline derivative
        self._slope0 = self.spline(self.log_r[0], 1) / self._r0

    def ratio(self, r_eval):
        """w/r at the given radii, shape (n_eval, n_m)."""
        r_eval = np.asarray(r_eval, dtype=float)
        lr = np.log(np.clip(r_eval, self._r0, self.radii[-1]))
        out = self.spline(lr)
        low = r_eval < self._r0
        if np.any(low):
            ext = self._ratio0 + np.multiply.outer(r_eval[low] - self._r0, self._slope0)
            out[low] = ext
        return out

    def __call__(self, r_eval):
        """Values of w at the given radii, shape (n_eval, n_m)."""
        r_eval = np.asarray(r_eval, dtype=float)
        return self.ratio(r_eval) * r_eval[..., None]


def _geom_sum(v, k):
    """(1 - v^k) / (1 - v) = 1 + v + ... + v^{k-1}, smooth on [0, 1]."""
    out = np.ones_like(v)
    p = np.ones_like(v)
    for _ in range(1, k):
        p = p * v
        out = out + p
    return out


def volterra_term(grid: RayGrid, interp, k, c, q, nq=NQ):
    """V[c, q](w) on all grid radii.

    Parameterized by the ray radius tau' = r v (not by y = tau'^k) so the
    interpolated factor stays smooth for every level k; the endpoint
    power (1 - v^k)^(c-1) splits into the Jacobi weight (1 - v)^(c-1)
    times the smooth geometric-sum factor.
    """
    u, wq = jacobi01(nq, c - 1.0, float(k * q))
    gs = _geom_sum(u, k) ** (c - 1.0)
    r = grid.radii
    r_eval = np.outer(r, u)  # (P, NQ)
    ratio_vals = interp.ratio(r_eval)
    vals = np.tensordot(wq * gs, ratio_vals, axes=(0, 1))  # (P, M)
    phase = np.exp(1j * k * grid.gamma * (c + q - 1.0))
    return (k * phase * r ** (k * (c + q - 1.0)) * r)[:, None] * vals


class BilinearTerm:
    """Outer Volterra integral of the inner double convolution.

    The inner integral over the splitting fraction is folded at 1/2 and
    parameterized by sigma with v = sigma^k on each half, which keeps
    both interpolated factors smooth in sigma; it is evaluated on the
    shared radial grid, splined (as a function of the ray radius), and
    fed to an outer rule in the same tau' parameterization as the plain
    Volterra terms.
    """

    def __init__(self, grid, k, left_poly, right_poly, weights_vec, nq=NQ):
        self.grid = grid
        self.k = k
        self.left_mult = polyval_im(left_poly, grid.m_nodes)
        self.right_mult = polyval_im(right_poly, grid.m_nodes) * weights_vec
        # inner: sigma in [0, 2^{-1/k}], plain Legendre after substitution
        from numpy.polynomial.legendre import leggauss

        x, w = leggauss(nq)
        s_hi = 0.5 ** (1.0 / k)
        self.sigma = 0.5 * s_hi * (x + 1.0)
        self.w_sigma = 0.5 * s_hi * w * (1.0 - self.sigma**k) ** (1.0 / k - 1.0) * k
        # outer: W = k r^3 int (1-v^k)^{1/k} v J(r v) dv, Jacobi(1/k, 1)
        self.u_out, w_out = jacobi01(nq, 1.0 / k, 1.0)
        self.w_out = w_out * _geom_sum(self.u_out, k) ** (1.0 / k)

    def inner_on_grid(self, left_interp, right_interp):
        """J(r_j, m): inner convolution integral scaled by y^{1-2/k}."""
        r = self.grid.radii
        frac_near = self.sigma                       # (yv)^{1/k} / y^{1/k}
        frac_far = (1.0 - self.sigma**self.k) ** (1.0 / self.k)
        total = None
        for fl, fr in ((frac_far, frac_near), (frac_near, frac_far)):
            rs_left = np.outer(r, fl)
            rs_right = np.outer(r, fr)
            lv = left_interp.ratio(rs_left)
            rv = right_interp.ratio(rs_right)
            p, nq, m = lv.shape
            flat_l = (lv * self.left_mult).reshape(p * nq, m)
            flat_r = (rv * self.right_mult).reshape(p * nq, m)
            conv = conv_center_batch(flat_l, flat_r).reshape(p, nq, m)
            part = np.tensordot(self.w_sigma, conv, axes=(0, 1))
            total = part if total is None else total + part
        return total  # smooth in the ray radius, J(0) finite

    def apply(self, left_interp, right_interp):
        j_grid = self.inner_on_grid(left_interp, right_interp)
        j_spline = CubicSpline(np.log(self.grid.radii), j_grid, axis=0)
        r = self.grid.radii
        r_eval = np.outer(r, self.u_out)
        jv = j_spline(np.log(np.clip(r_eval, r[0], None)))
        vals = np.tensordot(self.w_out, jv, axes=(0, 1))
        phase = np.exp(3j * self.grid.gamma)
        return (self.k * phase * r**3)[:, None] * vals


@dataclass
class OperatorReport:
    iterations: int = 0
    contraction: list = field(default_factory=list)
    final_norm: float = 0.0
    step_norm: float = 0.0


class ConvolutionOperator:
    """One Picard operator: Volterra terms, bilinear terms, fixed forcing.

    ``divisor`` is Q(im)-like (shape (m,)) or P_m-like (shape (r, m));
    the forcing contribution is a fixed array added to every application.
    """

    def __init__(self, grid, k, divisor, volterra, bilinear_self,
                 bilinear_fixed, conv00, forcing_term, space_meta):
        self.grid = grid
        self.k = k
        self.divisor = divisor
        self.volterra = volterra              # list of (coef_m, scalar, c, q)
        self.bilinear_self = bilinear_self    # (scalar, BilinearTerm) or None
        self.bilinear_fixed = bilinear_fixed  # (scalar, BilinearTerm, interp) or None
        self.conv00 = conv00                  # (scalar, c00_vals, r0w_mult) or None
        self.forcing_term = forcing_term      # array (r, m) or None
        self.space_meta = space_meta          # dict for TauGridFunction

    def wrap(self, values):
        return TauGridFunction(self.grid, values, **self.space_meta)

    def apply(self, w_values):
        interp = RayInterp(self.grid.radii, w_values)
        total = np.zeros_like(w_values)
        for coef_m, scalar, c, q in self.volterra:
            total += scalar * coef_m[None, :] * volterra_term(
                self.grid, interp, self.k, c, q
            )
        if self.bilinear_self is not None:
            scalar, term = self.bilinear_self
            total += scalar * term.apply(interp, interp)
        if self.bilinear_fixed is not None:
            scalar, term, fixed_interp = self.bilinear_fixed
            total += scalar * term.apply(fixed_interp, interp)
        if self.conv00 is not None:
            scalar, c00_vals, mult = self.conv00
            g = conv_center_batch(
                np.broadcast_to(c00_vals, w_values.shape), w_values * mult
            )
            g_interp = RayInterp(self.grid.radii, g)
            total += scalar * volterra_term(self.grid, g_interp, self.k, 1.0 + 1.0 / self.k, 0.0)
        if self.forcing_term is not None:
            total = total + self.forcing_term
        return total / self.divisor

    def solve(self, tol=1e-10, max_iter=60):
        w = np.zeros((self.grid.radii.size, self.grid.m_nodes.size), dtype=complex)
        report = OperatorReport()
        prev_step = None
        bad = 0
        for it in range(1, max_iter + 1):
            w_new = self.apply(w)
            step = self.wrap(w_new - w)
            step_norm = step.norm()
            report.iterations = it
            report.step_norm = step_norm
            if prev_step is not None and prev_step > 0.0:
                factor = step_norm / prev_step
                report.contraction.append(factor)
                if factor >= 1.0:
                    bad += 1
                    if bad >= 3:
                        raise DivergenceError(
                            f"no contraction after {it} iterations (factor {factor:.3f})"
                        )
                else:
                    bad = 0
            w = w_new
            prev_step = step_norm
            scale = max(1.0, self.wrap(w).norm())
            if step_norm < tol * scale:
                break
        out = self.wrap(w)
        report.final_norm = out.norm()
        return out, report


def _phi_grid(grid, c0n, k):
    """Borel transform of the coefficient series on the ray grid (closed form)."""
    pts = grid.points
    vals = np.zeros((grid.radii.size, grid.m_nodes.size), dtype=complex)
    for n, g in enumerate(c0n):
        if n == 0:
            continue
        vals += np.outer(pts**n / math.gamma(n / k), np.ones(grid.m_nodes.size)) * g.values
    return vals


def _forcing_volterra(grid, k, psi_vals, scalar):
    interp = RayInterp(grid.radii, psi_vals)
    return scalar * volterra_term(grid, interp, k, 1.0 + 1.0 / k, 0.0)


def build_k1_main_operator(spec: ProblemSpec, grid: RayGrid, eps, psi_k1_vals):
    """Level-k1 operator of the main problem (division by Q(im) only)."""
    m = grid.m_nodes
    k1, k2 = spec.k1, spec.k2
    qv = polyval_im(spec.q_poly, m)
    rdv = polyval_im(spec.r_polys[spec.big_d], m)
    dD = spec.delta[spec.big_d]
    a_top = (dD - 1) * (k2 - k1) / k1
    g1 = k1 * math.gamma(1.0 + 1.0 / k1)
    volterra = [(rdv, k1**dD / (k1 * math.gamma(a_top)), a_top, float(dD))]
    for p, a_coef in expand_irregular(dD, k1).A.items():
        c = a_top + dD - p
        volterra.append((rdv, a_coef * k1**p / (k1 * math.gamma(c)), c, float(p)))
    for l in range(1, spec.big_d):
        rlv = polyval_im(spec.r_polys[l], m)
        epow = eps ** (spec.big_delta[l] - spec.d_low[l] + spec.delta[l] - 1)
        bl = spec.d1_l(l) / k1
        dl = spec.delta[l]
        volterra.append((rlv, epow * k1**dl / (k1 * math.gamma(bl)), bl, float(dl)))
        for p, a_coef in expand_irregular(dl, k1).A.items():
            c = bl + dl - p
            volterra.append(
                (rlv, epow * a_coef * k1**p / (k1 * math.gamma(c)), c, float(p))
            )
    wvec = spec.c0n[0].trapezoid_weights()
    bil_self = BilinearTerm(grid, k1, spec.q1_poly, spec.q2_poly, wvec)
    bil_fixed = BilinearTerm(grid, k1, [1.0], spec.r_polys[0], wvec)
    phi_vals = _phi_grid(grid, spec.c0n, k1)
    meta = dict(k=k1, kappa_exp=spec.kappa, rate=spec.nu, beta=spec.beta, mu=spec.mu)
    forcing = _forcing_volterra(grid, k1, psi_k1_vals, eps_ratio(spec.cf, eps) / g1)
    divisor = np.broadcast_to(qv[None, :], (grid.radii.size, m.size))
    return ConvolutionOperator(
        grid,
        k1,
        divisor,
        volterra,
        (eps_ratio(spec.c12, eps) / (g1 * SQRT2PI), bil_self),
        (eps_ratio(spec.c0, eps) / (g1 * SQRT2PI), bil_fixed,
         RayInterp(grid.radii, phi_vals)),
        (eps_ratio(spec.c00, eps) / (g1 * SQRT2PI), spec.c0n[0].values,
         polyval_im(spec.r_polys[0], m) * wvec),
        forcing,
        meta,
    )


def p_m_on_grid(grid, q_poly, rd_poly, delta_d, k_level):
    m = grid.m_nodes
    qv = polyval_im(q_poly, m)
    rdv = polyval_im(rd_poly, m)
    tau = grid.points[:, None]
    pm = qv[None, :] * k_level - rdv[None, :] * k_level**delta_d * tau ** (
        (delta_d - 1) * k_level
    )
    if float(np.min(np.abs(pm))) <= 0.0:
        raise GeometryError("P_m vanishes on the ray grid")
    return pm


def build_k2_main_operator(spec: ProblemSpec, grid: RayGrid, eps, psi_k2_vals):
    """Level-k2 operator of the main problem (division by P_m(tau))."""
    m = grid.m_nodes
    k2 = spec.k2
    rdv = polyval_im(spec.r_polys[spec.big_d], m)
    dD = spec.delta[spec.big_d]
    g2 = math.gamma(1.0 + 1.0 / k2)
    pm = p_m_on_grid(grid, spec.q_poly, spec.r_polys[spec.big_d], dD, k2)
    volterra = []
    for p, a_coef in expand_irregular(dD, k2).A.items():
        volterra.append(
            (rdv, a_coef * k2**p / math.gamma(float(dD - p)), float(dD - p), float(p))
        )
    for l in range(1, spec.big_d):
        rlv = polyval_im(spec.r_polys[l], m)
        epow = eps ** (spec.big_delta[l] - spec.d_low[l] + spec.delta[l] - 1)
        cl = spec.d2_l(l) / k2
        dl = spec.delta[l]
        volterra.append((rlv, epow * k2**dl / math.gamma(cl), cl, float(dl)))
        for p, a_coef in expand_irregular(dl, k2).A.items():
            c = cl + dl - p
            volterra.append((rlv, epow * a_coef * k2**p / math.gamma(c), c, float(p)))
    wvec = spec.c0n[0].trapezoid_weights()
    bil_self = BilinearTerm(grid, k2, spec.q1_poly, spec.q2_poly, wvec)
    bil_fixed = BilinearTerm(grid, k2, [1.0], spec.r_polys[0], wvec)
    phi_vals = _phi_grid(grid, spec.c0n, k2)
    meta = dict(k=k2, kappa_exp=float(k2), rate=spec.nu_prime, beta=spec.beta, mu=spec.mu)
    forcing = _forcing_volterra(grid, k2, psi_k2_vals, eps_ratio(spec.cf, eps) / g2)
    return ConvolutionOperator(
        grid,
        k2,
        pm,
        volterra,
        (eps_ratio(spec.c12, eps) / (g2 * SQRT2PI), bil_self),
        (eps_ratio(spec.c0, eps) / (g2 * SQRT2PI), bil_fixed,
         RayInterp(grid.radii, phi_vals)),
        (eps_ratio(spec.c00, eps) / (g2 * SQRT2PI), spec.c0n[0].values,
         polyval_im(spec.r_polys[0], m) * wvec),
        forcing,
        meta,
    )


def build_k1_forcing_operator(fs, grid: RayGrid, eps, spec: ProblemSpec):
    """Level-k1 operator of the linear forcing problem (division by bold P_m).

    The top irregular term is algebraic at this level and sits inside
    bold P_m; only the correction terms and the lower rows remain as
    Volterra integrals.  The inhomogeneity is the Borel transform of the
    bold forcing data (entire, finitely many coefficients).
    """
    m = grid.m_nodes
    k1 = fs.k1
    dD = fs.delta[fs.big_d]
    g1 = math.gamma(1.0 + 1.0 / k1)
    rdv = polyval_im(fs.r_polys[fs.big_d], m)
    pm = p_m_on_grid(grid, fs.q_poly, fs.r_polys[fs.big_d], dD, k1)
    volterra = []
    for p, a_coef in expand_irregular(dD, k1).A.items():
        volterra.append(
            (rdv, a_coef * k1**p / math.gamma(float(dD - p)), float(dD - p), float(p))
        )
    for l in range(1, fs.big_d):
        rlv = polyval_im(fs.r_polys[l], m)
        epow = eps ** (fs.big_delta[l] - fs.d_low[l] + fs.delta[l] - 1)
        el = fs.d_l_k1(l) / k1
        dl = fs.delta[l]
        volterra.append((rlv, epow * k1**dl / math.gamma(el), el, float(dl)))
        for p, a_coef in expand_irregular(dl, k1).A.items():
            c = el + dl - p
            volterra.append((rlv, epow * a_coef * k1**p / math.gamma(c), c, float(p)))
    wvec = fs.c0n[0].trapezoid_weights()
    bil_fixed = BilinearTerm(grid, k1, [1.0], fs.r_polys[0], wvec)
    phi_vals = _phi_grid(grid, fs.c0n, k1)
    psi_bold = np.zeros((grid.radii.size, m.size), dtype=complex)
    pts = grid.points
    for n, g in enumerate(fs.f_data, start=1):
        psi_bold += np.outer(pts**n / math.gamma(n / k1), np.ones(m.size)) * g.values
    meta = dict(k=k1, kappa_exp=float(k1), rate=spec.nu, beta=spec.beta, mu=spec.mu)
    forcing = _forcing_volterra(grid, k1, psi_bold, eps_ratio(fs.cf, eps) / g1)
    return ConvolutionOperator(
        grid,
        k1,
        pm,
        volterra,
        None,
        (eps_ratio(fs.c0, eps) / (g1 * SQRT2PI), bil_fixed,
         RayInterp(grid.radii, phi_vals)),
        (eps_ratio(fs.c00, eps) / (g1 * SQRT2PI), fs.c0n[0].values,
         polyval_im(fs.r_polys[0], m) * wvec),
        forcing,
        meta,
    )
