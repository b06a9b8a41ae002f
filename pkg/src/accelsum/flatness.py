"""Exponentially small differences of neighboring sectorial solutions.

The two-level theory controls differences of neighboring solutions by
an exact contour split: Laplace tails from the acceleration radius,
connecting arcs, and (for disjoint acceleration sectors) a mid-segment
carrying the difference of the two accelerations, itself split against
the common disc germ.  All pieces are exact integrals of the
construction, evaluated here in scaled (mantissa, log-scale) arithmetic
so their exponential sizes stay meaningful thousands of e-folds below
the double-precision floor.

What the dichotomy experiment measures is the ENVELOPE of the split
(log-max over the pieces): the decay rates of that envelope are the
theorem's bound rates - order k2 from the Laplace factor at the split
radius when the acceleration sectors overlap, order k1 from the
kernel-decay/Laplace saddle of the mid-segment when they are disjoint.
The arithmetically exact difference can cancel far below the envelope
(for the shipped fixture it is governed by Borel-plane singularities
with exponents outside any floating-point range); direct subtraction of
two independently computed solutions only resolves their common
quadrature noise floor, so the piece integrals are validated separately
against direct quadrature at benign parameters.

Piece inventory for a neighboring pair (a, b):
  * overlapping acceleration sectors: tails along both Laplace rays
    from the split radius plus one connecting arc of the common
    continuation (second-level rate).
  * disjoint acceleration sectors: the same tails, two arcs toward the
    common mid direction, and the mid-segment of the acceleration
    difference = kernel tails along the two acceleration rays + kernel
    arc over the disc germ (first-level rate via the saddle).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.laguerre import laggauss

from .cauchy import ProblemSpec, solve_recursion_U
from .errors import GeometryError
from .picard import RayInterp
from .pipeline import AccelBundle, accelerate_on_points, solve_direction, u_of_t_z
from .transforms import formal_borel

LAG_N = 48


@dataclass
class Scaled:
    """Vector over the m-grid with a separate real log-scale."""

    mant: np.ndarray
    log_scale: float

    def log_max(self):
        mx = float(np.max(np.abs(self.mant)))
        return self.log_scale + (math.log(mx) if mx > 0 else -math.inf)


def combine_scaled(terms):
    """Sum of (sign, Scaled) pairs as one Scaled vector."""
    finite = [t for _, t in terms
              if t.log_scale > -math.inf and np.any(t.mant != 0.0)]
    if not finite:
        return Scaled(np.zeros_like(terms[0][1].mant), -math.inf)
    top = max(t.log_scale for t in finite)
    total = np.zeros_like(finite[0].mant)
    for sign, t in terms:
        if t.log_scale == -math.inf:
            continue
        total = total + sign * t.mant * math.exp(min(t.log_scale - top, 0.0))
    return Scaled(total, top)


def scaled_fourier(spec: ProblemSpec, sv: Scaled, z, k2):
    """(log |Delta|, phase) after the Fourier synthesis in z."""
    w = spec.c0n[0].trapezoid_weights()
    val = complex(
        np.sum(w * sv.mant * np.exp(1j * z * spec.m_nodes))
        * k2 / math.sqrt(2.0 * math.pi)
    )
    if val == 0.0 or sv.log_scale == -math.inf:
        return -math.inf, 0.0
    return sv.log_scale + math.log(abs(val)), cmath.phase(val)


def _angdiff(a, b):
    return (a - b + math.pi) % (2.0 * math.pi) - math.pi


# ---------------------------------------------------------------------------
# scaled integral pieces


def laplace_tail(interp: RayInterp, gamma, r0, k, eps_t, n_lag=LAG_N):
    """integral_{r0}^inf w(r e^{i gamma}) e^{-(r e^{i gamma}/(eps t))^k} dr/r."""
    c = (cmath.exp(1j * gamma) / eps_t) ** k
    if c.real <= 0.0:
        raise GeometryError("tail ray not decaying for this eps*t")
    x0 = r0**k
    t, wl = laggauss(n_lag)
    s = t / c.real
    x = x0 + s
    vals = interp(x ** (1.0 / k))
    osc = np.exp(-1j * c.imag * s)
    mant = np.tensordot(wl * osc / (k * x * c.real), vals, axes=(0, 0))
    return Scaled(mant * cmath.exp(-1j * c.imag * x0), -c.real * x0)


def arc_legs(f_eval, r_arc, th_a, th_b, w_big, alpha, kpow, kcorr=None,
             n_lag=LAG_N):
    """Arc integral of f(h) K(h) dh/h from th_a to th_b at radius r_arc.

    The kernel K has exponent ``-w_big e^{i kpow (theta - alpha)}``; in
    the exponent variable z the arc deforms into two rays of constant
    imaginary part (endpoint-dominated), each handled by Gauss-Laguerre.
    ``kcorr(h, z)`` supplies exp(log K(h) + z) when K is not exactly
    e^{-z} (the acceleration kernel has a slowly varying prefactor).
    """
    t, wl = laggauss(n_lag)

    def leg(theta):
        z0 = w_big * cmath.exp(1j * kpow * (theta - alpha))
        if z0.real <= 0.0:
            raise GeometryError("arc endpoint does not decay")
        z = z0 + t
        h = r_arc * cmath.exp(1j * alpha) * (z / w_big) ** (1.0 / kpow)
        fv = f_eval(h)
        corr = kcorr(h, z) if kcorr is not None else np.ones_like(z)
        mant = np.tensordot(wl * corr / (kpow * z), fv, axes=(0, 0))
        return Scaled(mant * cmath.exp(-1j * z0.imag), -z0.real)

    return combine_scaled([(1.0, leg(th_a)), (-1.0, leg(th_b))])


def kernel_tail(interp: RayInterp, gamma1, klog, u, nu_rate, r0, n_lag=24):
    """integral_{r0}^inf w(h e^{i gamma1}) G(u, h e^{i gamma1}) dh/h, scaled.

    Substituted by x = h^kappa, with the Laguerre rate combining the
    kernel saddle exponent against the declared growth of w.
    """
    plan = klog.plan
    kappa = plan.kappa
    darg = _angdiff(cmath.phase(u), gamma1)
    a_rate = plan.saddle_constant * math.cos(kappa * darg) / abs(u) ** kappa - nu_rate
    if a_rate <= 0.0:
        raise GeometryError("kernel tail does not decay at this u")
    x0 = r0**kappa
    t, wl = laggauss(n_lag)
    x = x0 + t / a_rate
    h = x ** (1.0 / kappa)
    e_g = cmath.exp(1j * gamma1)
    logg = klog.log_kernel_array(u / (h * e_g))
    base = float(logg.real[0])
    vals = interp(h)
    expo = logg - base + (x - x0) * a_rate
    weights = wl * np.exp(expo) / (kappa * x * a_rate)
    mant = np.tensordot(weights, vals, axes=(0, 0))
    return Scaled(mant, base)


class GermSeries:
    """Truncated Borel series of the recursion: the common disc germ."""

    def __init__(self, spec: ProblemSpec, eps, order=45, level=1):
        series = formal_borel(solve_recursion_U(spec, order, eps), level)
        self.coeffs = np.array([c.values for c in series.coeffs])  # (N, M)
        self.order = order

    def __call__(self, taus):
        taus = np.atleast_1d(np.asarray(taus, dtype=complex))
        powers = taus[:, None] ** np.arange(1, self.order + 1)[None, :]
        return powers @ self.coeffs  # (n, M)


def acc_difference(sol_a, sol_b, germ: GermSeries, klog, spec, u_points):
    """Difference of the two accelerations at segment points, scaled.

    Exact three-piece split: kernel-weighted tails along the two
    acceleration rays plus the kernel arc over the common disc germ at
    half the germ-disc radius.
    """
    rho_half = spec.rho / 2.0
    plan = klog.plan
    kappa = plan.kappa
    ia = sol_a.omega_k1.interp()
    ib = sol_b.omega_k1.interp()
    out = []
    for u in np.atleast_1d(u_points):
        u = complex(u)
        tail_b = kernel_tail(ib, sol_b.gamma1, klog, u, spec.nu, rho_half)
        tail_a = kernel_tail(ia, sol_a.gamma1, klog, u, spec.nu, rho_half)
        w_big = plan.saddle_constant * (rho_half / abs(u)) ** kappa

        def kcorr(h, z, u=u):
            lg = klog.log_kernel_array(u / h)
            return np.exp(lg + z)  # slowly varying kernel prefactor

        arc = arc_legs(
            germ, rho_half, sol_a.gamma1, sol_b.gamma1,
            w_big, cmath.phase(u), kappa, kcorr=kcorr, n_lag=24,
        )
        pieces = [(1.0, tail_b), (-1.0, tail_a), (1.0, arc)]
        out.append(
            (combine_scaled(pieces), max(t.log_max() for _, t in pieces))
        )
    return out


# ---------------------------------------------------------------------------
# the difference of two neighboring solutions


def split_radius(spec: ProblemSpec, bundle: AccelBundle):
    """Half the radius of the sector where both accelerations converge."""
    c2 = bundle.plan.c2 if bundle.plan.c2 else bundle.plan.saddle_constant
    return 0.5 * 0.5 * (c2 / spec.nu) ** (1.0 / bundle.plan.kappa)


def _acc_evaluator(spec, sol, bundle):
    interp = sol.omega_k1.interp()

    def f_eval(h_points):
        return accelerate_on_points(
            interp, sol.gamma1, bundle, h_points, growth_rate=spec.nu
        )

    return f_eval


def delta_overlap(spec: ProblemSpec, sol_a, sol_b, bundle, t, z, split_r0=None):
    """Split of u_b - u_a for a pair with overlapping acceleration sectors.

    Tails along both Laplace rays plus the connecting arc of the common
    continuation (evaluated through the acceleration integral of the
    shared first-level data).  Returns a dict with the envelope
    log-magnitude (the stable, theorem-rate quantity), the signed-sum
    log-magnitude and the per-piece log scales.
    """
    eps_t = sol_a.eps * t
    r0 = split_r0 if split_r0 is not None else split_radius(spec, bundle)
    k2 = spec.k2
    i1 = laplace_tail(sol_b.omega_k2.interp(), sol_b.gamma, r0, k2, eps_t)
    i2 = laplace_tail(sol_a.omega_k2.interp(), sol_a.gamma, r0, k2, eps_t)
    w_big = (r0 / abs(eps_t)) ** k2
    alpha = cmath.phase(eps_t)
    i3 = arc_legs(_acc_evaluator(spec, sol_a, bundle), r0,
                  sol_a.gamma, sol_b.gamma, w_big, alpha, k2)
    pieces = [(1.0, i1), (-1.0, i2), (1.0, i3)]
    total = combine_scaled(pieces)
    log_sum, phase = scaled_fourier(spec, total, z, k2)
    piece_logs = [_piece_fourier_log(spec, p, k2) for _, p in pieces]
    return {
        "log_envelope": max(piece_logs),
        "log_sum": log_sum,
        "phase": phase,
        "pieces": piece_logs,
    }


def _piece_fourier_log(spec, piece: Scaled, k2):
    """Envelope magnitude of one piece after the Fourier weights."""
    w = spec.c0n[0].trapezoid_weights()
    val = float(np.sum(w * np.abs(piece.mant))) * k2 / math.sqrt(2.0 * math.pi)
    if val == 0.0 or piece.log_scale == -math.inf:
        return -math.inf
    return piece.log_scale + math.log(val)


def delta_disjoint(spec: ProblemSpec, sol_a, sol_b, bundle, klog, germ,
                   t, z, theta_mid, n_seg=900, split_r0=None):
    """log |u_b - u_a| for a pair with disjoint acceleration sectors.

    The mid-segment piece carries the difference of the accelerations,
    whose own exponential smallness in 1/|u| competes against the
    Laplace factor: the emergent decay order in eps is the first level.
    """
    eps_t = sol_a.eps * t
    r0 = split_r0 if split_r0 is not None else split_radius(spec, bundle)
    k2 = spec.k2
    j1 = laplace_tail(sol_b.omega_k2.interp(), sol_b.gamma, r0, k2, eps_t)
    j2 = laplace_tail(sol_a.omega_k2.interp(), sol_a.gamma, r0, k2, eps_t)
    w_big = (r0 / abs(eps_t)) ** k2
    alpha = cmath.phase(eps_t)
    j3 = arc_legs(_acc_evaluator(spec, sol_b, bundle), r0,
                  theta_mid, sol_b.gamma, w_big, alpha, k2)
    j4 = arc_legs(_acc_evaluator(spec, sol_a, bundle), r0,
                  theta_mid, sol_a.gamma, w_big, alpha, k2)
    # mid-segment: log-radial grid, log-sum-exp assembly
    c_lap = (cmath.exp(1j * theta_mid) / eps_t) ** k2
    sig = np.geomspace(r0 * 1e-3, r0, n_seg)
    u_pts = sig * cmath.exp(1j * theta_mid)
    diffs = acc_difference(sol_a, sol_b, germ, klog, spec, u_pts)
    dlog = np.log(sig)
    wlog = np.gradient(dlog)
    scales = np.array([d.log_scale - c_lap.real * s**k2
                       for (d, _), s in zip(diffs, sig)])
    top = float(np.max(scales))
    mant = np.zeros_like(diffs[0][0].mant)
    for (d, _), s, w, sc in zip(diffs, sig, wlog, scales):
        mant = mant + w * d.mant * cmath.exp(
            complex(sc - top, -c_lap.imag * s**k2)
        )
    j5 = Scaled(mant, top)
    # envelope of the segment piece: the log-sum-exp of the per-node
    # acceleration-difference envelopes against the Laplace decay
    env_vals = [
        env + math.log(max(w, 1e-300)) - c_lap.real * s**k2
        for (_, env), s, w in zip(diffs, sig, wlog)
    ]
    j5_env = _logsumexp(env_vals) + math.log(k2 / math.sqrt(2.0 * math.pi)) \
        + _m_weight_log(spec)
    pieces = [(1.0, j1), (-1.0, j2), (1.0, j3), (-1.0, j4), (1.0, j5)]
    total = combine_scaled(pieces)
    log_sum, phase = scaled_fourier(spec, total, z, k2)
    piece_logs = [_piece_fourier_log(spec, p, k2) for _, p in pieces[:4]]
    piece_logs.append(j5_env)
    return {
        "log_envelope": max(piece_logs),
        "log_sum": log_sum,
        "phase": phase,
        "pieces": piece_logs,
    }


def _logsumexp(vals):
    top = max(vals)
    if top == -math.inf:
        return -math.inf
    return top + math.log(sum(math.exp(min(v - top, 0.0)) for v in vals))


def _m_weight_log(spec):
    w = spec.c0n[0].trapezoid_weights()
    return math.log(float(np.sum(w)))


# ---------------------------------------------------------------------------
# fixture pair experiments


@dataclass
class PairGeometry:
    kind: str            # "overlap" or "disjoint"
    gamma_a: float
    gamma_b: float
    gamma1_a: float
    gamma1_b: float
    theta_mid: float
    eps_arg: float


def fixture_pair(p, directions=None, lean=0.22):
    """Ray geometry of the fixture pair (p, p+1)."""
    if directions is None:
        directions = [0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi]
    d_a = directions[p]
    d_b = directions[(p + 1) % 4]
    if p == 3:
        d_b += 2.0 * math.pi
    mid = 0.5 * (d_a + d_b)
    if p == 0:
        g1a = g1b = mid  # shared ray inside the overlapping sectors
        kind = "overlap"
    elif p == 2:
        g1a, g1b = d_a + 0.35, d_b - 0.35
        kind = "disjoint"
    else:
        g1a, g1b = d_a + 0.35, d_b - 0.35
        kind = "partial"
    return PairGeometry(kind, d_a + lean, d_b - lean, g1a, g1b, mid, mid)


def pair_delta_curve(spec: ProblemSpec, pair: PairGeometry, bundle, klog,
                     t, z, eps_abs_list, solver_kwargs=None):
    """log |Delta(eps)| along the overlap bisector for one pair."""
    solver_kwargs = solver_kwargs or {}
    out = []
    for ea in eps_abs_list:
        eps = ea * cmath.exp(1j * pair.eps_arg)
        sol_a = solve_direction(spec, eps, pair.gamma_a, pair.gamma1_a,
                                bundle, **solver_kwargs)
        sol_b = solve_direction(spec, eps, pair.gamma_b, pair.gamma1_b,
                                bundle, **solver_kwargs)
        if pair.kind == "overlap":
            rec = delta_overlap(spec, sol_a, sol_b, bundle, t, z)
        elif pair.kind == "disjoint":
            germ = GermSeries(spec, eps)
            rec = delta_disjoint(
                spec, sol_a, sol_b, bundle, klog, germ, t, z, pair.theta_mid
            )
        else:
            raise GeometryError("pair takes no part in the dichotomy")
        out.append(rec["log_envelope"])
    return np.asarray(out)


def delta_naive(spec: ProblemSpec, pair: PairGeometry, bundle, t, z, eps_abs,
                solver_kwargs=None):
    """Direct subtraction of the two solutions (valid at large eps only)."""
    solver_kwargs = solver_kwargs or {}
    eps = eps_abs * cmath.exp(1j * pair.eps_arg)
    sol_a = solve_direction(spec, eps, pair.gamma_a, pair.gamma1_a, bundle,
                            **solver_kwargs)
    sol_b = solve_direction(spec, eps, pair.gamma_b, pair.gamma1_b, bundle,
                            **solver_kwargs)
    return u_of_t_z(spec, sol_b, t, z) - u_of_t_z(spec, sol_a, t, z)
