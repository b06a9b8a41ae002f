"""Discrete model of the weighted coefficient space on the Fourier line.

Elements are samples of continuous functions ``h(m)`` on a uniform grid
symmetric about ``m = 0``, normed by

    sup_m (1 + |m|)^mu * exp(beta |m|) * |h(m)|.

The grid extent is chosen so that the weighted tail is negligible, which
keeps truncated convolutions under control.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ._kernels import conv_center
from .errors import ConstraintError, InputError, PoleError, StripError

TAIL_TOL = 1e-10


def polyval_im(coeffs, m):
    """Evaluate P(i*m) by Horner's scheme, ``coeffs`` in ascending degree."""
    x = 1j * np.asarray(m)
    acc = np.zeros_like(x, dtype=np.complex128)
    for c in reversed(list(coeffs)):
        acc = acc * x + c
    return acc


def poly_degree(coeffs):
    """Degree ignoring trailing (numerically) zero coefficients."""
    deg = -1
    for k, c in enumerate(coeffs):
        if abs(c) > 0.0:
            deg = k
    return deg


@dataclass(frozen=True)
class WeightParams:
    """Exponential rate ``beta`` and polynomial exponent ``mu`` of the norm weight."""

    beta: float
    mu: float

    def __post_init__(self):
        if not (self.beta > 0.0):
            raise ConstraintError("beta must be positive")
        if not (self.mu > 0.0):
            raise ConstraintError("mu must be positive")

    def require_convolution(self):
        if not (self.mu > 1.0):
            raise ConstraintError("mu > 1 is required before forming convolutions")


def weighted_tail(beta, mu, m_max):
    return math.exp(-beta * m_max) * (1.0 + m_max) ** (-mu)


def pick_m_max(beta, mu, tol=TAIL_TOL):
    """Smallest half-integer extent whose weighted tail is below ``tol``."""
    m = 1.0
    while weighted_tail(beta, mu, m) > tol:
        m += 0.5
        if m > 1e4:
            raise ConstraintError("cannot satisfy tail tolerance; beta too small")
    return m


def make_m_grid(m_max, count):
    if count % 2 == 0:
        raise ConstraintError("m-grid needs an odd node count (center at 0)")
    return np.linspace(-m_max, m_max, count)


@dataclass
class CoeffGrid:
    """Sampled coefficient function with its weight parameters.

    ``m_nodes`` must be uniform and symmetric about 0 with an odd number of
    nodes so that shifted samples in convolutions land back on the grid.
    """

    m_nodes: np.ndarray
    values: np.ndarray
    weights: WeightParams

    def __post_init__(self):
        self.m_nodes = np.asarray(self.m_nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.m_nodes.ndim != 1 or self.values.shape != self.m_nodes.shape:
            raise InputError("m_nodes and values must be matching 1-d arrays")
        if self.m_nodes.size % 2 == 0 or self.m_nodes.size < 3:
            raise InputError("grid needs an odd number (>= 3) of nodes")
        if not np.allclose(self.m_nodes, -self.m_nodes[::-1], atol=1e-12):
            raise InputError("grid must be symmetric about 0")
        steps = np.diff(self.m_nodes)
        if not np.allclose(steps, steps[0], rtol=1e-10):
            raise InputError("grid must be uniform")
        if not np.all(np.isfinite(self.values.view(float))):
            raise InputError("non-finite sample values")

    @property
    def spacing(self):
        return float(self.m_nodes[1] - self.m_nodes[0])

    @property
    def m_max(self):
        return float(self.m_nodes[-1])

    def tail_estimate(self):
        return weighted_tail(self.weights.beta, self.weights.mu, self.m_max)

    def trapezoid_weights(self):
        w = np.full(self.m_nodes.size, self.spacing)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    def with_values(self, values):
        return CoeffGrid(self.m_nodes, values, self.weights)

    @classmethod
    def from_function(cls, fn, weights, m_max=None, count=241):
        if m_max is None:
            m_max = pick_m_max(weights.beta, weights.mu)
        nodes = make_m_grid(m_max, count)
        return cls(nodes, np.asarray(fn(nodes), dtype=np.complex128), weights)

    def same_grid(self, other):
        return (
            self.m_nodes.size == other.m_nodes.size
            and np.allclose(self.m_nodes, other.m_nodes, atol=1e-12)
        )

    def to_record(self):
        return {
            "beta": self.weights.beta,
            "mu": self.weights.mu,
            "m_nodes": self.m_nodes.tolist(),
            "values_re": self.values.real.tolist(),
            "values_im": self.values.imag.tolist(),
        }

    def to_json(self):
        return json.dumps(self.to_record())

    @classmethod
    def from_record(cls, rec):
        values = np.asarray(rec["values_re"], dtype=float) + 1j * np.asarray(
            rec["values_im"], dtype=float
        )
        return cls(
            np.asarray(rec["m_nodes"], dtype=float),
            values,
            WeightParams(rec["beta"], rec["mu"]),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_record(json.loads(text))


def emu_norm(f: CoeffGrid) -> float:
    """Weighted sup-norm over the grid nodes."""
    if not np.all(np.isfinite(f.values.view(float))):
        raise InputError("non-finite sample values")
    m = np.abs(f.m_nodes)
    weight = (1.0 + m) ** f.weights.mu * np.exp(f.weights.beta * m)
    return float(np.max(weight * np.abs(f.values)))


def _check_star_preconditions(f, g, q1, q2, r):
    if not f.same_grid(g):
        raise InputError("operands must share the m-grid")
    dr, d1, d2 = poly_degree(r), poly_degree(q1), poly_degree(q2)
    if dr < d1 or dr < d2:
        raise ConstraintError("deg(R) must dominate deg(Q1) and deg(Q2)")
    mu = f.weights.mu
    if not (mu > max(d1, d2) + 1):
        raise ConstraintError("mu must exceed max(deg Q1, deg Q2) + 1")
    r_im = polyval_im(r, f.m_nodes)
    if np.min(np.abs(r_im)) == 0.0:
        raise PoleError("R(im) vanishes at a grid node")
    return r_im


def star_product(f: CoeffGrid, g: CoeffGrid, q1, q2, r) -> CoeffGrid:
    """Weighted convolution product making the coefficient space an algebra.

    Returns samples of

        (1 / R(im)) * integral Q1(i(m - m1)) f(m - m1) Q2(i m1) g(m1) dm1

    by composite trapezoid quadrature on the shared grid; shifted samples
    outside the grid extent are treated as zero (their weighted size is
    below the tail tolerance by construction).
    """
    r_im = _check_star_preconditions(f, g, q1, q2, r)
    fa = polyval_im(q1, f.m_nodes) * f.values
    ga = polyval_im(q2, g.m_nodes) * g.values * g.trapezoid_weights()
    return f.with_values(conv_center(fa, ga) / r_im)


def convolve(f: CoeffGrid, g: CoeffGrid) -> CoeffGrid:
    """Classical convolution product; needs mu > 1."""
    if not f.same_grid(g):
        raise InputError("operands must share the m-grid")
    f.weights.require_convolution()
    ga = g.values * g.trapezoid_weights()
    return f.with_values(conv_center(f.values, ga))


def inverse_fourier(f: CoeffGrid, z_nodes):
    """Inverse Fourier transform samples on points of the strip |Im z| < beta."""
    z = np.atleast_1d(np.asarray(z_nodes, dtype=np.complex128))
    if np.any(np.abs(z.imag) >= f.weights.beta):
        raise StripError("evaluation point outside the strip |Im z| < beta")
    w = f.trapezoid_weights()
    phases = np.exp(1j * np.outer(z, f.m_nodes))
    out = phases @ (w * f.values) / math.sqrt(2.0 * math.pi)
    if np.isscalar(z_nodes) or np.asarray(z_nodes).ndim == 0:
        return complex(out[0])
    return out


def unit_profile(weights):
    """Profile with emu_norm exactly 1 (sup attained at m = 0)."""

    def fn(m):
        am = np.abs(m)
        return np.exp(-weights.beta * am) * (1.0 + am) ** (-weights.mu)

    return fn


def smooth_profile(weights):
    """Analytic-in-a-strip profile with the same asymptotic decay.

    Useful where trapezoid superconvergence matters (Fourier identities,
    PDE residual checks); the kink-free surrogate of ``unit_profile``.
    """

    def fn(m):
        s = np.sqrt(1.0 + m * m)
        return np.exp(weights.beta * (1.0 - s)) * (1.0 + m * m) ** (-weights.mu / 2.0)

    return fn
