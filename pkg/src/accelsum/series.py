"""Truncated formal power series and irregular differential operators.

Series live in ``T * E[[T]]``: the constant term is absent and the
coefficient list starts at power 1.  Coefficients are complex scalars or
:class:`~accelsum.coeffspace.CoeffGrid` samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coeffspace import CoeffGrid, emu_norm
from .errors import ConstraintError, InputError


def coeff_norm(c):
    if isinstance(c, CoeffGrid):
        return emu_norm(c)
    return abs(c)


def _czero(template):
    if isinstance(template, CoeffGrid):
        return template.with_values(np.zeros_like(template.values))
    return 0.0 + 0.0j


@dataclass
class TruncatedSeries:
    """Finite list of coefficients ``a_1 .. a_N`` of a series vanishing at 0."""

    coeffs: list
    variable: str = "T"

    def __post_init__(self):
        if len(self.coeffs) < 1:
            raise InputError("a truncated series needs at least one coefficient")
        self.coeffs = list(self.coeffs)

    @property
    def order(self):
        return len(self.coeffs)

    @property
    def grid_valued(self):
        return isinstance(self.coeffs[0], CoeffGrid)

    def coeff(self, n):
        """Coefficient of the n-th power (1-based); zero beyond the truncation."""
        if n < 1:
            raise InputError("powers start at 1")
        if n > len(self.coeffs):
            return _czero(self.coeffs[0])
        return self.coeffs[n - 1]

    def map_coeffs(self, fn):
        return TruncatedSeries([fn(n + 1, c) for n, c in enumerate(self.coeffs)], self.variable)

    def scaled(self, factor):
        if self.grid_valued:
            return self.map_coeffs(lambda n, c: c.with_values(factor * c.values))
        return self.map_coeffs(lambda n, c: factor * c)

    def truncated(self, order):
        return TruncatedSeries(self.coeffs[:order], self.variable)

    def norms(self):
        return np.array([coeff_norm(c) for c in self.coeffs])

    def eval_at(self, z):
        """Horner evaluation (scalar coefficients only)."""
        if self.grid_valued:
            raise ConstraintError("eval_at applies to scalar series")
        acc = 0.0 + 0.0j
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc * z

    def to_record(self):
        if self.grid_valued:
            cs = [c.to_record() for c in self.coeffs]
        else:
            cs = [[complex(c).real, complex(c).imag] for c in self.coeffs]
        return {"variable": self.variable, "grid_valued": self.grid_valued, "coeffs": cs}

    @classmethod
    def from_record(cls, rec):
        if rec["grid_valued"]:
            coeffs = [CoeffGrid.from_record(r) for r in rec["coeffs"]]
        else:
            coeffs = [complex(re, im) for re, im in rec["coeffs"]]
        return cls(coeffs, rec["variable"])


def _check_compatible(a, b):
    if a.variable != b.variable:
        raise ConstraintError("series live in different variables")
    if a.grid_valued != b.grid_valued:
        raise ConstraintError("incompatible coefficient spaces")


def series_add(a, b):
    _check_compatible(a, b)
    n = max(a.order, b.order)
    out = []
    for j in range(1, n + 1):
        ca, cb = a.coeff(j), b.coeff(j)
        if a.grid_valued:
            out.append(ca.with_values(ca.values + cb.values))
        else:
            out.append(ca + cb)
    return TruncatedSeries(out, a.variable)


def cauchy_product(a, b, mul=None, order=None):
    """Coefficients of the product series.

    ``mul`` is the coefficient multiplication (defaults to scalar product;
    pass a star-product closure for grid-valued series).  Without ``order``
    the full polynomial product of the two truncations is returned; when
    the inputs are truncations of longer series only coefficients up to
    ``min(a.order, b.order) + 1`` are those of the true product.
    """
    _check_compatible(a, b)
    if mul is None:
        if a.grid_valued:
            raise ConstraintError("grid-valued product needs an explicit mul")
        mul = lambda x, y: x * y
    top = a.order + b.order if order is None else order
    out = []
    for n in range(1, top + 1):
        acc = None
        for i in range(max(1, n - b.order), min(a.order, n - 1) + 1):
            term = mul(a.coeff(i), b.coeff(n - i))
            if acc is None:
                acc = term
            elif isinstance(acc, CoeffGrid):
                acc = acc.with_values(acc.values + term.values)
            else:
                acc = acc + term
        if acc is None:
            acc = _czero(a.coeffs[0]) if a.grid_valued else 0.0 + 0.0j
        out.append(acc)
    return TruncatedSeries(out, a.variable)


def irregular_apply(s, q1, q2):
    """Apply ``T^q1 d_T^q2``; the coefficient of ``T^(n+q1-q2)`` picks up
    the falling factorial ``n (n-1) ... (n-q2+1)``."""
    if not (q1 >= q2 >= 1):
        raise ConstraintError("need q1 >= q2 >= 1")
    shift = q1 - q2
    out = [None] * (s.order + shift)
    zero = _czero(s.coeffs[0])
    for j in range(len(out)):
        out[j] = zero
    for n in range(1, s.order + 1):
        fac = 1.0
        for i in range(q2):
            fac *= n - i
        target = n + shift
        c = s.coeff(n)
        if isinstance(c, CoeffGrid):
            out[target - 1] = c.with_values(fac * c.values)
        else:
            out[target - 1] = fac * c
    return TruncatedSeries(out, s.variable)


def falling_factorial(n, j):
    fac = 1.0
    for i in range(j):
        fac *= n - i
    return fac


def rising_by_k(n, p, k):
    """Product (n)(n+k)(n+2k)...(n+(p-1)k): action of (T^{k+1} d_T)^p on t^n."""
    fac = 1.0
    for j in range(p):
        fac *= n + j * k
    return fac


@dataclass
class IrregularOpExpansion:
    """Correction coefficients turning ``T^{d(k+1)} d_T^d`` into powers of
    the basic irregular operator ``T^{k+1} d_T``."""

    delta: int
    k: int
    A: dict = field(default_factory=dict)

    def monomial_residual(self, n):
        lhs = falling_factorial(n, self.delta)
        rhs = rising_by_k(n, self.delta, self.k)
        for p, a in self.A.items():
            rhs += a * rising_by_k(n, p, self.k)
        return lhs - rhs


def expand_irregular(delta, k):
    """Determine the expansion coefficients by matching monomial actions.

    Both sides act on ``t^n`` as degree-``delta`` polynomials in ``n`` with
    no constant term, so matching at ``delta - 1`` distinct positive ``n``
    pins the ``delta - 1`` unknowns.
    """
    if delta < 1 or k < 1:
        raise ConstraintError("need delta >= 1 and k >= 1")
    if delta == 1:
        return IrregularOpExpansion(delta, k, {})
    ns = np.arange(1, delta)
    mat = np.zeros((delta - 1, delta - 1))
    rhs = np.zeros(delta - 1)
    for i, n in enumerate(ns):
        for p in range(1, delta):
            mat[i, p - 1] = rising_by_k(n, p, k)
        rhs[i] = falling_factorial(n, delta) - rising_by_k(n, delta, k)
    try:
        sol = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - guarded impossible case
        raise ConstraintError("monomial matching system is singular") from exc
    exp = IrregularOpExpansion(delta, k, {p: float(sol[p - 1]) for p in range(1, delta)})
    for n in range(1, 3 * delta + 1):
        if abs(exp.monomial_residual(n)) > 1e-9 * max(1.0, falling_factorial(n, delta)):
            raise ConstraintError("expansion fails to reproduce monomial action")
    return exp


def gevrey_fit(s, min_points=6):
    """Estimate the Gevrey order from coefficient growth.

    Fits ``log ||a_n|| ~ sigma * n log n + b * n + c`` over the upper half
    of the index range and returns ``sigma``; the geometric regressor ``n``
    must be present or the ``M^n`` prefactor of the growth class would leak
    into the slope.
    """
    if s.order < 12:
        raise ConstraintError("need at least 12 coefficients")
    norms = s.norms()
    if np.any(norms[4:] == 0.0):
        raise ConstraintError("coefficients must be nonzero beyond index 4")
    n0 = s.order // 2
    ns = np.arange(n0, s.order + 1, dtype=float)
    ys = np.log(norms[n0 - 1 :])
    if ns.size < min_points:
        raise ConstraintError("too few usable points for a Gevrey fit")
    design = np.column_stack([ns * np.log(ns), ns, np.ones_like(ns)])
    sol, *_ = np.linalg.lstsq(design, ys, rcond=None)
    return float(sol[0])


def geometric_scalar_series(ratio, order, variable="T"):
    return TruncatedSeries([ratio**n for n in range(1, order + 1)], variable)


def euler_series(order):
    """Coefficients a_{n+1} = (-1)^n n! of the classical level-1 divergent series."""
    cs = []
    for n in range(1, order + 1):
        cs.append(complex((-1) ** (n - 1) * math.factorial(n - 1)))
    return TruncatedSeries(cs, "T")
