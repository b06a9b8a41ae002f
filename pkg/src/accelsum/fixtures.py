"""Shipped desk-scale problem: two levels (1, 2), four parameter sectors.

Geometry highlights: the Borel-plane roots of the main problem sit on
the rays at 45 and 225 degrees with moduli >= 1.58, and the single root
of the forcing problem sits at 2 e^{i 5 pi / 4}; the four Laplace
directions at multiples of pi/2 keep a 45-degree margin from all of
them.  The acceleration sectors of the first pair overlap across the
whole first quadrant (second-level flatness), those of the third pair
are disjoint (first-level flatness); the remaining pairs overlap only
partially and take no part in the dichotomy experiment.
"""

from __future__ import annotations

import math

import numpy as np

from .cauchy import ForcingSpec, ProblemSpec
from .coeffspace import CoeffGrid, WeightParams, make_m_grid, smooth_profile
from .geometry import GoodCovering, Sector, SectorPlan

BETA = 1.0
MU = 2.5
M_MAX = 18.0

FINE_M_COUNT = 145
COARSE_M_COUNT = 61


def _grids(count):
    w = WeightParams(BETA, MU)
    nodes = make_m_grid(M_MAX, count)
    prof = smooth_profile(w)(nodes)
    return w, nodes, prof


def make_forcing(count=FINE_M_COUNT):
    w, nodes, prof = _grids(count)

    def cg(scale):
        return CoeffGrid(nodes, scale * prof, w)

    phase = np.exp(1j * 5.0 * math.pi / 4.0)
    return ForcingSpec(
        q_poly=[4.0 * phase, 0.0, -1.0 * phase],   # 2 e^{i 5pi/4} (2 - X^2/2)
        r_polys=[[1.0], [1.0, 0.0, -0.25], [2.0, 0.0, -0.5]],
        big_d=2,
        delta={1: 1, 2: 2},
        d_low={1: 2, 2: 2},
        big_delta={1: 2, 2: 1},
        c0=[0.0, 0.1],
        c00=[0.0, 0.1],
        cf=[0.0, 1.0],
        c0n=[cg(0.1), cg(0.2), cg(0.1)],
        f_data=[cg(1.0), cg(0.3)],
        k0_const=10.0,
        t0_const=2.0,
        k1=1,
    )


def make_spec(count=FINE_M_COUNT):
    w, nodes, prof = _grids(count)

    def cg(scale):
        return CoeffGrid(nodes, scale * prof, w)

    return ProblemSpec(
        q_poly=[10.0j, 0.0, -5.0j],                # 5i (2 - X^2)
        q1_poly=[0.0, 1.0],
        q2_poly=[0.0, 1.0],
        r_polys=[[1.0], [1.0, 0.0, -0.25], [2.0, 0.0, -0.5]],
        big_d=2,
        k1=1,
        k2=2,
        delta={1: 1, 2: 2},
        d_low={1: 2},
        big_delta={1: 2},
        c12=[0.0, 0.1],
        c0=[0.0, 0.1],
        c00=[0.0, 0.1],
        cf=[0.0, 1.0],
        c0n=[cg(0.1), cg(0.2), cg(0.1)],
        f_data=None,
        forcing=make_forcing(count),
        eps0=0.1,
        r_t=0.12,
        rho=0.4,
        nu=2.0,
        nu_prime=2.0,
        k0_const=2.0,
        t0_const=2.0,
        beta=BETA,
        mu=MU,
    )


def make_plan():
    """Hand-built sector plan realizing both flatness regimes."""
    kappa = 2.0
    gap = math.pi / 2.0
    aperture = math.pi / 2.0 + 0.3927
    covering = GoodCovering(
        [Sector(p * gap, aperture, 0.1) for p in range(4)], 0.1
    )
    directions = [0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi]
    s_sectors = [Sector(d, 0.5) for d in directions]
    u_sectors = [
        Sector(0.0, math.pi + 0.3),
        Sector(0.5 * math.pi, math.pi + 0.3),
        Sector(math.pi, 0.8),
        Sector(1.5 * math.pi, 0.8),
    ]
    b_sectors = [Sector(d, math.pi / kappa + 0.12, 0.19) for d in directions]
    return SectorPlan(
        covering,
        directions,
        s_sectors,
        u_sectors,
        b_sectors,
        rho=0.4,
        theta=math.pi / 2.0 + 0.5,
        constants={},
    )


def t_sector():
    return Sector(0.0, 0.04, 0.12)
