"""Sector geometry: good coverings, root loci and admissibility constants.

The Borel-plane polynomial ``P_m(tau) = Q(im) k2 - R_D(im) k2^dD tau^((dD-1)k2)``
has roots laid out by an explicit modulus-argument formula; Laplace rays
must keep a uniform distance from them.  The constants measured here
(M1, M2, C_P) are grid minima over sampled sectors, not proven bounds,
and every report carries the grid resolution used.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .coeffspace import polyval_im
from .errors import GeometryError, PoleError


def wrap_angle(a):
    return (a + math.pi) % (2.0 * math.pi) - math.pi


@dataclass(frozen=True)
class Sector:
    """Open sector at the origin; ``radius=None`` means unbounded."""

    direction: float
    aperture: float
    radius: float = None

    def __post_init__(self):
        if not (0.0 < self.aperture < 2.0 * math.pi):
            raise GeometryError("aperture must lie in (0, 2 pi)")

    def contains_angle(self, theta):
        return abs(wrap_angle(theta - self.direction)) < self.aperture / 2.0

    def contains(self, z):
        z = complex(z)
        if z == 0:
            return False
        if self.radius is not None and abs(z) >= self.radius:
            return False
        return self.contains_angle(np.angle(z))

    def edge_angles(self):
        return (self.direction - self.aperture / 2.0, self.direction + self.aperture / 2.0)

    def to_record(self):
        return {"direction": self.direction, "aperture": self.aperture, "radius": self.radius}


@dataclass
class GoodCovering:
    """Consecutively overlapping sectors covering a punctured neighborhood."""

    sectors: list
    eps0: float

    def validate(self, n_angles=10_000):
        angles = np.linspace(-math.pi, math.pi, n_angles, endpoint=False)
        counts = np.zeros(n_angles, dtype=int)
        for s in self.sectors:
            counts += np.array([s.contains_angle(a) for a in angles])
        problems = []
        if np.any(counts == 0):
            problems.append("union does not cover the punctured disc")
        if np.any(counts > 2):
            problems.append("some angle lies in three sectors")
        n = len(self.sectors)
        for p in range(n):
            a, b = self.sectors[p], self.sectors[(p + 1) % n]
            gap = abs(wrap_angle(b.direction - a.direction))
            if gap >= (a.aperture + b.aperture) / 2.0:
                problems.append(f"sectors {p} and {(p + 1) % n} do not overlap")
        return {"ok": not problems, "problems": problems, "n_angles": n_angles}

    def overlap_bisector(self, p):
        a = self.sectors[p]
        b = self.sectors[(p + 1) % len(self.sectors)]
        return a.direction + 0.5 * wrap_angle(b.direction - a.direction)


def build_good_covering(varsigma, k2, eps0):
    """Evenly rotated sectors with the smallest workable overlap margin."""
    if varsigma < 2:
        raise GeometryError("a good covering needs at least two sectors")
    gap = 2.0 * math.pi / varsigma
    lo = max(gap - math.pi / k2, 0.0)
    hi = 2.0 * gap - math.pi / k2
    if hi <= lo or math.pi / k2 + lo >= 2.0 * math.pi:
        raise GeometryError("no aperture window between overlap and triple overlap")
    kappa_p = lo + 0.25 * (hi - lo)
    aperture = math.pi / k2 + kappa_p
    sectors = [Sector(p * gap, aperture, eps0) for p in range(varsigma)]
    cov = GoodCovering(sectors, eps0)
    report = cov.validate()
    if not report["ok"]:
        raise GeometryError("; ".join(report["problems"]))
    return cov


def roots_q(m, q_poly, rd_poly, delta_d, k2):
    """All ``(delta_d - 1) k2`` roots of P_m via the modulus-argument formula."""
    n_roots = (delta_d - 1) * k2
    qv = complex(polyval_im(q_poly, m))
    rv = complex(polyval_im(rd_poly, m))
    if qv == 0 or rv == 0:
        raise PoleError("Q(im) and R_D(im) must not vanish")
    if n_roots == 0:
        return np.zeros(0, dtype=complex)
    ratio = qv / (rv * k2 ** (delta_d - 1))
    modulus = abs(ratio) ** (1.0 / n_roots)
    base_arg = np.angle(ratio) / n_roots
    ls = np.arange(n_roots)
    return modulus * np.exp(1j * (base_arg + 2.0 * math.pi * ls / n_roots))


def p_m(tau, m, q_poly, rd_poly, delta_d, k2):
    qv = polyval_im(q_poly, m)
    rv = polyval_im(rd_poly, m)
    return qv * k2 - rv * k2**delta_d * np.asarray(tau) ** ((delta_d - 1) * k2)


@dataclass
class RootData:
    """Roots q_l(m) on the m-grid plus the measured admissibility constants."""

    m_nodes: np.ndarray
    roots: np.ndarray  # shape (n_m, n_roots)
    q_poly: list
    rd_poly: list
    delta_d: int
    k2: int
    M1: float = None
    M2: float = None
    l0: int = None
    C_P: float = None
    r_q_rd: float = None

    @classmethod
    def on_grid(cls, m_nodes, q_poly, rd_poly, delta_d, k2):
        roots = np.array(
            [roots_q(m, q_poly, rd_poly, delta_d, k2) for m in m_nodes]
        )
        r_q_rd = float(
            np.min(np.abs(polyval_im(q_poly, m_nodes) / polyval_im(rd_poly, m_nodes)))
        )
        return cls(np.asarray(m_nodes, float), roots, list(q_poly), list(rd_poly),
                   delta_d, k2, r_q_rd=r_q_rd)

    @property
    def n_roots(self):
        return self.roots.shape[1]


def sample_sector_disc(sector: Sector, rho, n_rays=7, n_radii=24, r_max=None):
    """Sample points of (sector union closed disc of radius rho)."""
    lo, hi = sector.edge_angles()
    rays = np.linspace(lo, hi, n_rays)
    if r_max is None:
        r_max = 50.0
    radii = np.geomspace(max(rho, 1e-3) * 0.05, r_max, n_radii)
    pts = [r * np.exp(1j * th) for th in rays for r in radii
           if sector.radius is None or r < sector.radius]
    disc_r = np.linspace(rho / 8.0, rho, 6)
    disc_t = np.linspace(-math.pi, math.pi, 16, endpoint=False)
    pts.extend(r * np.exp(1j * t) for r in disc_r for t in disc_t)
    pts.append(0.0 + 0.0j)
    return np.asarray(pts)


def check_root_conditions(roots: RootData, sector: Sector, rho):
    """Measure the two root-distance constants on sampled points.

    M1 bounds |tau - q_l(m)| / (1 + |tau|) from below over every root;
    M2 does the same for the best single root index l0 relative to |q_l0|.
    A value near zero is reported, not raised: the sector fails the
    admissibility conditions.
    """
    taus = sample_sector_disc(sector, rho, r_max=40.0 * float(np.max(np.abs(roots.roots))))
    q = roots.roots  # (n_m, n_l)
    dist = np.abs(taus[:, None, None] - q[None, :, :])  # (n_tau, n_m, n_l)
    m1 = float(np.min(dist / (1.0 + np.abs(taus))[:, None, None]))
    per_l = np.min(dist / np.abs(q)[None, :, :], axis=(0, 1))
    l0 = int(np.argmax(per_l))
    m2 = float(per_l[l0])
    roots.M1, roots.M2, roots.l0 = m1, m2, l0
    return m1, m2, l0


def pm_lower_bound(roots: RootData, sector: Sector = None, rho=0.2, taus=None):
    """Empirical constant C_P in the polynomial lower bound.

    Minimizes |P_m(tau)| over sampled (tau, m) against the shape
    ``r^{1/((dD-1) k2)} |R_D(im)| (1 + |tau|^{k2})^{(dD-1) - 1/k2}``.
    """
    if taus is None:
        if sector is None:
            raise GeometryError("need a sector or explicit tau samples")
        taus = sample_sector_disc(sector, rho, r_max=40.0 * float(np.max(np.abs(roots.roots))))
    taus = np.asarray(taus)
    expo = (roots.delta_d - 1) - 1.0 / roots.k2
    r_fac = roots.r_q_rd ** (1.0 / ((roots.delta_d - 1) * roots.k2))
    best = np.inf
    for m_i, m in enumerate(roots.m_nodes):
        pm = np.abs(p_m(taus, m, roots.q_poly, roots.rd_poly, roots.delta_d, roots.k2))
        rd = abs(complex(polyval_im(roots.rd_poly, m)))
        denom = r_fac * rd * (1.0 + np.abs(taus) ** roots.k2) ** expo
        best = min(best, float(np.min(pm / denom)))
    roots.C_P = 0.0 if not np.isfinite(best) else best
    return roots.C_P


@dataclass
class SectorPlan:
    """Directions and sector families attached to a good covering."""

    covering: GoodCovering
    directions: list
    s_sectors: list      # narrow unbounded sectors holding the Laplace rays
    u_sectors: list      # unbounded sectors holding the acceleration rays
    b_sectors: list      # bounded sectors of aperture pi/kappa + delta_p
    rho: float
    theta: float         # aperture of the sectors containing eps * t
    constants: dict = field(default_factory=dict)

    def to_record(self):
        return {
            "directions": list(self.directions),
            "s_sectors": [s.to_record() for s in self.s_sectors],
            "u_sectors": [s.to_record() for s in self.u_sectors],
            "b_sectors": [s.to_record() for s in self.b_sectors],
            "rho": self.rho,
            "theta": self.theta,
            "constants": self.constants,
            "covering": {
                "eps0": self.covering.eps0,
                "sectors": [s.to_record() for s in self.covering.sectors],
            },
        }

    def to_json(self):
        return json.dumps(self.to_record(), indent=1, sort_keys=True)

    def report(self, t_sector: Sector, n_samples=160):
        """Def-8 style admissibility checks on sampled data."""
        out = {"conditions": [], "ok": True}
        n = len(self.directions)
        for p in range(n):
            sb0, sb1 = self.b_sectors[p], self.b_sectors[(p + 1) % n]
            gap = abs(wrap_angle(sb1.direction - sb0.direction))
            ok = gap < (sb0.aperture + sb1.aperture) / 2.0
            out["conditions"].append({"name": f"Sb_overlap_{p}", "ok": bool(ok)})
        rng = np.random.default_rng(0)
        for p in range(n):
            cov_s = self.covering.sectors[p]
            worst = 0.0
            for _ in range(n_samples):
                ae = cov_s.direction + (rng.uniform(-0.5, 0.5) * cov_s.aperture * 0.98)
                at = t_sector.direction + (rng.uniform(-0.5, 0.5) * t_sector.aperture * 0.98)
                worst = max(worst, abs(wrap_angle(ae + at - self.directions[p])))
            ok = worst < self.theta / 2.0
            out["conditions"].append(
                {"name": f"eps_t_in_S_{p}", "ok": bool(ok), "worst_angle": worst}
            )
        out["ok"] = all(c["ok"] for c in out["conditions"])
        return out


def associate_sectors(cov: GoodCovering, t_sector: Sector, roots: RootData,
                      kappa, rho, theta=None, s_aperture=0.5, u_aperture=0.8,
                      delta_p=0.15, scan_deg=25):
    """Search admissible directions near the covering directions.

    Coarse one-degree scan of each direction offset maximizing the worst
    root margin, then golden-section refinement; returns the plan or
    raises with the list of violated conditions.
    """
    if theta is None:
        theta = math.pi / roots.k2 + 0.5
    # Direction offsets are limited by two slacks: the eps*t sectors must
    # keep containing arg(eps t), and consecutive bounded sectors must
    # keep overlapping.  Inside that box, maximize the worst root margin:
    # coarse one-degree scan of a common rotation, then a golden-section
    # refinement per direction.
    spread = max(
        0.5 * es.aperture * 0.98 + 0.5 * t_sector.aperture * 0.98
        for es in cov.sectors
    )
    slack_eps = theta / 2.0 - spread - 0.02
    gap = 2.0 * math.pi / len(cov.sectors)
    slack_overlap = 0.5 * (math.pi / kappa + delta_p - gap) - 0.01
    slack = min(slack_eps, slack_overlap, math.radians(scan_deg))
    if slack <= 0.0:
        raise GeometryError("no angular slack left for the direction search")

    def margin(direction):
        s = Sector(direction, s_aperture)
        m1, m2, _ = check_root_conditions(roots, s, rho)
        return min(m1, m2)

    base_dirs = [es.direction for es in cov.sectors]
    commons = np.deg2rad(np.arange(-scan_deg, scan_deg + 1, 1.0))
    worst = [min(margin(b + c) for b in base_dirs) for c in commons]
    common = float(commons[int(np.argmax(worst))])
    directions = []
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    for base in base_dirs:
        a, b = common - slack, common + slack
        x1 = b - invphi * (b - a)
        x2 = a + invphi * (b - a)
        f1, f2 = margin(base + x1), margin(base + x2)
        for _ in range(20):
            if f1 < f2:
                a, x1, f1 = x1, x2, f2
                x2 = a + invphi * (b - a)
                f2 = margin(base + x2)
            else:
                b, x2, f2 = x2, x1, f1
                x1 = b - invphi * (b - a)
                f1 = margin(base + x1)
        best = min(max(0.5 * (a + b), common - slack), common + slack)
        if margin(base + best) <= 1e-6:
            raise GeometryError(
                f"no admissible direction near {base:.3f}: root margin vanishes"
            )
        directions.append(base + best)
    s_sectors = [Sector(d, s_aperture) for d in directions]
    u_sectors = [Sector(d, u_aperture) for d in directions]
    b_sectors = [Sector(d, math.pi / kappa + delta_p, 0.95 * rho) for d in directions]
    m1_all, m2_all = np.inf, np.inf
    for s in s_sectors:
        m1, m2, _ = check_root_conditions(roots, s, rho)
        m1_all, m2_all = min(m1_all, m1), min(m2_all, m2)
    c_p = min(pm_lower_bound(roots, s, rho) for s in s_sectors)
    plan = SectorPlan(
        cov, directions, s_sectors, u_sectors, b_sectors, rho, theta,
        constants={"M1": m1_all, "M2": m2_all, "C_P": c_p, "r_Q_RD": roots.r_q_rd},
    )
    rep = plan.report(t_sector)
    if not rep["ok"]:
        bad = [c["name"] for c in rep["conditions"] if not c["ok"]]
        raise GeometryError("association failed: " + ", ".join(bad))
    return plan
