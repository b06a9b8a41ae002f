"""Verification suites behind `accelsum verify --suite <name>`.

Each suite returns rows (name, ok, measured_value); the CLI prints the
table and sets the exit code.  These are condensed, deterministic
versions of the module invariants.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .series import TruncatedSeries, cauchy_product, irregular_apply
from .transforms import DirectionalFunction, formal_borel


def suite_identities(spec):
    rows = []
    rng = np.random.default_rng(100)
    worst_diff = worst_mono = worst_prod = 0.0
    for _ in range(50):
        k = int(rng.integers(1, 4))
        s = TruncatedSeries(list(rng.normal(size=12)))
        lhs = formal_borel(irregular_apply(s, k + 1, 1), k)
        rc = np.array([complex(c) for c in formal_borel(s, k).coeffs])
        shifted = np.zeros(lhs.order, dtype=complex)
        shifted[k : k + rc.size] = k * rc
        got = np.array([complex(c) for c in lhs.coeffs])
        worst_diff = max(worst_diff, float(np.max(np.abs(got - shifted))))
        m = int(rng.integers(1, 4))
        padded = TruncatedSeries([0.0] * m + [complex(c) for c in s.coeffs])
        lhs_m = np.array([complex(c) for c in formal_borel(padded, k).coeffs])
        expect_m = np.zeros(m + 12, dtype=complex)
        for n in range(1, 13):
            expect_m[m + n - 1] = complex(s.coeffs[n - 1]) / math.gamma((m + n) / k)
        worst_mono = max(worst_mono, float(np.max(np.abs(lhs_m - expect_m))))
        g = TruncatedSeries(list(rng.normal(size=12)))
        fg = cauchy_product(s, g, order=12)
        lhs_p = np.array([complex(c) for c in formal_borel(fg, k).coeffs])
        expect_p = np.array(
            [complex(fg.coeffs[n - 1]) / math.gamma(n / k) for n in range(1, 13)]
        )
        worst_prod = max(worst_prod, float(np.max(np.abs(lhs_p - expect_p))))
    rows.append(("borel_derivative_identity", worst_diff < 1e-10, worst_diff))
    rows.append(("borel_monomial_identity", worst_mono < 1e-10, worst_mono))
    rows.append(("borel_product_identity", worst_prod < 1e-10, worst_prod))
    from .coeffspace import CoeffGrid, WeightParams, convolve, inverse_fourier, make_m_grid

    w = WeightParams(1.0, 2.5)
    nodes = make_m_grid(26.0, 521)
    rng2 = np.random.default_rng(5)
    worst_d = worst_f = 0.0
    for _ in range(10):
        a = rng2.normal(size=3)
        f = CoeffGrid(nodes, (a[0] + a[1] * nodes) * np.exp(-(0.4 + a[2] ** 2) * nodes**2), w)
        g = CoeffGrid(nodes, np.exp(-0.7 * nodes**2), w)
        z = complex(rng2.uniform(-1, 1), rng2.uniform(-0.4, 0.4))
        h = 3e-4
        fd = (inverse_fourier(f, z + h) - inverse_fourier(f, z - h)) / (2 * h)
        worst_d = max(worst_d, abs(fd - inverse_fourier(f.with_values(1j * nodes * f.values), z)))
        psi = convolve(f, g)
        lhs = inverse_fourier(f, z) * inverse_fourier(g, z)
        rhs = inverse_fourier(psi.with_values(psi.values / math.sqrt(2 * math.pi)), z)
        worst_f = max(worst_f, abs(lhs - rhs))
    rows.append(("fourier_derivative_identity", worst_d < 1e-6, worst_d))
    rows.append(("fourier_product_identity", worst_f < 1e-7, worst_f))
    return rows


def suite_kernel(spec):
    from .acceleration import AccelPlan, accelerate_numeric, fit_kernel_decay

    rows = []
    for k, kt in ((1, 2), (1, 3), (2, 3)):
        plan = AccelPlan(k, kt)
        fit = fit_kernel_decay(plan)
        ok = abs(fit["exponent"] - plan.kappa) <= 0.05 * plan.kappa
        rows.append((f"decay_exponent_{k}_{kt}", ok, fit["exponent"]))
        xi = 0.15 * cmath.exp(0.1j)
        worst = 0.0
        for n in range(1, 5):
            f = DirectionalFunction.from_function(
                lambda h, n=n: h**n, 0.0, 1, 0.0, aperture=0.3
            )
            got = accelerate_numeric(f, plan, xi)
            expect = math.gamma(n / k) / math.gamma(n / kt) * xi**n
            worst = max(worst, abs(got - expect) / max(1e-12, abs(expect)))
        rows.append((f"monomial_law_{k}_{kt}", worst < 1e-5, worst))
    return rows


def suite_geometry(spec):
    from .fixtures import t_sector
    from .geometry import RootData, associate_sectors, build_good_covering, p_m

    rows = []
    m_sub = spec.m_nodes[:: max(1, spec.m_nodes.size // 33)]
    roots = RootData.on_grid(
        m_sub, spec.q_poly, spec.r_polys[spec.big_d],
        spec.delta[spec.big_d], spec.k2,
    )
    worst = 0.0
    for i, m in enumerate(m_sub):
        vals = p_m(roots.roots[i], m, spec.q_poly, spec.r_polys[spec.big_d],
                   spec.delta[spec.big_d], spec.k2)
        worst = max(worst, float(np.max(np.abs(vals))))
    rows.append(("roots_satisfy_polynomial", worst < 1e-10, worst))
    cov = build_good_covering(4, spec.k2, spec.eps0)
    rep = cov.validate()
    rows.append(("good_covering_valid", rep["ok"], float(len(rep["problems"]))))
    try:
        plan = associate_sectors(cov, t_sector(), roots, spec.kappa, spec.rho)
        rows.append(("association_m1", plan.constants["M1"] > 0, plan.constants["M1"]))
        rows.append(("association_m2", plan.constants["M2"] > 0, plan.constants["M2"]))
        rows.append(("association_cp", plan.constants["C_P"] > 0, plan.constants["C_P"]))
    except Exception as exc:  # pragma: no cover - report not raise
        rows.append(("association", False, str(exc)))
    return rows


def suite_recursion(spec):
    from .cauchy import (
        recursion_residual_F,
        recursion_residual_U,
        solve_recursion_F,
        solve_recursion_U,
        validate_constraints,
    )

    rows = []
    rep = validate_constraints(spec)
    rows.append(("structural_constraints", rep["ok"],
                 float(sum(not c["ok"] for c in rep["checks"]))))
    eps = 0.05
    fser = solve_recursion_F(spec.forcing, 15, eps)
    res_f = recursion_residual_F(spec.forcing, fser, eps)
    rows.append(("forcing_recursion_residual", res_f < 1e-10, res_f))
    user = solve_recursion_U(spec, 15, eps)
    res_u = recursion_residual_U(spec, user, eps)
    rows.append(("main_recursion_residual", res_u < 1e-10, res_u))
    return rows


def suite_pipeline(spec):
    from .acceleration import AccelPlan
    from .pipeline import (
        AccelBundle,
        accelerate_on_points,
        lemma13_gap,
        residual_main_pde,
        solve_direction,
    )
    from .cauchy import solve_recursion_U
    from .transforms import formal_borel

    rows = []
    bundle = AccelBundle(AccelPlan(spec.k1, spec.k2))
    eps = 0.05
    sol = solve_direction(spec, eps, 0.0, 0.35, bundle)
    for name, rep in sol.reports.items():
        contr = max(rep.contraction[-3:]) if rep.contraction else 0.0
        rows.append((f"contraction_{name}", contr < 1.0, contr))
    ub = formal_borel(solve_recursion_U(spec, 40, eps), spec.k1)
    grid1 = sol.omega_k1.grid
    idx = np.where(grid1.radii <= spec.rho / 4.0)[0]
    worst = 0.0
    for j in idx:
        tau = grid1.points[j]
        sv = sum(ub.coeff(n).values * tau**n for n in range(1, ub.order + 1))
        worst = max(worst, float(np.max(np.abs(sv - sol.omega_k1.values[j]))))
    rows.append(("picard_matches_borel_series", worst < 1e-6, worst))
    g2 = sol.omega_k2.grid
    idx2 = np.where((g2.radii >= 0.02) & (g2.radii <= 0.08))[0]
    acc_vals = accelerate_on_points(
        sol.omega_k1.interp(), sol.gamma1, bundle, g2.points[idx2],
        growth_rate=spec.nu,
    )
    scale = float(np.max(np.abs(sol.omega_k2.values[idx2])))
    gap = float(np.max(np.abs(acc_vals - sol.omega_k2.values[idx2])))
    rows.append(("acceleration_identity", gap < 1e-5 * scale, gap / scale))
    res = residual_main_pde(spec, sol, [(0.08, 0.2), (0.1, -0.3)])
    rows.append(("main_pde_residual", res < 1e-4, res))
    l13 = lemma13_gap(spec, sol, eps, [0.08, 0.1])
    rows.append(("forcing_laplace_identity", l13 < 1e-6, l13))
    return rows


def suite_asymptotics(spec):
    from .asymptotics import (
        CocycleFamily,
        flatness_fit,
        mittag_leffler,
        telescope_gap,
    )
    from .geometry import build_good_covering

    rows = []
    e1 = abs(mittag_leffler(1, 1, 1.0) - math.e)
    rows.append(("mittag_leffler_exp", e1 < 1e-10, e1))
    e2 = abs(mittag_leffler(2, 1, 1.0) - math.cosh(1.0))
    rows.append(("mittag_leffler_cosh", e2 < 1e-10, e2))
    eps = np.geomspace(0.7, 0.07, 12)
    f2 = flatness_fit(eps, delta_abs=np.exp(-1.0 / eps**2))
    rows.append(("synthetic_order_2", abs(f2["order"] - 2.0) < 0.1, f2["order"]))
    f1 = flatness_fit(eps, delta_abs=np.exp(-3.0 / eps))
    rows.append(("synthetic_order_1", abs(f1["order"] - 1.0) < 0.05, f1["order"]))
    cov = build_good_covering(4, 2, 0.5)
    zero = lambda e: np.zeros_like(np.asarray(e, dtype=complex))
    fam = CocycleFamily(
        cov,
        [lambda e: np.exp(-1.0 / np.asarray(e)), zero,
         lambda e: np.exp(-1.0 / np.asarray(e) ** 2), zero],
        ["k1", "k2", "k2", "k2"],
    )
    worst = 0.0
    for p in range(4):
        bis = cov.overlap_bisector(p)
        pts = [0.12 * cmath.exp(1j * (bis + off)) for off in (-0.05, 0.06)]
        worst = max(worst, telescope_gap(fam, pts, p))
    rows.append(("cauchy_heine_telescoping", worst < 1e-6, worst))
    return rows
