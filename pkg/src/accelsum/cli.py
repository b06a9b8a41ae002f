"""Command-line front end: scenario runs, verification suites, reports.

Outputs are deterministic: fixed quadrature, seeded randomness, floats
printed with 15 significant digits; a ``--threads`` option (or the
ACCELSUM_THREADS variable) parallelizes independent parameter points
without changing any output byte.
"""

from __future__ import annotations

import cmath
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from .errors import AccelsumError

FMT = "%.15g"


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for value in row:
                if isinstance(value, str):
                    cells.append(value)
                elif isinstance(value, complex):
                    cells.append((FMT % value.real) + "+" + (FMT % value.imag) + "j")
                else:
                    cells.append(FMT % value)
            fh.write(",".join(cells) + "\n")


def _write_summary(outdir, payload):
    path = Path(outdir) / "summary.json"
    path.write_text(json.dumps(payload, indent=1, sort_keys=True, default=str))
    return path


def _threads(value):
    if value is not None:
        return max(1, value)
    env = os.environ.get("ACCELSUM_THREADS", "").strip()
    return max(1, int(env)) if env.isdigit() else 1


def _echo_table(rows):
    for name, ok, value in rows:
        status = "pass" if ok else "FAIL"
        val = "" if value is None else (FMT % value if isinstance(value, float) else str(value))
        click.echo(f"{status:4}  {name:44} {val}")


@click.group()
def main():
    """Two-level accelero-summation toolkit."""


def _load_spec_or_exit(spec_path):
    from .config import load_problem

    try:
        return load_problem(spec_path)
    except FileNotFoundError as exc:
        click.echo(f"config error: missing file {exc}", err=True)
        sys.exit(2)
    except (KeyError, ValueError, AccelsumError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)


@main.command()
@click.option("--spec", "spec_path", required=True, type=str)
@click.option("--direction", "p_index", default=0, show_default=True)
@click.option("--eps", default=0.05, show_default=True)
@click.option("--out", default="accelsum_out", show_default=True)
def solve(spec_path, p_index, eps, out):
    """Run the fixed-point chain for one direction; write norms and data."""
    from .acceleration import AccelPlan
    from .flatness import fixture_pair
    from .pipeline import AccelBundle, solve_direction

    spec = _load_spec_or_exit(spec_path)
    Path(out).mkdir(parents=True, exist_ok=True)
    pair = fixture_pair(p_index % 4)
    bundle = AccelBundle(AccelPlan(spec.k1, spec.k2))
    eps_c = eps * cmath.exp(1j * pair.eps_arg)
    try:
        sol = solve_direction(spec, eps_c, pair.gamma_a, pair.gamma1_a, bundle)
    except AccelsumError as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        sys.exit(1)
    rows = []
    grid = sol.omega_k2.grid
    for j, r in enumerate(grid.radii):
        rows.append((r, sol.omega_k2.values[j, grid.m_nodes.size // 2]))
    _write_csv(Path(out) / "omega_k2_center.csv", ["radius", "value"], rows)
    payload = {
        "eps": [eps_c.real, eps_c.imag],
        "gamma": sol.gamma,
        "gamma1": sol.gamma1,
        "reports": {
            k: {
                "iterations": v.iterations,
                "final_norm": v.final_norm,
                "contraction": v.contraction[-3:],
            }
            for k, v in sol.reports.items()
        },
    }
    _write_summary(out, payload)
    for k, v in sol.reports.items():
        contr = v.contraction[-1] if v.contraction else float("nan")
        click.echo(f"{k:24} iters={v.iterations:3d} contraction={FMT % contr} "
                   f"norm={FMT % v.final_norm}")
    sys.exit(0)


@main.command(name="sum")
@click.option("--spec", "spec_path", required=True, type=str)
@click.option("--direction", "p_index", default=0, show_default=True)
@click.option("--eps", default=0.05, show_default=True)
@click.option("--t", "t_value", default=0.1, show_default=True)
@click.option("--z", "z_value", default=0.2, show_default=True)
@click.option("--out", default="accelsum_out", show_default=True)
def sum_cmd(spec_path, p_index, eps, t_value, z_value, out):
    """Accelero-sum the solution and forcing at sample points."""
    from .acceleration import AccelPlan
    from .flatness import fixture_pair
    from .pipeline import AccelBundle, f_of_t_z, solve_direction, u_of_t_z

    spec = _load_spec_or_exit(spec_path)
    Path(out).mkdir(parents=True, exist_ok=True)
    pair = fixture_pair(p_index % 4)
    bundle = AccelBundle(AccelPlan(spec.k1, spec.k2))
    eps_c = eps * cmath.exp(1j * pair.eps_arg)
    try:
        sol = solve_direction(spec, eps_c, pair.gamma_a, pair.gamma1_a, bundle)
        t_grid = np.linspace(0.2 * t_value, t_value, 8)
        rows = []
        for t in t_grid:
            rows.append((t, u_of_t_z(spec, sol, t, z_value),
                         f_of_t_z(spec, sol, t, z_value)))
    except AccelsumError as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        sys.exit(1)
    _write_csv(Path(out) / "sum_samples.csv", ["t", "u", "f"], rows)
    _write_summary(out, {
        "eps": [eps_c.real, eps_c.imag], "z": z_value,
        "u_at_t": [rows[-1][1].real, rows[-1][1].imag],
        "f_at_t": [rows[-1][2].real, rows[-1][2].imag],
    })
    click.echo(f"u({t_value}, {z_value}) = {rows[-1][1]}")
    click.echo(f"f({t_value}, {z_value}) = {rows[-1][2]}")
    sys.exit(0)


@main.command()
@click.option("--spec", "spec_path", required=True, type=str)
@click.option("--out", default="accelsum_out", show_default=True)
def geometry(spec_path, out):
    """Admissibility report: roots, distance constants, covering checks."""
    from .fixtures import t_sector
    from .geometry import RootData, associate_sectors, build_good_covering

    spec = _load_spec_or_exit(spec_path)
    Path(out).mkdir(parents=True, exist_ok=True)
    m_sub = spec.m_nodes[:: max(1, spec.m_nodes.size // 33)]
    roots = RootData.on_grid(
        m_sub, spec.q_poly, spec.r_polys[spec.big_d],
        spec.delta[spec.big_d], spec.k2,
    )
    cov = build_good_covering(4, spec.k2, spec.eps0)
    try:
        plan = associate_sectors(cov, t_sector(), roots, spec.kappa, spec.rho)
    except AccelsumError as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        sys.exit(1)
    (Path(out) / "sector_plan.json").write_text(plan.to_json())
    rep = plan.report(t_sector())
    from .pipeline import solution_time_radius

    payload = {"constants": plan.constants, "covering": cov.validate(),
               "conditions": rep["conditions"],
               "time_radius": solution_time_radius(spec)}
    _write_summary(out, payload)
    click.echo(f"M1 = {FMT % plan.constants['M1']}")
    click.echo(f"M2 = {FMT % plan.constants['M2']}")
    click.echo(f"C_P = {FMT % plan.constants['C_P']}")
    click.echo(f"covering ok: {cov.validate()['ok']}; conditions ok: {rep['ok']}")
    sys.exit(0 if rep["ok"] else 1)


@main.command()
@click.option("--k", "k_low", default=1, show_default=True)
@click.option("--ktilde", default=2, show_default=True)
@click.option("--ratios", default="0.3..3.0:25", show_default=True,
              help="r0..r1:n tabulation range for |h|/|xi| = 1/ratio scale")
@click.option("--out", default="accelsum_out", show_default=True)
def kernel(k_low, ktilde, ratios, out):
    """Tabulate the acceleration kernel modulus and its decay exponent."""
    from .acceleration import AccelPlan, fit_kernel_decay, kernel_G

    try:
        span, count = ratios.split(":")
        r0, r1 = span.split("..")
        rr = np.geomspace(float(r0), float(r1), int(count))
    except ValueError:
        click.echo("config error: --ratios must be r0..r1:n", err=True)
        sys.exit(2)
    Path(out).mkdir(parents=True, exist_ok=True)
    plan = AccelPlan(k_low, ktilde)
    fit = fit_kernel_decay(plan)
    xi = 1.0
    rows = [(r, abs(kernel_G(xi, r, plan))) for r in rr]
    _write_csv(Path(out) / "kernel.csv", ["h_over_xi", "abs_G"], rows)
    _write_summary(out, {"fit": fit})
    click.echo(f"kappa = {FMT % plan.kappa}")
    click.echo(f"fitted exponent = {FMT % fit['exponent']}")
    click.echo(f"c1 = {FMT % fit['c1']}  c2 = {FMT % fit['c2']}")
    ok = abs(fit["exponent"] - plan.kappa) <= 0.05 * plan.kappa
    sys.exit(0 if ok else 1)


@main.command()
@click.option("--spec", "spec_path", required=True, type=str)
@click.option("--pairs", default="all", show_default=True,
              help="all, or comma-separated pair indices from {0, 2}")
@click.option("--threads", default=None, type=int)
@click.option("--points", default=14, show_default=True,
              help="number of geometric epsilon samples")
@click.option("--out", default="accelsum_out", show_default=True)
def flatness(spec_path, pairs, threads, points, out):
    """Fit the flatness orders of neighboring-solution differences."""
    from .acceleration import AccelPlan
    from .asymptotics import flatness_fit
    from .flatness import fixture_pair, pair_delta_curve
    from .pipeline import AccelBundle

    spec = _load_spec_or_exit(spec_path)
    Path(out).mkdir(parents=True, exist_ok=True)
    wanted = [0, 2] if pairs == "all" else [int(x) for x in pairs.split(",")]
    bundle = AccelBundle(AccelPlan(spec.k1, spec.k2))
    t_val, z_val = 0.1, 0.2
    eps_list = 0.05 * 0.75 ** np.arange(points)
    n_workers = _threads(threads)
    rows = []
    results = {}
    expected = {0: float(spec.k2), 2: float(spec.k1)}
    ok = True
    for p in wanted:
        pair = fixture_pair(p)

        def one(ea, pair=pair):
            return pair_delta_curve(spec, pair, bundle, bundle.klog,
                                    t_val, z_val, [ea])[0]

        if n_workers > 1:
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                curve = np.array(list(pool.map(one, eps_list)))
        else:
            curve = np.array([one(ea) for ea in eps_list])
        fit = flatness_fit(eps_list, log_delta=curve)
        results[p] = fit
        rows.append((p, pair.kind, fit["order"], fit["rate"], fit["r_squared"]))
        if p in expected:
            ok = ok and abs(fit["order"] - expected[p]) <= 0.1 * expected[p]
        click.echo(
            f"pair {p} ({pair.kind}): order={FMT % fit['order']} "
            f"M={FMT % fit['rate']} R2={FMT % fit['r_squared']}"
        )
    _write_csv(Path(out) / "flatness.csv",
               ["pair", "kind", "order", "rate", "r_squared"], rows)
    _write_summary(out, {str(p): results[p] for p in results})
    sys.exit(0 if ok else 1)


@main.command()
@click.option("--cocycles", "cocycle_path", required=True, type=str)
@click.option("--out", default="accelsum_out", show_default=True)
def rs(cocycle_path, out):
    """Two-level decomposition report for a closed-form cocycle family."""
    from .asymptotics import (
        CocycleFamily,
        cauchy_heine_coefficients,
        cauchy_heine_split,
        gevrey_expansion_check,
        telescope_gap,
    )
    from .config import load_cocycles
    from .geometry import build_good_covering

    try:
        data = load_cocycles(cocycle_path)
    except FileNotFoundError as exc:
        click.echo(f"config error: missing file {exc}", err=True)
        sys.exit(2)
    Path(out).mkdir(parents=True, exist_ok=True)
    cov = build_good_covering(data["varsigma"], data["k2"], data["eps0"])
    fam = CocycleFamily(cov, data["cocycles"], data["levels"])
    n = data["varsigma"]
    gaps = []
    for p in range(n):
        bis = cov.overlap_bisector(p)
        pts = [0.22 * data["eps0"] * cmath.exp(1j * (bis + off))
               for off in (-0.05, 0.04, 0.09)]
        gaps.append(telescope_gap(fam, pts, p))
    zero = lambda e: np.zeros_like(np.asarray(e, dtype=complex))
    fam1 = CocycleFamily(
        cov, [fam.cocycles[q] if fam.levels[q] == "k1" else zero for q in range(n)],
        ["k1"] * n, fam.path_radius)
    fam2 = CocycleFamily(
        cov, [fam.cocycles[q] if fam.levels[q] == "k2" else zero for q in range(n)],
        ["k2"] * n, fam.path_radius)
    pts = np.array([0.2 * data["eps0"] * cmath.exp(1j * a) * s
                    for a, s in ((0.1, 1.0), (0.0, 0.8), (-0.2, 0.65),
                                 (0.05, 0.5), (-0.1, 0.4), (0.15, 0.33))])
    chk1 = gevrey_expansion_check(
        lambda e: cauchy_heine_split(fam1, e, 0),
        cauchy_heine_coefficients(fam1, 16), 1.0, pts)
    chk2 = gevrey_expansion_check(
        lambda e: cauchy_heine_split(fam2, e, 0),
        cauchy_heine_coefficients(fam2, 16), float(data["k2"]), pts)
    rows = [(p, gaps[p]) for p in range(n)]
    _write_csv(Path(out) / "rs_telescoping.csv", ["overlap", "gap"], rows)
    payload = {
        "telescoping_max": max(gaps),
        "level1_check": {k: v for k, v in chk1.items() if k in ("ok", "C", "M", "spread")},
        "level2_check": {k: v for k, v in chk2.items() if k in ("ok", "C", "M", "spread")},
    }
    _write_summary(out, payload)
    click.echo(f"telescoping max gap = {FMT % max(gaps)}")
    click.echo(f"level-1 part Gevrey check: {chk1['ok']} (spread {FMT % chk1['spread']})")
    click.echo(f"level-2 part Gevrey check: {chk2['ok']} (spread {FMT % chk2['spread']})")
    ok = max(gaps) < 1e-6 and chk1["ok"] and chk2["ok"]
    sys.exit(0 if ok else 1)


SUITES = ("identities", "kernel", "geometry", "recursion", "pipeline",
          "asymptotics")


@main.command()
@click.option("--suite", required=True, type=str)
@click.option("--spec", "spec_path", default=None, type=str,
              help="problem file (defaults to the shipped fixture)")
def verify(suite, spec_path):
    """Run one verification suite and print its pass/fail table."""
    if suite not in SUITES:
        click.echo(f"usage error: unknown suite {suite!r}; choose from {SUITES}",
                   err=True)
        sys.exit(2)
    from . import verify as verify_mod

    if spec_path is None:
        from .fixtures import make_spec

        spec = make_spec(count=61)
    else:
        spec = _load_spec_or_exit(spec_path)
    rows = getattr(verify_mod, f"suite_{suite}")(spec)
    _echo_table(rows)
    sys.exit(0 if all(ok for _, ok, _ in rows) else 1)


if __name__ == "__main__":
    main()
