"""Scenario configuration: TOML (preferred) or JSON problem files.

Schema (all complex numbers as [re, im] pairs, polynomials ascending):

    [grid]                  # Fourier-variable grid
    beta = 1.0
    mu = 2.5
    m_max = 18.0
    count = 61

    [problem]
    q = [[0,10],[0,0],[0,-5]]
    q1 = [[0,0],[1,0]]
    q2 = [[0,0],[1,0]]
    r = [ [[1,0]], [[1,0],[0,0],[-0.25,0]], [[2,0],[0,0],[-0.5,0]] ]
    big_d = 2
    k1 = 1
    k2 = 2
    delta = [1, 2]          # delta_1 .. delta_D
    d_low = [2]             # d_1 .. d_{D-1}
    big_delta = [2]         # Delta_1 .. Delta_{D-1}
    c12 = [[0,0],[0.1,0]]   # epsilon polynomials vanishing at 0
    c0 = [[0,0],[0.1,0]]
    c00 = [[0,0],[0.1,0]]
    cf = [[0,0],[1,0]]
    c0n = { profile = "smooth", scales = [0.1, 0.2, 0.1] }
    eps0 = 0.1
    r_t = 0.12
    rho = 0.4
    nu = 2.0
    nu_prime = 2.0
    k0 = 2.0
    t0 = 2.0

    [forcing]               # same fields with bold meaning; d_low/delta/
    ...                     # big_delta run 1..D; plus f_data like c0n

Cocycle files for the two-level decomposition list closed forms:

    eps0 = 0.5
    k2 = 2
    [[cocycle]]
    amp = [0.7, 0]
    rate = 1.0
    order = 2               # exp(-rate / eps^order)
    level = "k2"
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .cauchy import ForcingSpec, ProblemSpec
from .coeffspace import CoeffGrid, WeightParams, make_m_grid, smooth_profile, unit_profile
from .errors import InputError


def _load_raw(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        return json.loads(text)
    import tomli

    return tomli.loads(text)


def _cx(pair):
    return complex(pair[0], pair[1])


def _poly(entries):
    return [_cx(p) for p in entries]


def _grids(grid_cfg):
    w = WeightParams(grid_cfg.get("beta", 1.0), grid_cfg.get("mu", 2.5))
    nodes = make_m_grid(grid_cfg.get("m_max", 18.0), grid_cfg.get("count", 61))
    return w, nodes


def _coeff_list(cfg, w, nodes):
    profile_name = cfg.get("profile", "smooth")
    if profile_name == "smooth":
        prof = smooth_profile(w)(nodes)
    elif profile_name == "unit":
        prof = unit_profile(w)(nodes)
    else:
        raise InputError(f"unknown profile {profile_name!r}")
    return [CoeffGrid(nodes, s * prof, w) for s in cfg["scales"]]


def load_problem(path):
    """Build the ProblemSpec (with nested ForcingSpec) from a config file."""
    raw = _load_raw(path)
    w, nodes = _grids(raw.get("grid", {}))
    prob = raw["problem"]
    forcing = None
    f_data = None
    if "forcing" in raw:
        fc = raw["forcing"]
        forcing = ForcingSpec(
            q_poly=_poly(fc["q"]),
            r_polys=[_poly(r) for r in fc["r"]],
            big_d=fc["big_d"],
            delta={l + 1: v for l, v in enumerate(fc["delta"])},
            d_low={l + 1: v for l, v in enumerate(fc["d_low"])},
            big_delta={l + 1: v for l, v in enumerate(fc["big_delta"])},
            c0=_poly(fc["c0"]),
            c00=_poly(fc["c00"]),
            cf=_poly(fc["cf"]),
            c0n=_coeff_list(fc["c0n"], w, nodes),
            f_data=_coeff_list(fc["f_data"], w, nodes),
            k0_const=fc.get("k0", 1.0),
            t0_const=fc.get("t0", 2.0),
            k1=prob["k1"],
        )
    elif "f_data" in prob:
        f_data = _coeff_list(prob["f_data"], w, nodes)
    return ProblemSpec(
        q_poly=_poly(prob["q"]),
        q1_poly=_poly(prob["q1"]),
        q2_poly=_poly(prob["q2"]),
        r_polys=[_poly(r) for r in prob["r"]],
        big_d=prob["big_d"],
        k1=prob["k1"],
        k2=prob["k2"],
        delta={l + 1: v for l, v in enumerate(prob["delta"])},
        d_low={l + 1: v for l, v in enumerate(prob["d_low"])},
        big_delta={l + 1: v for l, v in enumerate(prob["big_delta"])},
        c12=_poly(prob["c12"]),
        c0=_poly(prob["c0"]),
        c00=_poly(prob["c00"]),
        cf=_poly(prob["cf"]),
        c0n=_coeff_list(prob["c0n"], w, nodes),
        f_data=f_data,
        forcing=forcing,
        eps0=prob.get("eps0", 0.1),
        r_t=prob.get("r_t", 0.12),
        rho=prob.get("rho", 0.4),
        nu=prob.get("nu", 2.0),
        nu_prime=prob.get("nu_prime", 2.0),
        k0_const=prob.get("k0", 2.0),
        t0_const=prob.get("t0", 2.0),
        beta=w.beta,
        mu=w.mu,
    )


def load_cocycles(path):
    """Closed-form cocycle family description for the two-level split."""
    raw = _load_raw(path)
    entries = raw["cocycle"]
    fns = []
    levels = []
    for e in entries:
        amp = _cx(e["amp"])
        rate = float(e["rate"])
        order = float(e["order"])

        def fn(eps, amp=amp, rate=rate, order=order):
            eps = np.asarray(eps, dtype=complex)
            return amp * np.exp(-rate / eps**order)

        fns.append(fn)
        levels.append(e["level"])
    return {
        "eps0": raw.get("eps0", 0.5),
        "k2": raw.get("k2", 2),
        "varsigma": len(entries),
        "cocycles": fns,
        "levels": levels,
    }
