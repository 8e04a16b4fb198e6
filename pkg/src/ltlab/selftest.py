"""Config-free exact checks: conservation and the discrete identities."""

from __future__ import annotations

import itertools

import numpy as np

from . import functions as fn
from .grid import TimeGrid, covering_space_grid, path_range
from .integrals import identity_check, lhs_forward, occupation_formula_check, stieltjes_space_integral, two_param_integral
from .localtime import conservation_defect, local_time_sheet, occupation_local_time
from .simulate import ProcessSpec, SeedPolicy, simulate
from .variation import p_variation

SEED = 20240601
PROCESSES = (
    ProcessSpec("brownian"),
    ProcessSpec("drifted_brownian", {"mu": 0.5, "sigma": 0.8}),
    ProcessSpec("ornstein_uhlenbeck", {"theta": 2.0, "sigma": 0.7, "x0": 0.3}),
    ProcessSpec("geometric_brownian", {"mu": 0.05, "sigma": 0.4, "x0": 1.0}),
    ProcessSpec("deterministic", {"name": "sine"}),
    ProcessSpec("deterministic", {"name": "zigzag"}),
)


def catalog_samples() -> list[fn.TestFunction]:
    return [
        fn.constant(2.5),
        fn.linear(),
        fn.indicator(0.0),
        fn.step_combo([-0.5, 0.0, 0.5], [1.0, -0.5, 2.0]),
        fn.holder(0.75, 0.125),
        fn.cosine(),
    ]


def _paths(n_steps: int = 4096, per_process: int = 3):
    grid = TimeGrid(1.0, n_steps)
    for spec in PROCESSES:
        for pid in range(per_process if spec.is_stochastic else 1):
            yield simulate(spec, grid, SeedPolicy(SEED, pid))


def _brute_pvar(x, p):
    best = 0.0
    inner = range(1, len(x) - 1)
    for r in range(len(x) - 1):
        for mid in itertools.combinations(inner, r):
            idx = (0, *mid, len(x) - 1)
            best = max(best, sum(abs(x[b] - x[a]) ** p for a, b in zip(idx, idx[1:])))
    return best


def run_selftest() -> list[tuple[str, bool, str]]:
    results = []
    delta = 2.0**-7

    worst = 0.0
    for path in _paths():
        lo, hi = path_range(path)
        space = covering_space_grid(lo, hi, delta, margin_bins=1)
        qv = path.qv[-1]
        worst = max(worst, conservation_defect(occupation_local_time(path, space), qv) / max(1.0, qv))
    results.append(("conservation (all processes)", worst <= 1e-12, f"max rel defect {worst:.3g}"))

    worst_ind = worst_lin = worst_id = worst_red = worst_occ = worst_fwd = 0.0
    for path in _paths(per_process=2):
        lo, hi = path_range(path)
        space = covering_space_grid(lo, hi, delta, margin_bins=5)
        field = occupation_local_time(path, space)
        qv = path.qv[-1]
        a = space.edge(space.n_bins // 2)
        worst_ind = max(worst_ind, abs(stieltjes_space_integral(fn.indicator(a), field) - field.at_edge(a)))
        worst_lin = max(worst_lin, abs(stieltjes_space_integral(fn.linear(), field) + qv) / max(1.0, qv))
        worst_fwd = max(worst_fwd, abs(lhs_forward(fn.linear(), path, 4 * delta) + qv) / max(1.0, qv))
        for f in catalog_samples():
            for m in (1, 2, 4):
                lhs, rhs, d = identity_check(f, path, space, m)
                worst_id = max(worst_id, d / max(1.0, abs(rhs)))
        sheet = local_time_sheet(path, space, path.grid.points[::64])
        for f in catalog_samples():
            ref = stieltjes_space_integral(f, field)
            gap = abs(two_param_integral(fn.as_time_space(f), sheet) - ref)
            worst_red = max(worst_red, gap / max(1.0, abs(ref)))
        _, _, d = occupation_formula_check(fn.product("exp_neg", fn.constant(1.0)), path, local_time_sheet(path, space))
        worst_occ = max(worst_occ, d)
    results.append(("indicator integral = L at a", worst_ind <= 1e-12, f"max abs gap {worst_ind:.3g}"))
    results.append(("linear integral = -qv", worst_lin <= 1e-10, f"max rel gap {worst_lin:.3g}"))
    results.append(("forward quotient of x = -qv", worst_fwd <= 1e-10, f"max rel gap {worst_fwd:.3g}"))
    results.append(("mollified identity (catalog x m)", worst_id <= 1e-10, f"max rel defect {worst_id:.3g}"))
    results.append(("two-parameter reduction", worst_red <= 1e-12, f"max rel gap {worst_red:.3g}"))
    results.append(("occupation formula, x-independent f", worst_occ <= 1e-12, f"max abs defect {worst_occ:.3g}"))

    rng = np.random.default_rng(SEED)
    ok = True
    for _ in range(100):
        x = rng.normal(size=int(rng.integers(2, 10)))
        p = float(rng.choice([1.0, 1.5, 1.9, 2.5]))
        if not np.isclose(p_variation(x, p), _brute_pvar(x, p), rtol=1e-12, atol=0):
            ok = False
    results.append(("p-variation DP = enumeration", ok, "100 random sequences"))
    return results
