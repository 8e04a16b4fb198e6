"""Monte Carlo orchestration: one task per path, rows merged in (path_id, eps) order."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .config import ExperimentConfig
from .functions import as_time_space
from .grid import Path, SpaceGrid, TimeGrid, path_range, realized_qv
from .integrals import EstimatorResult, identity_check, occupation_formula_check, theorem_convergence
from .localtime import local_time_sheet, occupation_local_time, tanaka_local_time
from .simulate import SeedPolicy, simulate
from .variation import contraction_grid, mollifier_contraction_check

NA = "na"


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class ReportRow:
    experiment: str
    process: str
    base_seed: int
    path_id: int
    t_end: float
    n_steps: int
    n_bins: int
    epsilon: float
    variant: str
    sign_convention: str
    lhs: float
    rhs: float
    abs_err: float
    rel_err: float


def default_threads() -> int:
    env = os.environ.get("LTLAB_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"LTLAB_THREADS must be an integer, got {env!r}") from None
        if n >= 1:
            return n
    return os.cpu_count() or 1


def auto_space(cfg: ExperimentConfig, path: Path, margin_bins: int = 1) -> SpaceGrid:
    """Path range plus 10% on each side, with at least ``margin_bins`` empty bins."""
    if cfg.space is not None:
        return SpaceGrid(*cfg.space)
    delta = cfg.bin_width
    lo, hi = path_range(path)
    pad = 0.1 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    if cfg.align_breakpoints:
        for b in cfg.function.breakpoints:
            if abs(b / delta - round(b / delta)) > 1e-9:
                raise ValueError(f"breakpoint {b!r} is not a multiple of bin_width {delta!r}")
        j_lo = math.floor(lo / delta) - margin_bins
        j_hi = math.floor(hi / delta) + margin_bins + 1
        return SpaceGrid(j_lo * delta, j_hi * delta, j_hi - j_lo)
    x_min = lo - margin_bins * delta
    n_bins = math.floor((hi - x_min) / delta) + margin_bins + 1
    return SpaceGrid.from_width(x_min, delta, n_bins)


def _needed_margin(cfg: ExperimentConfig) -> int:
    if cfg.experiment == "identity27":
        return int(round(max(cfg.eps_ladder) / cfg.delta)) + 1
    return 1


def _row(cfg: ExperimentConfig, path_id: int, n_bins: int, res: EstimatorResult) -> ReportRow:
    return ReportRow(
        cfg.experiment,
        cfg.process.label(),
        cfg.base_seed,
        path_id,
        cfg.t_end,
        cfg.n_steps,
        n_bins,
        res.epsilon,
        res.variant,
        res.sign_convention,
        res.lhs,
        res.rhs,
        res.abs_err,
        res.rel_err,
    )


def make_path(cfg: ExperimentConfig, path_id: int) -> Path:
    grid = TimeGrid(cfg.t_end, cfg.n_steps)
    return simulate(cfg.process, grid, SeedPolicy(cfg.base_seed, path_id), cfg.qv_mode)


def _checkpoint_times(cfg: ExperimentConfig, path: Path):
    if not cfg.checkpoints:
        return None
    stride = cfg.n_steps // cfg.checkpoints
    return path.grid.points[::stride]


def path_results(cfg: ExperimentConfig, path_id: int) -> tuple[int, list[EstimatorResult]]:
    """All comparisons for one path: (n_bins, results in eps order)."""
    path = make_path(cfg, path_id)
    space = auto_space(cfg, path, _needed_margin(cfg))
    exp = cfg.experiment
    delta = space.delta

    if exp == "conservation":
        field = occupation_local_time(path, space)
        mass = float(np.sum(field.values)) * delta
        return space.n_bins, [EstimatorResult.compare(delta, mass, realized_qv(path.values)[-1], NA, NA)]

    if exp in ("theorem1", "theorem2"):
        f = cfg.function if exp == "theorem1" else as_time_space(cfg.function)
        out = []
        by_variant = {
            v: theorem_convergence(f, v, path, cfg.eps_ladder, space, cfg.sign_convention, _checkpoint_times(cfg, path))
            for v in cfg.resolved_variants()
        }
        # rows ordered by eps first, then variant, then sign convention
        for eps in cfg.eps_ladder:
            for res in by_variant.values():
                out.extend(r for r in res if r.epsilon == eps)
        return space.n_bins, out

    if exp == "identity27":
        out = []
        for eps in cfg.eps_ladder:
            m = int(round(eps / delta))
            lhs, rhs, _ = identity_check(cfg.function, path, space, m)
            out.append(EstimatorResult.compare(eps, lhs, rhs, "identity", NA))
        return space.n_bins, out

    if exp == "occupation31":
        sheet = local_time_sheet(path, space, _checkpoint_times(cfg, path))
        lhs, rhs, _ = occupation_formula_check(as_time_space(cfg.function), path, sheet)
        variant = "coarse" if cfg.checkpoints else "dense"
        return space.n_bins, [EstimatorResult.compare(delta, lhs, rhs, variant, NA)]

    if exp == "localtime_stats":
        field = occupation_local_time(path, space)
        j = int(space.bin_index(cfg.level))
        occ = float(field.values[j]) if 0 <= j < space.n_bins else 0.0
        return space.n_bins, [EstimatorResult.compare(delta, occ, tanaka_local_time(path, cfg.level), "tanaka", NA)]

    raise ExperimentError(f"experiment {exp!r} has no per-path runner")


def _audit_rows(cfg: ExperimentConfig) -> list[ReportRow]:
    lo, hi = cfg.audit_range
    f = cfg.function
    if f.arity != "space_only":
        raise ExperimentError("pvariation_audit needs a space_only function")
    pts = contraction_grid(f, lo, hi, cfg.audit_points)
    rows = []
    for p in cfg.p_values:
        for eps in cfg.eps_ladder:
            v_f, v_h, _ = mollifier_contraction_check(f, eps, p, pts)
            res = EstimatorResult.compare(eps, v_h, v_f, f"p={p!r}", NA)
            rows.append(_row(cfg, 0, cfg.audit_points, res))
    return rows


def run_experiment(cfg: ExperimentConfig, threads: int | None = None) -> list[ReportRow]:
    """Rows for every path, in (path_id, eps) order regardless of ``threads``."""
    cfg.validate()
    if cfg.experiment == "pvariation_audit":
        return _audit_rows(cfg)
    threads = threads or default_threads()

    def task(pid: int):
        try:
            return path_results(cfg, pid)
        except Exception as exc:  # add context, keep the original as cause
            raise ExperimentError(f"path_id {pid}: {exc}") from exc

    ids = range(cfg.n_paths)
    if threads == 1:
        results = [task(pid) for pid in ids]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(task, ids))
    rows = []
    for pid, (n_bins, res) in zip(ids, results):
        rows.extend(_row(cfg, pid, n_bins, r) for r in res)
    return rows


def brownian_local_time_mean(t: float, a: float = 0.0, sigma: float = 1.0) -> float:
    """E[L_t^a] for sigma * B (local time in qv units): sigma * (E|B_t - a/sigma| - |a/sigma|)."""
    b = a / sigma
    rt = math.sqrt(t)
    e_abs = 2.0 * rt * norm.pdf(b / rt) + b * (2.0 * norm.cdf(b / rt) - 1.0)
    return sigma * (e_abs - abs(b))
