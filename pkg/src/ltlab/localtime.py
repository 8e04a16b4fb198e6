"""Occupation-density local time, local-time sheets and the Tanaka cross-check.

Bins are left-closed, ``[x_j, x_j + delta)``, and a sample X_{s_i} carries the
quadratic-variation increment ``qv[i+1] - qv[i]`` of the step it starts. With
realized qv this makes ``sum_j L[j] * delta == qv_t`` up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Path, SpaceGrid


@dataclass(frozen=True, eq=False)
class LocalTimeField:
    space: SpaceGrid
    t: float
    values: np.ndarray

    def at_edge(self, a: float) -> float:
        """Value of the bin [a, a + delta); ``a`` must be a bin edge."""
        return float(self.values[edge_bin(self.space, a)])

    def coarsen(self, factor: int = 2) -> "LocalTimeField":
        """Merge ``factor`` adjacent bins: the width-weighted average of the fine bins."""
        if self.space.n_bins % factor:
            raise ValueError("n_bins must be divisible by the coarsening factor")
        coarse = SpaceGrid(self.space.x_min, self.space.x_max, self.space.n_bins // factor)
        return LocalTimeField(coarse, self.t, self.values.reshape(-1, factor).mean(axis=1))


def edge_bin(space: SpaceGrid, a: float) -> int:
    j = (a - space.x_min) / space.delta
    k = round(j)
    if abs(j - k) > 1e-9:
        raise ValueError(f"level {a!r} is not a bin edge of the space grid")
    if not 0 <= k < space.n_bins:
        raise ValueError(f"level {a!r} lies outside the space grid")
    return int(k)


def occupation_local_time(path: Path, space: SpaceGrid, t: float | None = None) -> LocalTimeField:
    """L[j] = (1/delta) * sum_{s_i < t} 1{X_{s_i} in bin j} * (qv[i+1] - qv[i])."""
    i_end = path.grid.n_steps if t is None else path.grid.index_of(t)
    x = path.values[:i_end]
    j = space.checked_bin_index(x)
    dqv = np.diff(path.qv[: i_end + 1])
    vals = np.bincount(j, weights=dqv, minlength=space.n_bins) / space.delta
    return LocalTimeField(space, float(path.grid.points[i_end]), vals)


@dataclass(frozen=True, eq=False)
class LocalTimeSheet:
    """Local time at checkpoint times, stored as sparse time increments.

    Row k of ``values`` is L at ``checkpoints[k]``; rows are rebuilt from the
    triplets ``(k, j, d)`` meaning ``L[k+1, j] - L[k, j] += d``. Dense sheets
    (one checkpoint per grid step) have one triplet per step, so they stay
    cheap even when the dense matrix would not fit in memory.
    """

    space: SpaceGrid
    checkpoints: np.ndarray
    inc_k: np.ndarray
    inc_j: np.ndarray
    inc_d: np.ndarray

    @property
    def n_rows(self) -> int:
        return len(self.checkpoints)

    @property
    def values(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.space.n_bins))
        np.add.at(out, (self.inc_k + 1, self.inc_j), self.inc_d)
        return np.cumsum(out, axis=0)

    def final_field(self) -> LocalTimeField:
        vals = np.bincount(self.inc_j, weights=self.inc_d, minlength=self.space.n_bins)
        return LocalTimeField(self.space, float(self.checkpoints[-1]), vals)


def local_time_sheet(path: Path, space: SpaceGrid, checkpoints=None) -> LocalTimeSheet:
    """Sheet at the given checkpoint times (default: every grid point)."""
    grid = path.grid
    if checkpoints is None:
        idx = np.arange(grid.n_steps + 1)
    else:
        idx = np.array([grid.index_of(float(t)) for t in checkpoints], dtype=np.int64)
        if idx.size < 2 or idx[0] != 0 or np.any(np.diff(idx) <= 0):
            raise ValueError("checkpoints must be increasing grid times starting at 0")
    i_end = int(idx[-1])
    j = space.checked_bin_index(path.values[:i_end])
    dqv = np.diff(path.qv[: i_end + 1])
    # step i contributes to the interval [s_k, s_{k+1}) that contains s_i
    k = np.searchsorted(idx, np.arange(i_end), side="right") - 1
    key = k * space.n_bins + j
    uniq, inv = np.unique(key, return_inverse=True)
    d = np.bincount(inv, weights=dqv) / space.delta
    return LocalTimeSheet(space, grid.points[idx], uniq // space.n_bins, uniq % space.n_bins, d)


def tanaka_local_time(path: Path, a: float) -> float:
    """|X_t - a| - |X_0 - a| - sum_i sgn(X_{s_i} - a) (X_{s_{i+1}} - X_{s_i}), with sgn(0) = -1."""
    x = path.values
    sgn = np.where(x[:-1] - a > 0, 1.0, -1.0)
    return float(abs(x[-1] - a) - abs(x[0] - a) - np.dot(sgn, np.diff(x)))


def conservation_defect(field: LocalTimeField, qv_t: float) -> float:
    return abs(float(np.sum(field.values)) * field.space.delta - qv_t)
