"""Uniform time/space grids, sampled paths and realized quadratic variation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class RangeError(ValueError):
    """A path (or field support) does not fit inside the space grid."""


@dataclass(frozen=True)
class TimeGrid:
    t_end: float
    n_steps: int

    def __post_init__(self) -> None:
        if not (isinstance(self.t_end, (int, float)) and math.isfinite(self.t_end) and self.t_end > 0):
            raise ValueError(f"t_end must be a positive finite number, got {self.t_end!r}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be an integer >= 1, got {self.n_steps!r}")
        object.__setattr__(self, "t_end", float(self.t_end))
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @property
    def dt(self) -> float:
        return self.t_end / self.n_steps

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    def index_of(self, t: float) -> int:
        """Index i with s_i == t; raises ValueError if t is not a grid point."""
        k = round(t / self.dt)
        if k < 0 or k > self.n_steps or abs(k * self.dt - t) > 1e-9 * self.dt:
            raise ValueError(f"t={t!r} is not a point of the time grid (dt={self.dt!r})")
        return int(k)


def make_time_grid(t_end: float, n_steps: int) -> TimeGrid:
    return TimeGrid(t_end, n_steps)


@dataclass(frozen=True)
class SpaceGrid:
    """Bins [x_j, x_j + delta), j = 0..n_bins-1, partitioning [x_min, x_max)."""

    x_min: float
    x_max: float
    n_bins: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max) and self.x_min < self.x_max):
            raise ValueError(f"need finite x_min < x_max, got ({self.x_min!r}, {self.x_max!r})")
        if int(self.n_bins) != self.n_bins or self.n_bins < 1:
            raise ValueError(f"n_bins must be an integer >= 1, got {self.n_bins!r}")
        object.__setattr__(self, "x_min", float(self.x_min))
        object.__setattr__(self, "x_max", float(self.x_max))
        object.__setattr__(self, "n_bins", int(self.n_bins))

    @classmethod
    def from_width(cls, x_min: float, delta: float, n_bins: int) -> "SpaceGrid":
        return cls(x_min, x_min + n_bins * delta, n_bins)

    @property
    def delta(self) -> float:
        return (self.x_max - self.x_min) / self.n_bins

    def edge(self, j) -> np.ndarray | float:
        """Left edge x_j of bin j; j may run past the grid (used by shifted sums)."""
        return self.x_min + np.asarray(j) * self.delta

    @property
    def left_edges(self) -> np.ndarray:
        return self.edge(np.arange(self.n_bins))

    def bin_index(self, x) -> np.ndarray:
        """Bin index of each x, unchecked (may be < 0 or >= n_bins)."""
        return np.floor((np.asarray(x, dtype=float) - self.x_min) / self.delta).astype(np.int64)

    def checked_bin_index(self, x) -> np.ndarray:
        j = self.bin_index(x)
        if j.size and (j.min() < 0 or j.max() >= self.n_bins):
            xs = np.asarray(x)
            raise RangeError(
                f"values in [{xs.min()!r}, {xs.max()!r}] fall outside the space grid "
                f"[{self.x_min!r}, {self.x_max!r})"
            )
        return j


@dataclass(frozen=True, eq=False)
class Path:
    grid: TimeGrid
    values: np.ndarray
    qv: np.ndarray
    label: str = field(default="")

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        qv = np.asarray(self.qv, dtype=float)
        n = self.grid.n_steps + 1
        if values.shape != (n,) or qv.shape != (n,):
            raise ValueError(f"values and qv must have length n_steps + 1 = {n}")
        if qv[0] != 0.0:
            raise ValueError("qv[0] must be 0")
        if np.any(np.diff(qv) < 0):
            raise ValueError("qv must be nondecreasing")
        values.setflags(write=False)
        qv.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "qv", qv)

    @property
    def times(self) -> np.ndarray:
        return self.grid.points

    @property
    def dqv(self) -> np.ndarray:
        return np.diff(self.qv)

    def with_qv(self, qv) -> "Path":
        """Same values, prescribed quadratic variation (e.g. synthetic increments)."""
        return Path(self.grid, self.values, qv, self.label)


def realized_qv(values) -> np.ndarray:
    """Cumulative sum of squared increments, starting at 0."""
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("realized_qv needs a non-empty 1-d sequence")
    out = np.zeros(x.size)
    np.cumsum(np.diff(x) ** 2, out=out[1:])
    return out


def path_range(path: Path) -> tuple[float, float]:
    return float(path.values.min()), float(path.values.max())


def covering_space_grid(lo: float, hi: float, delta: float, margin_bins: int = 1) -> SpaceGrid:
    """Grid of width delta, edges on multiples of delta, covering [lo, hi] with
    at least ``margin_bins`` empty bins on each side."""
    j_lo = math.floor(lo / delta) - margin_bins
    j_hi = math.floor(hi / delta) + margin_bins + 1
    return SpaceGrid(j_lo * delta, j_hi * delta, j_hi - j_lo)
