"""Seeded, reproducible sample paths.

Random numbers come from a SplitMix64 counter stream: the k-th 64-bit word of a
stream with seed ``s`` is ``mix64(s + (k + 1) * GOLDEN)`` (mod 2**64), where
``mix64`` is the SplitMix64 finalizer (Stafford variant 13). Words are turned
into uniforms on (0, 1] from their top 53 bits and paired through Box-Muller.
All integer work is exact uint64 arithmetic, so the word stream is identical on
every platform; the Gaussian transform uses numpy's log/sqrt/cos/sin.

Per-path stream seeds are ``mix64(base_seed ^ mix64((path_id + 1) * GOLDEN))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .grid import Path, TimeGrid, realized_qv

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN_U = np.uint64(GOLDEN)


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int (reference, scalar)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z *= _M1
    z ^= z >> np.uint64(27)
    z *= _M2
    z ^= z >> np.uint64(31)
    return z


@dataclass(frozen=True)
class SeedPolicy:
    base_seed: int
    path_id: int = 0

    def __post_init__(self) -> None:
        if not (0 <= self.base_seed <= MASK64):
            raise ValueError("base_seed must fit in an unsigned 64-bit integer")
        if self.path_id < 0:
            raise ValueError("path_id must be >= 0")

    @property
    def stream_seed(self) -> int:
        return mix64(self.base_seed ^ mix64(((self.path_id + 1) * GOLDEN) & MASK64))


def uint64_stream(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """Words ``offset .. offset + n - 1`` of the SplitMix64 stream for ``seed``."""
    with np.errstate(over="ignore"):
        k = np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
        state = np.uint64(seed & MASK64) + k * _GOLDEN_U
        return _mix64_array(state)


def standard_normals(seed: int, n: int) -> np.ndarray:
    """n standard normal variates via Box-Muller on the seeded stream."""
    m = (n + 1) // 2
    words = uint64_stream(seed, 2 * m)
    u1 = ((words[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
    u2 = (words[1::2] >> np.uint64(11)).astype(np.float64) * 2.0**-53
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    out = np.empty(2 * m)
    out[0::2] = r * np.cos(theta)
    out[1::2] = r * np.sin(theta)
    return out[:n]


PROCESS_KINDS = ("brownian", "drifted_brownian", "ornstein_uhlenbeck", "geometric_brownian", "deterministic")
DETERMINISTIC_NAMES = ("linear", "sine", "zigzag", "constant")

_DEFAULT_PARAMS = {
    "brownian": {},
    "drifted_brownian": {"mu": 0.0, "sigma": 1.0},
    "ornstein_uhlenbeck": {"theta": 1.0, "sigma": 1.0, "x0": 0.0},
    "geometric_brownian": {"mu": 0.0, "sigma": 0.2, "x0": 1.0},
    "deterministic": {"name": "linear"},
}


@dataclass(frozen=True)
class ProcessSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in PROCESS_KINDS:
            raise ValueError(f"unknown process kind {self.kind!r}; expected one of {PROCESS_KINDS}")
        allowed = _DEFAULT_PARAMS[self.kind]
        unknown = set(self.params) - set(allowed)
        if unknown:
            raise ValueError(f"unknown parameter(s) {sorted(unknown)} for process {self.kind!r}")
        merged = {**allowed, **self.params}
        if self.kind == "deterministic":
            if merged["name"] not in DETERMINISTIC_NAMES:
                raise ValueError(f"unknown deterministic path {merged['name']!r}")
        else:
            for key, val in merged.items():
                if not isinstance(val, (int, float)) or not math.isfinite(val):
                    raise ValueError(f"parameter {key} of {self.kind!r} must be a finite number")
                merged[key] = float(val)
            if merged.get("sigma", 1.0) <= 0:
                raise ValueError("sigma must be > 0")
            if self.kind == "geometric_brownian" and merged["x0"] <= 0:
                raise ValueError("x0 must be > 0 for geometric_brownian")
            if self.kind == "ornstein_uhlenbeck" and merged["theta"] <= 0:
                raise ValueError("theta must be > 0 for ornstein_uhlenbeck")
        object.__setattr__(self, "params", merged)

    @property
    def is_stochastic(self) -> bool:
        return self.kind != "deterministic"

    def label(self) -> str:
        if not self.params:
            return self.kind
        if self.kind == "deterministic":
            return f"deterministic({self.params['name']})"
        args = ",".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{self.kind}({args})"


def deterministic_path(name: str, grid: TimeGrid) -> Path:
    s = grid.points
    if name == "linear":
        x = s.copy()
    elif name == "sine":
        x = np.sin(2.0 * np.pi * s)
    elif name == "zigzag":
        x = (np.arange(grid.n_steps + 1) % 2).astype(float)
    elif name == "constant":
        x = np.zeros_like(s)
    else:
        raise ValueError(f"unknown deterministic path {name!r}; expected one of {DETERMINISTIC_NAMES}")
    return Path(grid, x, realized_qv(x), label=f"deterministic({name})")


def _analytic_qv(spec: ProcessSpec, grid: TimeGrid, x: np.ndarray) -> np.ndarray:
    p = spec.params
    s = grid.points
    if spec.kind == "brownian":
        return s.copy()
    if spec.kind in ("drifted_brownian", "ornstein_uhlenbeck"):
        return p["sigma"] ** 2 * s
    if spec.kind == "geometric_brownian":
        # trapezoid rule for the integral of sigma^2 X^2 ds along the sampled path
        y = p["sigma"] ** 2 * x**2
        out = np.zeros_like(s)
        np.cumsum(0.5 * (y[1:] + y[:-1]) * grid.dt, out=out[1:])
        return out
    return realized_qv(x)


def simulate(spec: ProcessSpec, grid: TimeGrid, seed: SeedPolicy, qv_mode: str = "realized") -> Path:
    """One sample path of ``spec`` on ``grid``; a pure function of its arguments."""
    if qv_mode not in ("realized", "analytic"):
        raise ValueError(f"qv_mode must be 'realized' or 'analytic', got {qv_mode!r}")
    if spec.kind == "deterministic":
        return deterministic_path(spec.params["name"], grid)

    p = spec.params
    dt = grid.dt
    n = grid.n_steps
    z = standard_normals(seed.stream_seed, n)
    x = np.empty(n + 1)
    if spec.kind == "brownian":
        x[0] = 0.0
        np.cumsum(math.sqrt(dt) * z, out=x[1:])
    elif spec.kind == "drifted_brownian":
        x[0] = 0.0
        np.cumsum(p["mu"] * dt + p["sigma"] * math.sqrt(dt) * z, out=x[1:])
    elif spec.kind == "ornstein_uhlenbeck":
        # exact AR(1) transition of dX = -theta X dt + sigma dW
        a = math.exp(-p["theta"] * dt)
        sd = p["sigma"] * math.sqrt(-math.expm1(-2.0 * p["theta"] * dt) / (2.0 * p["theta"]))
        x[0] = p["x0"]
        x[1:] = lfilter([1.0], [1.0, -a], sd * z, zi=[a * x[0]])[0]
    else:  # geometric_brownian, exact log-normal transition
        incr = (p["mu"] - 0.5 * p["sigma"] ** 2) * dt + p["sigma"] * math.sqrt(dt) * z
        x[0] = p["x0"]
        np.cumsum(incr, out=x[1:])
        x[1:] = p["x0"] * np.exp(x[1:])

    qv = realized_qv(x) if qv_mode == "realized" else _analytic_qv(spec, grid, x)
    return Path(grid, x, qv, label=spec.label())
