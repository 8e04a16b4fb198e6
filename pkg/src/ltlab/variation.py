"""p-variation on sample points, the sliding-window mollifier and (p, q)-variation."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .functions import SPACE, TIME_SPACE, TestFunction

MIDPOINT_SUBSTEPS = 64


def _turning_points(x: np.ndarray) -> np.ndarray:
    """Endpoints plus strict local extrema; runs of equal values collapse to one point.

    For p >= 1 an optimal partition can always be moved onto these points: the
    sum |y - u|^p + |v - y|^p is convex in y, so a partition point sitting on a
    monotone stretch never loses by sliding to the end of that stretch.
    """
    keep = np.ones(x.size, dtype=bool)
    keep[1:] = x[1:] != x[:-1]
    x = x[keep]
    if x.size <= 2:
        return x
    d = np.diff(x)
    interior = np.sign(d[1:]) != np.sign(d[:-1])
    return x[np.concatenate(([True], interior, [True]))]


def p_variation(samples, p: float) -> float:
    """max over sub-partitions of the sample points of sum |F(x_{i+1}) - F(x_i)|^p.

    Exact dynamic programme: best[j] = max_{m<j} best[m] + |x_j - x_m|^p,
    run on the turning points only.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p!r}")
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("p_variation needs at least two samples")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    x = _turning_points(x)
    if x.size < 2:
        return 0.0
    if p == 1:
        return float(np.sum(np.abs(np.diff(x))))
    best = np.zeros(x.size)
    for j in range(1, x.size):
        best[j] = np.max(best[:j] + np.abs(x[j] - x[:j]) ** p)
    return float(best[-1])


def mollify_1d(f: TestFunction, eps: float) -> Callable:
    """H_eps(x) = (1/eps) * integral of F over [x, x + eps].

    Uses the exact antiderivative when the function has one. Otherwise a
    composite midpoint rule with 64 substeps; its error is at most
    (total variation of F on the window) / 64 for piecewise monotone F, and
    eps^2 * max|F''| / (24 * 64^2) for smooth F.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if f.arity != SPACE:
        raise ValueError("mollify_1d needs a space_only function; use mollify_2d")
    if f.antiderivative_x is not None:
        G = f.antiderivative_x
        return lambda x: (G(np.asarray(x, dtype=float) + eps) - G(x)) / eps
    offsets = (np.arange(MIDPOINT_SUBSTEPS) + 0.5) * (eps / MIDPOINT_SUBSTEPS)

    def h(x):
        x = np.asarray(x, dtype=float)
        return np.mean(f(x[..., None] + offsets), axis=-1)

    return h


def mollify_2d(f: TestFunction, eps: float) -> Callable:
    """H_eps(s, x) = (1/eps) * integral of F(s, y) over y in [x, x + eps]."""
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if f.arity != TIME_SPACE:
        raise ValueError("mollify_2d needs a time_space function")
    if f.antiderivative_x is not None:
        G = f.antiderivative_x
        return lambda s, x: (G(s, np.asarray(x, dtype=float) + eps) - G(s, x)) / eps
    offsets = (np.arange(MIDPOINT_SUBSTEPS) + 0.5) * (eps / MIDPOINT_SUBSTEPS)

    def h(s, x):
        s, x = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(x, dtype=float))
        return np.mean(f(s[..., None], x[..., None] + offsets), axis=-1)

    return h


def mollifier_contraction_check(f: TestFunction, eps: float, p: float, samples) -> tuple[float, float, bool]:
    """Grid p-variation of H_eps on ``samples`` against that of F on the window H reads.

    H_eps on [lo, hi] averages F over [lo, hi + eps], so F is sampled on
    ``samples``, ``samples + eps`` and its breakpoints in that range. ok iff
    vH <= vF (1 + 1e-9) + 1e-12 max(1, sup|F|)^p; the absolute term absorbs
    rounding in H_eps when F is (nearly) constant.

    The sample points should include F's breakpoints and turning points so the
    grid value of F equals its true p-variation.
    """
    xs = np.asarray(samples, dtype=float)
    bp = [b for b in f.breakpoints if xs.min() <= b <= xs.max() + eps]
    fx = f(np.unique(np.concatenate([xs, xs + eps, bp])))
    v_f = p_variation(fx, p)
    v_h = p_variation(mollify_1d(f, eps)(xs), p)
    atol = 1e-12 * max(1.0, float(np.max(np.abs(fx)))) ** p
    return v_f, v_h, bool(v_h <= v_f * (1.0 + 1e-9) + atol)


def contraction_grid(f: TestFunction, lo: float, hi: float, n: int) -> np.ndarray:
    """Uniform points on [lo, hi] merged with F's breakpoints inside it."""
    pts = np.linspace(lo, hi, n)
    bp = [b for b in f.breakpoints if lo <= b <= hi]
    return np.unique(np.concatenate([pts, bp]))


def rectangular_increments(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    return v[1:, 1:] - v[1:, :-1] - v[:-1, 1:] + v[:-1, :-1]


def pq_variation_grid(values, p: float, q: float) -> float:
    """(sum_k (sum_j |rect increment(k, j)|^p)^(q/p))^(1/q) on the fixed lattice."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] < 2:
        raise ValueError("pq_variation_grid needs a lattice of at least 2x2 values")
    if p < 1 or q < 1:
        raise ValueError("p and q must be >= 1")
    r = np.abs(rectangular_increments(v))
    rows = np.sum(r**p, axis=1) ** (q / p)
    return float(np.sum(rows) ** (1.0 / q))
