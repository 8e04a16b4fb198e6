"""Both sides of the generalized occupation-time formulas.

Stieltjes sums against local time use left-edge evaluation paired with the
increment across that edge::

    int F d_x L  ~  sum_j F(x_j) * (L[j] - L[j-1]),   L[-1] := 0,

and the two-parameter integral uses rectangular increments of the sheet with
F evaluated at the lower-left corner ``(s_k, x_j)``.

Sign convention. For F = 1{x <= a} the forward quotient
``(1/eps) sum {F(X) - F(X + eps)} dqv`` is the qv mass of (a - eps, a] over
eps, i.e. +L^a, and for F(x) = x it equals -<X>_t = int x d_x L. So the forward
estimator converges to ``+int F d_x L``; this is the ``resolved`` convention.
The ``paper`` convention attaches a minus sign to the forward target and is
kept only so reports can show the mismatch. Backward and symmetric targets
(-I and +I) agree under both conventions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .functions import TIME_SPACE, TestFunction, indicator
from .grid import Path, RangeError, SpaceGrid
from .localtime import LocalTimeField, LocalTimeSheet, edge_bin, local_time_sheet, occupation_local_time

REL_FLOOR = 1e-8
VARIANTS = ("forward", "backward", "symmetric")
SIGN_CONVENTIONS = ("resolved", "paper")


@dataclass(frozen=True)
class EstimatorResult:
    epsilon: float
    lhs: float
    rhs: float
    abs_err: float
    rel_err: float
    variant: str
    sign_convention: str = "resolved"

    @classmethod
    def compare(cls, epsilon: float, lhs: float, rhs: float, variant: str, sign_convention: str = "resolved"):
        err = abs(lhs - rhs)
        return cls(float(epsilon), float(lhs), float(rhs), err, err / max(abs(rhs), REL_FLOOR), variant, sign_convention)


def _eval(f, s, x):
    if isinstance(f, TestFunction) and f.arity == TIME_SPACE:
        return f(s, x)
    return f(x)


def _steps(path: Path, t: float | None):
    i_end = path.grid.n_steps if t is None else path.grid.index_of(t)
    return path.grid.points[:i_end], path.values[:i_end], np.diff(path.qv[: i_end + 1])


def _require_zero_margins(values: np.ndarray) -> None:
    if values[0] != 0.0 or values[-1] != 0.0:
        raise RangeError("local-time support touches the space-grid boundary; widen the grid")


def _edge_stieltjes(f_edges: np.ndarray, lt: np.ndarray) -> float:
    jumps = np.diff(lt, prepend=0.0)
    return float(np.dot(f_edges, jumps))


def stieltjes_space_integral(f, field: LocalTimeField) -> float:
    """sum_j F(x_j) (L[j] - L[j-1]); first and last bins must be empty."""
    _require_zero_margins(field.values)
    return _edge_stieltjes(np.asarray(f(field.space.left_edges), dtype=float), field.values)


def lhs_forward(f, path: Path, eps: float, t: float | None = None) -> float:
    """(1/eps) sum_{s_i < t} {F(X_i) - F(X_i + eps)} dqv_i."""
    if eps <= 0:
        raise ValueError("eps must be > 0")
    s, x, dqv = _steps(path, t)
    return float(np.dot(_eval(f, s, x) - _eval(f, s, x + eps), dqv) / eps)


def lhs_backward(f, path: Path, eps: float, t: float | None = None) -> float:
    """(1/eps) sum_{s_i < t} {F(s_i, X_i) - F(s_i, X_i - eps)} dqv_i."""
    if eps <= 0:
        raise ValueError("eps must be > 0")
    s, x, dqv = _steps(path, t)
    return float(np.dot(_eval(f, s, x) - _eval(f, s, x - eps), dqv) / eps)


def lhs_symmetric(f, path: Path, eps: float, t: float | None = None) -> float:
    """(1/(2 eps)) sum_{s_i < t} {F(s_i, X_i - eps) - F(s_i, X_i + eps)} dqv_i."""
    if eps <= 0:
        raise ValueError("eps must be > 0")
    s, x, dqv = _steps(path, t)
    return float(np.dot(_eval(f, s, x - eps) - _eval(f, s, x + eps), dqv) / (2.0 * eps))


LHS = {"forward": lhs_forward, "backward": lhs_backward, "symmetric": lhs_symmetric}


def identity_check(f, path: Path, space: SpaceGrid, m: int) -> tuple[float, float, float]:
    """Exact discrete identity between the mollified Stieltjes sum and the quotient sum.

    With eps = m * delta and F read at bin left edges (a sample in bin j sees
    F(x_j); shifted by eps it sees F(x_{j+m})):

        lhs = (1/eps) sum_i {F(x_{j_i}) - F(x_{j_i + m})} dqv_i
        rhs = sum_j H_j (L[j] - L[j-1]),   H_j = (delta/eps) sum_{k=j}^{j+m-1} F(x_k)

    Summation by parts turns rhs into (delta/eps) sum_j (F_j - F_{j+m}) L[j],
    which is lhs term by term. The pairing of H_j with L[j] - L[j-1] (not
    L[j+1] - L[j]) is the one that makes this exact; see the brute-force
    convention test in the suite.
    """
    if int(m) != m or m < 1:
        raise ValueError("m must be an integer >= 1")
    m = int(m)
    field = occupation_local_time(path, space)
    j = space.bin_index(path.values[:-1])
    if j.size and (j.min() < m or j.max() > space.n_bins - 1 - m):
        raise RangeError(f"identity_check needs {m} empty bin(s) of margin on each side of the path")
    delta = space.delta
    eps = m * delta
    f_edges = np.asarray(f(space.edge(np.arange(space.n_bins + m))), dtype=float)
    lhs = float(np.dot(f_edges[j] - f_edges[j + m], path.dqv) / eps)
    csum = np.concatenate(([0.0], np.cumsum(f_edges)))
    h = (delta / eps) * (csum[m : m + space.n_bins] - csum[: space.n_bins])
    rhs = _edge_stieltjes(h, field.values)
    return lhs, rhs, abs(lhs - rhs)


def _sheet_support_check(sheet: LocalTimeSheet) -> None:
    if sheet.inc_j.size and (sheet.inc_j.min() == 0 or sheet.inc_j.max() == sheet.space.n_bins - 1):
        raise RangeError("local-time sheet support touches the space-grid boundary; widen the grid")


def two_param_integral(f, sheet: LocalTimeSheet) -> float:
    """sum_k sum_j F(s_k, x_j) * rect_increment(k, j) of the sheet.

    rect_increment(k, j) = D(k, j) - D(k, j-1) with D(k, .) = L(s_{k+1}, .) - L(s_k, .).
    Each stored time increment d at (k, j) therefore contributes
    d * (F(s_k, x_j) - F(s_k, x_{j+1})).
    """
    _sheet_support_check(sheet)
    s = sheet.checkpoints[sheet.inc_k]
    x_lo = sheet.space.edge(sheet.inc_j)
    x_hi = sheet.space.edge(sheet.inc_j + 1)
    return float(np.dot(sheet.inc_d, _eval(f, s, x_lo) - _eval(f, s, x_hi)))


def occupation_formula_check(f, path: Path, sheet: LocalTimeSheet) -> tuple[float, float, float]:
    """lhs = sum_i f(s_i, X_i) dqv_i;  rhs = sum_j delta sum_k f(s_k, x_j) (L(s_{k+1}, x_j) - L(s_k, x_j))."""
    i_end = path.grid.index_of(float(sheet.checkpoints[-1]))
    s, x, dqv = path.grid.points[:i_end], path.values[:i_end], np.diff(path.qv[: i_end + 1])
    lhs = float(np.dot(_eval(f, s, x), dqv))
    sk = sheet.checkpoints[sheet.inc_k]
    xj = sheet.space.edge(sheet.inc_j)
    rhs = float(sheet.space.delta * np.dot(_eval(f, sk, xj), sheet.inc_d))
    return lhs, rhs, abs(lhs - rhs)


def target_sign(variant: str, sign_convention: str) -> float:
    """Sign s with lim lhs_variant = s * I, I the local-time integral of F."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if sign_convention not in SIGN_CONVENTIONS:
        raise ValueError(f"unknown sign convention {sign_convention!r}")
    if variant == "forward":
        return 1.0 if sign_convention == "resolved" else -1.0
    return -1.0 if variant == "backward" else 1.0


def local_time_integral(f, path: Path, space: SpaceGrid, checkpoints=None) -> float:
    """int F d_x L_t for space functions, the two-parameter integral for F(s, x)."""
    if isinstance(f, TestFunction) and f.arity == TIME_SPACE:
        return two_param_integral(f, local_time_sheet(path, space, checkpoints))
    return stieltjes_space_integral(f, occupation_local_time(path, space))


def check_ladder(eps_ladder, delta: float) -> list[float]:
    ladder = [float(e) for e in eps_ladder]
    if not ladder:
        raise ValueError("eps ladder is empty")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("eps ladder must be strictly decreasing")
    if ladder[-1] < delta * (1 - 1e-12):
        raise ValueError(f"eps ladder goes below the bin width {delta!r}; sub-bin shifts alias")
    return ladder


def theorem_convergence(
    f,
    variant: str,
    path: Path,
    eps_ladder,
    space: SpaceGrid,
    sign_convention: str = "resolved",
    checkpoints=None,
) -> list[EstimatorResult]:
    """One EstimatorResult per eps: lhs_variant(eps) against sign * (local-time integral).

    ``sign_convention='both'`` returns the resolved and the paper rows for each eps.
    """
    ladder = check_ladder(eps_ladder, space.delta)
    conventions = SIGN_CONVENTIONS if sign_convention == "both" else (sign_convention,)
    integral = local_time_integral(f, path, space, checkpoints)
    lhs_fn = LHS[variant]
    out = []
    for eps in ladder:
        lhs = lhs_fn(f, path, eps)
        for conv in conventions:
            out.append(EstimatorResult.compare(eps, lhs, target_sign(variant, conv) * integral, variant, conv))
    return out


def count_inversions(errors) -> int:
    """Number of places where the error grows as eps shrinks."""
    e = list(errors)
    return sum(1 for a, b in zip(e, e[1:]) if b > a)


def sign_triple(path: Path, space: SpaceGrid, a: float) -> dict[str, tuple[float, float, float]]:
    """Forward/backward/symmetric quotients of 1{x <= a} at eps = delta.

    Returns variant -> (lhs, target, tolerance) with targets +L^a, -L^a, +L^a
    (L^a the bin [a, a + delta)) and tolerance equal to two bins' worth of
    bin-to-bin change, |L[J-1] - L[J]| + |L[J] - L[J+1]|.
    """
    field = occupation_local_time(path, space)
    jb = edge_bin(space, a)
    lt = field.values
    target = lt[jb]
    tol = abs(lt[jb - 1] - lt[jb]) + abs(lt[jb] - lt[jb + 1])
    f = indicator(a)
    eps = space.delta
    return {
        "forward": (lhs_forward(f, path, eps), target, tol),
        "backward": (lhs_backward(f, path, eps), -target, tol),
        "symmetric": (lhs_symmetric(f, path, eps), target, tol),
    }
