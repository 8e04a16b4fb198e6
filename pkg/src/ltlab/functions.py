"""Catalog of test functions F(x) and F(s, x) with exact evaluation.

Every member carries a canonical text form (``spec``) that the config parser
reads back, its breakpoints (points where it is not smooth) and, where known,
an exact antiderivative in x.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

SPACE = "space_only"
TIME_SPACE = "time_space"


@dataclass(frozen=True, eq=False)
class TestFunction:
    name: str
    spec: str
    arity: str
    rule: Callable
    antiderivative_x: Callable | None = None
    breakpoints: tuple[float, ...] = field(default=())

    __test__ = False  # keep pytest from collecting this class

    def __call__(self, *args):
        return self.rule(*args)

    def __eq__(self, other) -> bool:
        return isinstance(other, TestFunction) and self.spec == other.spec

    def __hash__(self) -> int:
        return hash(self.spec)

    def __repr__(self) -> str:
        return f"TestFunction({self.spec})"


def _fmt(v: float) -> str:
    return repr(float(v))


def constant(c: float = 1.0) -> TestFunction:
    c = float(c)
    return TestFunction(
        "constant",
        f"constant({_fmt(c)})",
        SPACE,
        lambda x: np.full(np.shape(x), c),
        lambda x: c * np.asarray(x, dtype=float),
    )


def linear() -> TestFunction:
    return TestFunction(
        "linear",
        "linear()",
        SPACE,
        lambda x: np.asarray(x, dtype=float) * 1.0,
        lambda x: 0.5 * np.asarray(x, dtype=float) ** 2,
    )


def indicator(a: float = 0.0) -> TestFunction:
    """1{x <= a}: left-continuous, one unit jump at a."""
    a = float(a)
    return TestFunction(
        "indicator",
        f"indicator({_fmt(a)})",
        SPACE,
        lambda x: (np.asarray(x) <= a).astype(float),
        lambda x: np.minimum(np.asarray(x, dtype=float), a),
        (a,),
    )


def step_combo(a, w) -> TestFunction:
    """sum_k w_k 1{x <= a_k}."""
    a = np.asarray(a, dtype=float).ravel()
    w = np.asarray(w, dtype=float).ravel()
    if a.size == 0 or a.shape != w.shape:
        raise ValueError("step_combo needs equally many breakpoints and weights (at least one)")
    spec = f"step_combo([{', '.join(map(_fmt, a))}], [{', '.join(map(_fmt, w))}])"

    def rule(x):
        x = np.asarray(x, dtype=float)
        return (x[..., None] <= a).astype(float) @ w

    def anti(x):
        x = np.asarray(x, dtype=float)
        return np.minimum(x[..., None], a) @ w

    return TestFunction("step_combo", spec, SPACE, rule, anti, tuple(sorted(set(a.tolist()))))


def holder(alpha: float = 0.75, c: float = 0.0) -> TestFunction:
    """|x - c|**alpha with alpha in (1/2, 1]; finite p-variation for p >= 1/alpha."""
    alpha, c = float(alpha), float(c)
    if not 0.5 < alpha <= 1.0:
        raise ValueError("holder exponent must lie in (1/2, 1]")

    def anti(x):
        d = np.asarray(x, dtype=float) - c
        return np.sign(d) * np.abs(d) ** (alpha + 1.0) / (alpha + 1.0)

    return TestFunction(
        "holder",
        f"holder({_fmt(alpha)}, {_fmt(c)})",
        SPACE,
        lambda x: np.abs(np.asarray(x, dtype=float) - c) ** alpha,
        anti,
        (c,),
    )


def cosine() -> TestFunction:
    return TestFunction(
        "cosine", "cosine()", SPACE, lambda x: np.cos(np.asarray(x, dtype=float)), lambda x: np.sin(np.asarray(x, dtype=float))
    )


TIME_FACTORS: dict[str, Callable] = {
    "one": lambda s: np.ones(np.shape(s)),
    "s": lambda s: np.asarray(s, dtype=float) * 1.0,
    "exp_neg": lambda s: np.exp(-np.asarray(s, dtype=float)),
}


def product(g: str, h: TestFunction) -> TestFunction:
    """F(s, x) = g(s) * h(x) for a named time factor g and a space member h."""
    if g not in TIME_FACTORS:
        raise ValueError(f"unknown time factor {g!r}; expected one of {sorted(TIME_FACTORS)}")
    if h.arity != SPACE:
        raise ValueError("product needs a space_only inner function")
    gf = TIME_FACTORS[g]
    anti = None
    if h.antiderivative_x is not None:
        anti = lambda s, x: gf(s) * h.antiderivative_x(x)  # noqa: E731
    return TestFunction(
        "product",
        f"product({g!r}, {h.spec})",
        TIME_SPACE,
        lambda s, x: gf(s) * h(x),
        anti,
        h.breakpoints,
    )


def as_time_space(f: TestFunction) -> TestFunction:
    return f if f.arity == TIME_SPACE else product("one", f)


def from_callable(rule: Callable, arity: str = SPACE, name: str = "custom") -> TestFunction:
    """Wrap an arbitrary vectorized rule (no antiderivative; mollified by quadrature)."""
    return TestFunction(name, f"{name}()", arity, rule)


CATALOG: dict[str, Callable[..., TestFunction]] = {
    "constant": constant,
    "linear": linear,
    "indicator": indicator,
    "step_combo": step_combo,
    "holder": holder,
    "cosine": cosine,
    "product": product,
}


def _literal(node: ast.AST):
    if isinstance(node, ast.Call):
        return _build(node)
    if isinstance(node, ast.Name):
        # bare catalog name without parentheses, e.g. ``linear``
        return _build(ast.Call(func=node, args=[], keywords=[]))
    return ast.literal_eval(node)


def _build(node: ast.AST) -> TestFunction:
    if isinstance(node, ast.Name):
        node = ast.Call(func=node, args=[], keywords=[])
    if not (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)):
        raise ValueError("expected a catalog call such as indicator(0.0)")
    name = node.func.id
    if name not in CATALOG:
        raise ValueError(f"unknown test function {name!r}; expected one of {sorted(CATALOG)}")
    args = [_literal(a) for a in node.args]
    kwargs = {k.arg: _literal(k.value) for k in node.keywords}
    try:
        return CATALOG[name](*args, **kwargs)
    except TypeError as exc:
        raise ValueError(f"bad arguments for {name}: {exc}") from None


def parse_function(text: str) -> TestFunction:
    """Parse a catalog expression like ``product('s', indicator(0.0))``."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse test function {text!r}: {exc.msg}") from None
    return _build(tree.body)
