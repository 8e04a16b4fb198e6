"""Line-oriented ``key = value`` experiment configuration.

Grammar::

    # comment                      (whole-line or trailing)
    key = value

Lists are comma separated. ``process`` and ``function`` take catalog
expressions, e.g. ``ornstein_uhlenbeck(theta=2.0, sigma=0.5)`` or
``step_combo([-0.5, 0.5], [1.0, 1.0])``. Unknown keys are rejected.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field, fields, replace

from .functions import TestFunction, parse_function, step_combo
from .simulate import MASK64, ProcessSpec

EXPERIMENTS = (
    "conservation",
    "theorem1",
    "theorem2",
    "identity27",
    "occupation31",
    "localtime_stats",
    "pvariation_audit",
)


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line = line
        self.key = key
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


def _default_function() -> TestFunction:
    return step_combo([-0.5, 0.0, 0.5], [1.0, 1.0, 1.0])


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    process: ProcessSpec = field(default_factory=lambda: ProcessSpec("brownian"))
    t_end: float = 1.0
    n_steps: int = 4096
    n_paths: int = 10
    base_seed: int = 20240601
    space: tuple[float, float, int] | None = None  # None means "auto"
    bin_width: float = 2.0**-8
    align_breakpoints: bool = False
    eps_ladder: tuple[float, ...] = (2.0**-3, 2.0**-4, 2.0**-5, 2.0**-6, 2.0**-7)
    function: TestFunction = field(default_factory=_default_function)
    variants: tuple[str, ...] = ()  # empty means the experiment's default
    sign_convention: str = "resolved"
    qv_mode: str = "realized"
    level: float = 0.0
    checkpoints: int = 0  # 0 means dense (every grid step)
    p_values: tuple[float, ...] = (1.0, 1.5, 1.9)
    audit_range: tuple[float, float] = (-1.0, 1.0)
    audit_points: int = 401
    output: str = "-"
    format: str = "csv"

    @property
    def delta(self) -> float:
        if self.space is None:
            return self.bin_width
        x_min, x_max, n_bins = self.space
        return (x_max - x_min) / n_bins

    def resolved_variants(self) -> tuple[str, ...]:
        if self.variants:
            return self.variants
        return {"theorem1": ("forward",), "theorem2": ("backward", "symmetric")}.get(self.experiment, ())

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}", key="experiment")
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ConfigError("t_end must be > 0", key="t_end")
        if self.n_steps < 1:
            raise ConfigError("n_steps must be >= 1", key="n_steps")
        if self.n_paths < 1:
            raise ConfigError("n_paths must be >= 1", key="n_paths")
        if not 0 <= self.base_seed <= MASK64:
            raise ConfigError("base_seed must be an unsigned 64-bit integer", key="base_seed")
        if self.space is not None:
            x_min, x_max, n_bins = self.space
            if not (x_min < x_max and n_bins >= 1):
                raise ConfigError("space needs x_min < x_max and n_bins >= 1", key="space")
        if not self.bin_width > 0:
            raise ConfigError("bin_width must be > 0", key="bin_width")
        ladder = self.eps_ladder
        if not ladder:
            raise ConfigError("eps_ladder must not be empty", key="eps_ladder")
        if any(b >= a for a, b in zip(ladder, ladder[1:])):
            raise ConfigError("eps_ladder must be strictly decreasing", key="eps_ladder")
        if ladder[-1] < self.delta * (1 - 1e-12):
            raise ConfigError(
                f"eps_ladder minimum {ladder[-1]!r} is below the bin width {self.delta!r}", key="eps_ladder"
            )
        if self.experiment == "identity27":
            for eps in ladder:
                m = eps / self.delta
                if abs(m - round(m)) > 1e-9:
                    raise ConfigError(f"identity27 needs eps in delta * N; {eps!r} is not", key="eps_ladder")
        for v in self.variants:
            if v not in ("forward", "backward", "symmetric"):
                raise ConfigError(f"unknown variant {v!r}", key="variants")
        if self.sign_convention not in ("resolved", "paper", "both"):
            raise ConfigError("sign_convention must be resolved, paper or both", key="sign_convention")
        if self.qv_mode not in ("realized", "analytic"):
            raise ConfigError("qv_mode must be realized or analytic", key="qv_mode")
        if self.experiment == "theorem1" and self.function.arity != "space_only":
            raise ConfigError("theorem1 needs a space_only function", key="function")
        if self.checkpoints < 0:
            raise ConfigError("checkpoints must be 0 (dense) or a positive count", key="checkpoints")
        if self.checkpoints and self.n_steps % self.checkpoints:
            raise ConfigError("checkpoints must divide n_steps", key="checkpoints")
        if any(p < 1 for p in self.p_values) or not self.p_values:
            raise ConfigError("p_values must be >= 1", key="p_values")
        if not self.audit_range[0] < self.audit_range[1]:
            raise ConfigError("audit_range needs lo < hi", key="audit_range")
        if self.audit_points < 2:
            raise ConfigError("audit_points must be >= 2", key="audit_points")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json", key="format")
        return self


def _process(text: str) -> ProcessSpec:
    tree = ast.parse(text.strip(), mode="eval").body
    if isinstance(tree, ast.Name):
        return ProcessSpec(tree.id)
    if not (isinstance(tree, ast.Call) and isinstance(tree.func, ast.Name)):
        raise ValueError("expected a process such as brownian or ornstein_uhlenbeck(theta=1.0)")
    if tree.func.id == "deterministic":
        if len(tree.args) == 1 and not tree.keywords:
            return ProcessSpec("deterministic", {"name": ast.literal_eval(tree.args[0])})
    if tree.args:
        raise ValueError("process parameters must be given by keyword")
    return ProcessSpec(tree.func.id, {k.arg: ast.literal_eval(k.value) for k in tree.keywords})


def _render_process(p: ProcessSpec) -> str:
    if p.kind == "deterministic":
        return f"deterministic({p.params['name']!r})"
    if not p.params:
        return p.kind
    return f"{p.kind}({', '.join(f'{k}={v!r}' for k, v in p.params.items())})"


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _int(text: str) -> int:
    return int(text.strip(), 0)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected true/false, got {text!r}")


def _space(text: str):
    if text.strip().lower() == "auto":
        return None
    parts = [v.strip() for v in text.split(",")]
    if len(parts) != 3:
        raise ValueError("space is 'auto' or 'x_min, x_max, n_bins'")
    return (float(parts[0]), float(parts[1]), int(parts[2]))


def _pair(text: str) -> tuple[float, float]:
    vals = _floats(text)
    if len(vals) != 2:
        raise ValueError("expected two comma-separated numbers")
    return vals


def _names(text: str) -> tuple[str, ...]:
    if text.strip().lower() == "auto":
        return ()
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _str(text: str) -> str:
    return text.strip()


PARSERS = {
    "experiment": _str,
    "process": _process,
    "t_end": float,
    "n_steps": _int,
    "n_paths": _int,
    "base_seed": _int,
    "space": _space,
    "bin_width": float,
    "align_breakpoints": _bool,
    "eps_ladder": _floats,
    "function": parse_function,
    "variants": _names,
    "sign_convention": _str,
    "qv_mode": _str,
    "level": float,
    "checkpoints": _int,
    "p_values": _floats,
    "audit_range": _pair,
    "audit_points": _int,
    "output": _str,
    "format": _str,
}

HELP = {
    "experiment": "one of " + ", ".join(EXPERIMENTS) + " (required)",
    "process": "brownian | drifted_brownian(mu=, sigma=) | ornstein_uhlenbeck(theta=, sigma=, x0=) | "
    "geometric_brownian(mu=, sigma=, x0=) | deterministic('linear'|'sine'|'zigzag'|'constant')",
    "t_end": "time horizon",
    "n_steps": "time steps per path",
    "n_paths": "Monte Carlo paths (ignored by pvariation_audit)",
    "base_seed": "64-bit base seed; per-path streams are derived from (base_seed, path_id)",
    "space": "auto (path range + 10% margin, per path) or 'x_min, x_max, n_bins'",
    "bin_width": "bin width used by space = auto",
    "align_breakpoints": "auto grid: snap edges to multiples of bin_width and require F's breakpoints on edges",
    "eps_ladder": "strictly decreasing shifts, each >= bin width",
    "function": "test-function catalog expression",
    "variants": "auto or a list of forward, backward, symmetric",
    "sign_convention": "resolved | paper | both",
    "qv_mode": "realized | analytic",
    "level": "level a for localtime_stats",
    "checkpoints": "0 for a dense sheet, else number of equal checkpoint intervals (must divide n_steps)",
    "p_values": "exponents for pvariation_audit",
    "audit_range": "x-range for pvariation_audit",
    "audit_points": "uniform points for pvariation_audit (breakpoints are added)",
    "output": "output file, '-' for stdout",
    "format": "csv | json",
}


def parse_config(text: str) -> ExperimentConfig:
    values: dict = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in PARSERS:
            raise ConfigError(f"unknown key {key!r}", lineno, key)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno, key)
        try:
            values[key] = PARSERS[key](value)
        except (ValueError, SyntaxError, TypeError) as exc:
            raise ConfigError(f"bad value for {key}: {exc}", lineno, key) from None
        lines[key] = lineno
    if "experiment" not in values:
        raise ConfigError("missing required key 'experiment'")
    cfg = ExperimentConfig(**values)
    try:
        return cfg.validate()
    except ConfigError as exc:
        raise ConfigError(str(exc), lines.get(exc.key), exc.key) from None


def _render_value(key: str, value) -> str:
    if key == "process":
        return _render_process(value)
    if key == "function":
        return value.spec
    if key == "space":
        return "auto" if value is None else f"{value[0]!r}, {value[1]!r}, {value[2]}"
    if key == "variants":
        return ", ".join(value) if value else "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_config(cfg: ExperimentConfig, comments: bool = False) -> str:
    out = []
    for f in fields(cfg):
        if comments:
            out.append(f"# {HELP[f.name]}")
        out.append(f"{f.name} = {_render_value(f.name, getattr(cfg, f.name))}")
    return "\n".join(out) + "\n"


def default_config(experiment: str = "conservation") -> ExperimentConfig:
    return ExperimentConfig(experiment=experiment)


def with_overrides(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(cfg, **changes).validate()
