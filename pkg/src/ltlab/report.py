"""CSV/JSON row output and per-epsilon summaries."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, astuple, fields

import numpy as np

from .experiments import ReportRow, brownian_local_time_mean

SCHEMA_VERSION = 1
HEADER = [f.name for f in fields(ReportRow)]


def fmt_float(x: float) -> str:
    """17 significant digits, '.' decimal point, independent of locale."""
    return format(float(x), ".17g")


def _cells(row: ReportRow) -> list[str]:
    return [fmt_float(v) if isinstance(v, float) else str(v) for v in astuple(row)]


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in rows:
        w.writerow(_cells(r))
    return buf.getvalue()


def rows_to_json(rows, summary: dict | None = None) -> str:
    records = [asdict(r) for r in rows]
    doc = {"schema_version": SCHEMA_VERSION, "columns": HEADER, "rows": records}
    if summary is not None:
        doc["summary"] = summary
    return json.dumps(doc, indent=1) + "\n"


def read_csv(text: str) -> list[ReportRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    out = []
    for cells in reader:
        vals = []
        for f, c in zip(fields(ReportRow), cells):
            vals.append(float(c) if f.type == "float" else int(c) if f.type == "int" else c)
        out.append(ReportRow(*vals))
    return out


def _stats(x: np.ndarray) -> dict:
    n = x.size
    se = float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return {"mean": float(np.mean(x)), "se": se, "median": float(np.median(x)), "max": float(np.max(x))}


def summarize(rows, level: float = 0.0) -> dict:
    """Per (experiment, variant, sign_convention, epsilon) error statistics and MC means.

    Standard errors are sample std (ddof=1) / sqrt(N). For localtime_stats on a
    zero-drift Brownian process the mean occupation estimate is also compared
    with E[L_t^level].
    """
    rows = list(rows)
    if not rows:
        raise ValueError("summarize needs at least one row")
    groups: dict[tuple, list[ReportRow]] = {}
    for r in rows:
        groups.setdefault((r.experiment, r.variant, r.sign_convention, r.epsilon), []).append(r)
    lines = []
    for (exp, variant, conv, eps), rs in groups.items():
        lhs = np.array([r.lhs for r in rs])
        rhs = np.array([r.rhs for r in rs])
        abs_err = np.array([r.abs_err for r in rs])
        rel_err = np.array([r.rel_err for r in rs])
        lines.append(
            {
                "experiment": exp,
                "variant": variant,
                "sign_convention": conv,
                "epsilon": eps,
                "n": len(rs),
                "lhs": _stats(lhs),
                "rhs": _stats(rhs),
                "abs_err": _stats(abs_err),
                "rel_err": _stats(rel_err),
            }
        )
    summary = {"schema_version": SCHEMA_VERSION, "groups": lines}
    first = rows[0]
    if first.experiment == "localtime_stats":
        sigma = _zero_drift_sigma(first.process)
        if sigma is not None:
            expected = brownian_local_time_mean(first.t_end, level, sigma)
            st = lines[0]["lhs"]
            summary["oracle"] = {
                "quantity": f"E[L_t^a], a={level!r}, t={first.t_end!r}",
                "expected": expected,
                "mean": st["mean"],
                "se": st["se"],
                "z": (st["mean"] - expected) / st["se"] if st["se"] > 0 else None,
            }
    return summary


def _zero_drift_sigma(process_label: str) -> float | None:
    if process_label == "brownian":
        return 1.0
    if process_label.startswith("drifted_brownian(mu=0.0,"):
        return float(process_label.split("sigma=")[1].rstrip(")"))
    return None


def format_summary(summary: dict) -> str:
    head = f"{'experiment':<16} {'variant':<10} {'sign':<9} {'epsilon':>11} {'n':>5} " \
           f"{'mean lhs':>13} {'se':>10} {'mean rhs':>13} {'mean rel':>10} {'med rel':>10} {'max rel':>10}"
    out = [head, "-" * len(head)]
    for g in summary["groups"]:
        out.append(
            f"{g['experiment']:<16} {g['variant']:<10} {g['sign_convention']:<9} {g['epsilon']:>11.4g} {g['n']:>5d} "
            f"{g['lhs']['mean']:>13.6g} {g['lhs']['se']:>10.3g} {g['rhs']['mean']:>13.6g} "
            f"{g['rel_err']['mean']:>10.3g} {g['rel_err']['median']:>10.3g} {g['rel_err']['max']:>10.3g}"
        )
    if "oracle" in summary:
        o = summary["oracle"]
        out.append(
            f"oracle {o['quantity']}: expected {o['expected']:.6f}, "
            f"MC mean {o['mean']:.6f} +/- {o['se']:.6f} (z = {o['z'] if o['z'] is None else round(o['z'], 2)})"
        )
    return "\n".join(out)
