"""CSV / JSON / SVG writers for experiment reports.

All writers are deterministic: identical reports give identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math

from .experiments import REPORT_FIELDS, reference_level


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.10g}"
    return str(value)


def reports_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_FIELDS)
    for r in reports:
        w.writerow([fmt(getattr(r, k)) for k in REPORT_FIELDS])
    return buf.getvalue()


def _clean(obj):
    if isinstance(obj, float):
        return float(fmt(obj)) if math.isfinite(obj) else fmt(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def to_json(records) -> str:
    """JSON text with floats rounded to 10 significant digits, like the CSV."""
    return json.dumps(_clean(records), indent=2) + "\n"


def reports_json(reports) -> str:
    return to_json([r.to_record() for r in reports])


def table_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def sweep_svg(reports) -> str:
    """Line chart of the estimates against ``n1 - n0``, one series per ``n0``,
    with the dashed reference level ``4 ** -(n0 + 1)``."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "deadneuron", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        for k, n0 in enumerate(sorted({r.n0 for r in reports})):
            rs = sorted((r for r in reports if r.n0 == n0), key=lambda r: r.n1)
            x = [r.n1 - n0 for r in rs]
            y = [r.p_hat for r in rs]
            err = [[r.p_hat - r.ci_low for r in rs], [r.ci_high - r.p_hat for r in rs]]
            color = f"C{k}"
            ax.errorbar(x, y, yerr=err, marker="o", color=color, capsize=3, label=f"n0={n0}")
            ax.axhline(float(reference_level(n0)), color=color, linestyle="--", linewidth=1)
        ax.set_xlabel("n1 - n0")
        ax.set_ylabel("P(stably unactivated)")
        ax.legend()
        fig.tight_layout()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()
