"""Plot experiment CSVs in the lab's figure styles.

The renderer is a pure consumer of the CSV contract: it selects rows by
metric name and plots the values verbatim. The only transformation it
ever applies is a logarithmic y-axis on error panels, so anything shown
is exactly what the harness computed.

Colors are fixed per metric: blue for the error, red for the
deterministic bound, green for the pathwise bound, fuchsia for the ODE
bound; faded variants carry the per-path traces, full strength the
cross-path means and path-independent curves.
"""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

HEADER = ["run_id", "path", "t", "metric", "value"]

COLORS = {
    "h_error": "#1f77d4",
    "tanh_error": "#1f77d4",
    "bound_det": "#d62728",
    "bound_pathwise_simple": "#2ca02c",
    "bound_ode": "#e932c8",
    "bound_ode_tanh": "#e932c8",
}

FADED_ALPHA = 0.15

FIGURE_KINDS = {
    "fig1": {
        "panels": [
            {
                "title": "Hilbert error and bounds",
                "log": True,
                "per_path": ["h_error", "bound_ode"],
                "bold": ["mean_h_error", "mean_bound_ode", "bound_det"],
                "required": ["h_error", "bound_det"],
            }
        ]
    },
    "fig2": {
        "panels": [
            {
                "title": "Hilbert error and pathwise bounds",
                "log": True,
                "per_path": ["h_error", "bound_pathwise_simple", "bound_ode"],
                "bold": [
                    "mean_h_error",
                    "mean_bound_pathwise_simple",
                    "mean_bound_ode",
                    "bound_det",
                ],
                "required": ["h_error", "bound_det", "bound_pathwise_simple", "bound_ode"],
            }
        ]
    },
    "fig4": {
        "panels": [
            {
                "title": "Hilbert scale",
                "log": True,
                "per_path": ["h_error", "bound_ode", "bound_pathwise_simple", "bound_det"],
                "bold": [
                    "mean_h_error",
                    "mean_bound_ode",
                    "mean_bound_pathwise_simple",
                    "mean_bound_det",
                ],
                "required": ["h_error", "bound_det", "bound_pathwise_simple", "bound_ode"],
            },
            {
                "title": "tanh scale",
                "log": False,
                "per_path": ["tanh_error", "bound_ode_tanh"],
                "bold": ["mean_tanh_error", "mean_bound_ode_tanh"],
                "required": ["tanh_error", "bound_ode_tanh"],
            },
        ]
    },
}


class SchemaError(ValueError):
    """CSV does not conform to the experiment schema."""


def _color(metric: str) -> str:
    base = metric[5:] if metric.startswith("mean_") else metric
    return COLORS.get(base, "#7f7f7f")


def load_series(csv_path: str) -> dict[str, dict[int, tuple[list[float], list[float]]]]:
    """metric -> path -> (times, values), in file order."""
    with open(csv_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError("empty CSV: no header row")
        if header != HEADER:
            offending = [c for c in header if c not in HEADER] or header
            raise SchemaError(f"unexpected column(s) {offending}; need {HEADER}")
        out: dict[str, dict[int, tuple[list[float], list[float]]]] = {}
        count = 0
        for row in reader:
            if len(row) != 5:
                raise SchemaError(f"malformed row {row!r}")
            _, path, t, metric, value = row
            ts, vs = out.setdefault(metric, {}).setdefault(int(path), ([], []))
            ts.append(float(t))
            vs.append(float(value))
            count += 1
        if count == 0:
            raise SchemaError("empty CSV: no data rows")
    return out


def render(csv_path: str, figure_kind: str, out_image: str) -> str:
    """Render one CSV into the requested figure style; returns the path."""
    if figure_kind not in FIGURE_KINDS:
        raise ValueError(f"unknown figure kind {figure_kind!r}; options: {sorted(FIGURE_KINDS)}")
    series = load_series(csv_path)
    spec = FIGURE_KINDS[figure_kind]
    for panel in spec["panels"]:
        for metric in panel["required"]:
            if metric not in series:
                raise SchemaError(f"missing metric column {metric!r} for {figure_kind}")

    n_panels = len(spec["panels"])
    fig, axes = plt.subplots(1, n_panels, figsize=(6.4 * n_panels, 4.8))
    if n_panels == 1:
        axes = [axes]
    for ax, panel in zip(axes, spec["panels"]):
        for metric in panel["per_path"]:
            for path, (ts, vs) in series.get(metric, {}).items():
                if path < 0:
                    continue
                ax.plot(ts, vs, color=_color(metric), alpha=FADED_ALPHA, linewidth=0.7)
        for metric in panel["bold"]:
            for path, (ts, vs) in series.get(metric, {}).items():
                if path >= 0:
                    continue
                ax.plot(ts, vs, color=_color(metric), linewidth=1.8, label=metric)
        if panel["log"]:
            ax.set_yscale("log")
        ax.set_title(panel["title"])
        ax.set_xlabel("t")
        ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    os.makedirs(os.path.dirname(out_image) or ".", exist_ok=True)
    fig.savefig(out_image, dpi=130)
    plt.close(fig)
    return out_image
