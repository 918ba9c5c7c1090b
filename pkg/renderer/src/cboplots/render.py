"""Render experiment output files into figures.

Three plot kinds:

- ``trajectory-overlay``: all runs' iterates for steps 1..K as a scatter
  colored by step index (early blue, late orange) over the objective's
  contour; the contour is re-evaluated from the exported formula
  parameters, never from the numeric core.
- ``surface``: the objective contour alone.
- ``scaling``: a log-log error plot from a scaling report JSON with the
  fitted line; the slope annotation carries the report's fitted_slope
  verbatim — the renderer never recomputes science.

Rendering is deterministic: identical inputs produce identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .formulas import SchemaError, objective_fn  # noqa: E402

# early-iterate blue to late-iterate orange
TRAJECTORY_CMAP = matplotlib.colors.LinearSegmentedColormap.from_list(
    "time", [(0.0, 0.447, 0.741), (0.851, 0.325, 0.098)]
)

PLOT_KINDS = ("trajectory-overlay", "surface", "scaling")


@dataclass
class PlotSpec:
    kind: str
    inputs: list
    output: str
    objective: Optional[str] = None
    box: Optional[dict] = None
    grid: int = 300
    title: Optional[str] = None

    def __post_init__(self):
        if self.kind not in PLOT_KINDS:
            raise SchemaError(f"unknown plot kind {self.kind!r}; valid: {PLOT_KINDS}")
        if not self.inputs:
            raise SchemaError("plot spec has an empty input list")

    @classmethod
    def from_file(cls, path) -> "PlotSpec":
        payload = json.loads(Path(path).read_text())
        known = {"kind", "inputs", "output", "objective", "box", "grid", "title"}
        unknown = set(payload) - known
        if unknown:
            raise SchemaError(f"{path}: unknown plot spec keys {sorted(unknown)}")
        return cls(**payload)


def read_trajectory(path) -> np.ndarray:
    """Parse a trajectory CSV (k,x1,...,xd,objective) into (K+1, d)."""
    lines = Path(path).read_text().strip().splitlines()
    if not lines:
        raise SchemaError(f"{path}: empty file")
    header = lines[0].split(",")
    if header[0] != "k" or header[-1] != "objective" or len(header) < 3:
        raise SchemaError(f"{path}: line 1: expected header k,x1,...,objective")
    dim = len(header) - 2
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(header):
            raise SchemaError(
                f"{path}: line {lineno}: expected {len(header)} columns, got {len(parts)}"
            )
        try:
            rows.append([float(p) for p in parts[1:1 + dim]])
        except ValueError:
            raise SchemaError(f"{path}: line {lineno}: non-numeric coordinate")
    if not rows:
        raise SchemaError(f"{path}: no trajectory rows")
    return np.asarray(rows)


def read_objective(path) -> dict:
    payload = json.loads(Path(path).read_text())
    if "params" not in payload or "box" not in payload:
        raise SchemaError(f"{path}: objective export needs params and box")
    return payload


def read_scaling(path) -> dict:
    payload = json.loads(Path(path).read_text())
    needed = {"swept_parameter", "values", "errors", "fitted_slope", "slope_ci"}
    missing = needed - set(payload)
    if missing:
        raise SchemaError(f"{path}: scaling report missing {sorted(missing)}")
    return payload


def _resolve_box(spec: PlotSpec, export: dict):
    box = spec.box or export["box"]
    lower = np.asarray(box["lower"], dtype=float)
    upper = np.asarray(box["upper"], dtype=float)
    if lower.shape != upper.shape or lower.size != 2:
        raise SchemaError("surface plots need a 2-d box")
    return lower, upper


def _draw_contour(ax, spec: PlotSpec, export: dict):
    fn = objective_fn(export)
    lower, upper = _resolve_box(spec, export)
    xs = np.linspace(lower[0], upper[0], spec.grid)
    ys = np.linspace(lower[1], upper[1], spec.grid)
    grid = np.stack(np.meshgrid(xs, ys, indexing="xy"), axis=-1)
    zz = fn(grid)
    ax.contourf(xs, ys, zz, levels=30, cmap="Greys", alpha=0.75)
    ax.contour(xs, ys, zz, levels=30, colors="black", linewidths=0.3, alpha=0.4)
    minimizer = export.get("minimizer")
    if minimizer is not None:
        ax.plot(minimizer[0], minimizer[1], marker="*", markersize=12,
                color="gold", markeredgecolor="black", zorder=5)
    ax.set_xlim(lower[0], upper[0])
    ax.set_ylim(lower[1], upper[1])
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")


def render_figure(spec: PlotSpec):
    """Build the matplotlib figure for a spec; returns (figure, info).

    ``info`` carries the numbers a caller may want to verify: scatter
    point count for overlays, the annotated slope for scaling plots.
    """
    info: dict = {}
    fig, ax = plt.subplots(figsize=(7.0, 6.0))

    if spec.kind in ("trajectory-overlay", "surface"):
        if spec.objective is None:
            raise SchemaError(f"{spec.kind} plots need an objective export path")
        export = read_objective(spec.objective)
        _draw_contour(ax, spec, export)
        if spec.kind == "trajectory-overlay":
            points = []
            colors = []
            for path in spec.inputs:
                traj = read_trajectory(path)
                if traj.shape[1] != 2:
                    raise SchemaError(f"{path}: overlay needs 2-d trajectories")
                k_max = traj.shape[0] - 1
                if k_max < 1:
                    raise SchemaError(f"{path}: trajectory has no steps")
                points.append(traj[1:])
                colors.append(np.arange(1, k_max + 1) / k_max)
            pts = np.concatenate(points, axis=0)
            cols = np.concatenate(colors)
            ax.scatter(pts[:, 0], pts[:, 1], c=cols, cmap=TRAJECTORY_CMAP,
                       s=6.0, linewidths=0.0, zorder=4)
            info["scatter_points"] = int(pts.shape[0])
    else:  # scaling
        report = read_scaling(spec.inputs[0])
        values = np.asarray(report["values"], dtype=float)
        errors = np.asarray(report["errors"], dtype=float)
        slope = report["fitted_slope"]
        ax.loglog(values, errors, "ko", markersize=7)
        # fitted line through the data in log space, slope taken verbatim
        anchor = np.exp(np.mean(np.log(errors)) - slope * np.mean(np.log(values)))
        ax.loglog(values, anchor * values**slope, "k--", linewidth=1.0)
        annotation = f"slope = {slope!r}"
        ax.text(0.05, 0.95, annotation, transform=ax.transAxes, va="top",
                fontsize=11)
        ax.set_xlabel(report["swept_parameter"])
        ax.set_ylabel("discrepancy")
        ax.grid(True, which="both", alpha=0.3)
        info["annotated_slope"] = slope
        info["annotation"] = annotation

    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    return fig, info


def render(spec: PlotSpec) -> Path:
    """Render to spec.output (PNG or SVG inferred from the suffix)."""
    fig, _ = render_figure(spec)
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    suffix = out.suffix.lower()
    if suffix == ".svg":
        # strip run-dependent ids so identical inputs give identical bytes
        plt.rcParams["svg.hashsalt"] = "cboplots"
        fig.savefig(out, format="svg", metadata={"Date": None})
    elif suffix == ".png":
        fig.savefig(out, format="png", metadata={"Software": "cboplots"}, dpi=110)
    else:
        raise SchemaError(f"unsupported output format {suffix!r} (use .png or .svg)")
    plt.close(fig)
    return out
