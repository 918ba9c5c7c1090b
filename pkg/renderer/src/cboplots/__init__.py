"""Figure renderer for cborelax experiment outputs."""

from .formulas import SchemaError, objective_fn
from .render import PlotSpec, render, render_figure

__all__ = ["PlotSpec", "SchemaError", "objective_fn", "render", "render_figure"]
