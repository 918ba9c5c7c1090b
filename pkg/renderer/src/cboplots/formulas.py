"""Objective re-evaluation from exported formula parameters.

The experiment harness writes an ``objective.json`` next to each run with
the formula parameters of the objective it used.  The renderer rebuilds
the scalar field from those parameters alone so that plotting stays
decoupled from the numeric core; only the parameter schema is shared.
"""

from __future__ import annotations

import numpy as np


class SchemaError(ValueError):
    """An input file does not match the documented schema."""


def objective_fn(export: dict):
    """Vectorized evaluator from an objective.json payload."""
    params = export.get("params")
    if not isinstance(params, dict) or "kind" not in params:
        raise SchemaError("objective export lacks a params.kind field")
    kind = params["kind"]
    if kind == "canyon":
        try:
            center = float(params["valley_center"])
            p3 = float(params["valley_p3"])
            p2 = float(params["valley_p2"])
            p1 = float(params["valley_p1"])
            offset = float(params["valley_offset"])
            tilt = float(params["tilt"])
            amp = float(params["amplitude"])
            freq = float(params["frequency"])
        except KeyError as missing:
            raise SchemaError(f"canyon export missing parameter {missing}")

        def fn(x):
            x1, x2 = x[..., 0], x[..., 1]
            u = x1 - center
            v = ((p3 * u + p2) * u + p1) * u + offset
            w = x2 - v
            return w * w + tilt * x1 + amp * (1.0 - np.cos(freq * x1) * np.cos(freq * x2))

        return fn
    if kind == "rastrigin":
        dim = int(params["dim"])

        def fn(x):
            return 10.0 * dim + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x), axis=-1)

        return fn
    if kind == "quadratic":
        curv = float(params["curvature"])

        def fn(x):
            return 0.5 * curv * np.sum(x * x, axis=-1)

        return fn
    raise SchemaError(f"unknown objective kind {kind!r}")
