"""Oseledets decompositions of matrix cocycles on Banach-space norms."""

import json

from ._core import (
    DimensionCollapse,
    Exhausted,
    __version__,
    bernstein,
    catalog_names,
    criterion_name,
    emit_plotdata,
    gelfand,
    hausdorff_distance,
    norm,
    oblique_projection,
    operator_norm,
)
from ._core import build_scenario as _build_scenario
from ._core import run as _run


def build_scenario(name, seed=1):
    """Catalog scenario as a dict."""
    return json.loads(_build_scenario(name, seed))


def run(spec, threads=1):
    """Run a scenario dict (or JSON string); returns the report dict."""
    text = spec if isinstance(spec, str) else json.dumps(spec)
    return json.loads(_run(text, threads))


__all__ = [
    "DimensionCollapse",
    "Exhausted",
    "__version__",
    "bernstein",
    "build_scenario",
    "catalog_names",
    "criterion_name",
    "emit_plotdata",
    "gelfand",
    "hausdorff_distance",
    "norm",
    "oblique_projection",
    "operator_norm",
    "run",
]
