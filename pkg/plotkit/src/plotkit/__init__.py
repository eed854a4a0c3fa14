"""Figure rendering for gate-simulation CSV outputs."""

from .render import PANELS, SchemaError, render

__all__ = ["PANELS", "SchemaError", "render"]
__version__ = "0.1.0"
