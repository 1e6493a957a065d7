"""Figure rendering for weakmeas CSV outputs."""

__version__ = "0.1.0"

from .render import FigureSpec, render  # noqa: F401
from .schema import SchemaError, load_table  # noqa: F401
