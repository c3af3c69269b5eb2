"""Figure panels for quench CSV outputs; pure readers, no recomputed physics."""

__version__ = "0.1.0"

from .panels import PANEL_KINDS, PanelSpec, build_figure, render  # noqa: F401
from .schema import (  # noqa: F401
    FINITE_SIZE_COLUMNS,
    POINT_COLUMNS,
    SchemaError,
    load_finite_size_csv,
    load_point_csv,
)
