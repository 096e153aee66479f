from .plotting import CurveSpec, build_figure, curve_xy, detect_pairs, \
    render, summarize
from .schema import COLUMNS, SchemaError, read_curve

__version__ = "0.1.0"

__all__ = [
    "COLUMNS",
    "CurveSpec",
    "SchemaError",
    "build_figure",
    "curve_xy",
    "detect_pairs",
    "read_curve",
    "render",
    "summarize",
    "__version__",
]
