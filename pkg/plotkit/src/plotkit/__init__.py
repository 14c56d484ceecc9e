from .figures import (
    DB_FLOOR,
    KINDS,
    FigureSpec,
    PeakMark,
    PlotError,
    RenderResult,
    SchemaMismatch,
    clamp_db,
    render,
)

__all__ = [
    "DB_FLOOR",
    "KINDS",
    "FigureSpec",
    "PeakMark",
    "PlotError",
    "RenderResult",
    "SchemaMismatch",
    "clamp_db",
    "render",
]
