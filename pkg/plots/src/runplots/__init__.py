"""Publication-style figures from bmstrun CSV outputs.

Consumes only the simulator's documented CSV schemas (sweep results, bound
curves, Shannon-limit lookups) and renders log-scale error-rate plots:
simulation series as markers with lines, bounds as dashed lines, limits as
vertical dotted markers.
"""

__version__ = "0.1.0"

from .csvio import (  # noqa: F401
    BoundCurve,
    CsvSchemaError,
    LimitValue,
    SweepResult,
    read_bound_curve,
    read_limit,
    read_sweep,
)
from .spec import PlotSpec, PlotSpecError, SeriesSpec, load_plot_spec  # noqa: F401
from .render import render  # noqa: F401
