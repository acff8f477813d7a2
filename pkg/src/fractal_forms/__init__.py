"""Self-similar resistance forms on finitely ramified fractals."""

from .network import (
    BoundaryValues,
    InfiniteResistanceError,
    NetworkError,
    QuadraticForm,
    ReductionError,
    ResistorNetwork,
    SingularInteriorError,
    effective_resistance,
    energy,
    harmonic_extension,
    laplacian_of,
    resistance_matrix,
    trace_to,
)
from .structure import CellSchema, SchemaError, build_level, renormalize, replicate, validate
from .solver import (
    ConvergenceError,
    FixedPointReport,
    SolverOptions,
    SupportEscapeError,
    check_fixed_point,
    energy_ratio,
    power_iterate,
)
from .catalog import builtin, fractalina_schema, fractalina_solve, gasket_schema, pillow_schema, pillow_solve

__version__ = "0.1.0"

__all__ = [
    "BoundaryValues",
    "InfiniteResistanceError",
    "NetworkError",
    "QuadraticForm",
    "ReductionError",
    "ResistorNetwork",
    "SingularInteriorError",
    "effective_resistance",
    "energy",
    "harmonic_extension",
    "laplacian_of",
    "resistance_matrix",
    "trace_to",
    "CellSchema",
    "SchemaError",
    "build_level",
    "renormalize",
    "replicate",
    "validate",
    "ConvergenceError",
    "FixedPointReport",
    "SolverOptions",
    "SupportEscapeError",
    "check_fixed_point",
    "energy_ratio",
    "power_iterate",
    "builtin",
    "fractalina_schema",
    "fractalina_solve",
    "gasket_schema",
    "pillow_schema",
    "pillow_solve",
]
