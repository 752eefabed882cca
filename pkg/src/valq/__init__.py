"""valq: values of the modular j-invariant at real quadratic irrationalities.

The library combines exact quadratic/class-group machinery with
arbitrary-precision quadrature along closed geodesics; the CLI reproduces the
reference tables and runs the sweep and Markoff-tree experiments.
"""

from .errors import (
    ConvergenceError,
    DomainError,
    Error,
    ParseError,
    PrecisionRangeError,
)
from .heckeval import (
    GeodesicContext,
    ValResult,
    fourier_coeff,
    geodesic_point,
    prepare,
    val,
    val_classes,
)
from .markoff import (
    MarkoffNode,
    MarkoffTheta,
    neighbor_sequences,
    observation_report,
    theta,
    tree,
)
from .modular import j_coefficients, j_eval, reduce_to_fd
from .quadratic import (
    FormClass,
    FundamentalUnit,
    Mat2,
    QuadIrr,
    automorph,
    cf_expand,
    cf_value,
    class_order,
    compose,
    is_equivalent,
    make,
    narrow_class_reps,
    parse_cf,
    parse_form,
    parse_surd,
    pell_fundamental,
    wide_class_count,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError", "DomainError", "Error", "ParseError", "PrecisionRangeError",
    "GeodesicContext", "ValResult", "fourier_coeff", "geodesic_point", "prepare",
    "val", "val_classes",
    "MarkoffNode", "MarkoffTheta", "neighbor_sequences", "observation_report",
    "theta", "tree",
    "j_coefficients", "j_eval", "reduce_to_fd",
    "FormClass", "FundamentalUnit", "Mat2", "QuadIrr", "automorph", "cf_expand",
    "cf_value", "class_order", "compose", "is_equivalent", "make",
    "narrow_class_reps", "parse_cf", "parse_form", "parse_surd",
    "pell_fundamental", "wide_class_count",
    "__version__",
]
