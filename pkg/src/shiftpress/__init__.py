"""Topological pressure, Hausdorff dimension and Lyapunov spectra for shifts
with conformal prefix metrics."""

from .errors import (
    BracketInvalid,
    ConfigError,
    DepthExceeded,
    Infeasible,
    InsufficientDepth,
    InvalidDepth,
    NotIrreducible,
    NumericalError,
    OutOfRange,
    ShiftPressError,
)
from .symbolic import (
    Geometric,
    SequencePoint,
    ShiftSystem,
    Table,
    WeightedProduct,
    ball_to_cylinder,
    bowen_ball_to_cylinder,
    conformal_factor,
    distance,
    psi_weight,
    validate_metric,
)
from .targets import FrequencyWindow, Full, Subshift, UnionOf, word_count
from .cover import CylinderTree, build_tree, optimal_cover_dp
from .caratheodory import (
    critical_exponent,
    dimension_estimate,
    hausdorff_value,
    pesin_pressure_value,
    pressure_estimate,
    pressure_value,
)
from .lyapunov import (
    ball_inclusion_check,
    birkhoff,
    classify_level_set,
    exponent_bounds,
    tempered_certificate,
)
from .thermo import (
    bowen_root,
    closed_form_curve,
    cone_check,
    entropy,
    pressure_closed_form,
)
from .spectra import (
    alpha_range,
    dimension_spectrum,
    frequency_entropy_oracle,
    legendre_entropy,
    level_set_dimension,
    spectrum_table,
)

__version__ = "0.1.0"
