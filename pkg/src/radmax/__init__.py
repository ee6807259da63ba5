"""Numerical laboratory for maximal operators on radial weights and functions."""

from ._version import __version__
from .a1 import (
    a1_dimension_sweep,
    a1_lower_bound,
    a1_upper_from_condc,
    condition_c_constants,
    growth_example_curve,
    shifted_a1_check,
)
from .balls import (
    BallSpec,
    DimensionLimitSpec,
    ball_average,
    ball_averages,
    centered_ball_maximal,
    dimension_limit_curve,
)
from .errors import (
    BreakpointAtT,
    BudgetExhausted,
    CertificateMissing,
    ConfigError,
    DivergentMoment,
    GridTooCoarse,
    InvalidInput,
    QuadratureFailure,
    RadmaxError,
    TailNotControlled,
)
from .kakeya import (
    Segment2D,
    SharpnessConfig,
    segment_lemma_ratio,
    segment_radius_intersection,
    sharpness_curve,
    lorentz_bound_check,
    universal_maximal_radial,
)
from .logscalar import LogScalar
from .maximal import (
    RadialIndicatorSet,
    SimpleRadialFunction,
    TabulatedRadial,
    annuli_level_set,
    annuli_maximal,
    lorentz_n1_norm,
    lorentz_weak_norm,
    uncentered_max,
    weak11_empirical_constant,
)
from .profiles import (
    PiecewisePower,
    RadialProfile,
    Shifted,
    Tabulated,
    beta_moment,
    profile_from_config,
    vn_measure,
    weighted_moment,
)
