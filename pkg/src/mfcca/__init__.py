"""Multifractal detrended fluctuation and cross-correlation analysis of return series."""

__version__ = "0.1.0"

from .cross import CrossScaling, QDccaCurve, d_xy, lambda_exponent, rho_curves, rho_from_moments, rho_q
from .errors import ConfigError, DataError, MfccaError, NumericalError
from .fluctuation import (
    BoxPartition,
    BoxStats,
    FluctuationMatrix,
    Profile,
    box_stats,
    build_profile,
    default_scale_grid,
    detrend_box,
    fluctuation_cross,
    fluctuation_single,
    partition_boxes,
    q_grid,
)
from .series import (
    AlignedPair,
    ExclusionWindow,
    ReturnSeries,
    TickSeries,
    aggregate,
    align_pair,
    deseasonalize_daily,
    forex_closure_windows,
    load_exclusions_csv,
    load_returns_csv,
    load_ticks_csv,
    normalize_unit_variance,
    remove_exclusions,
    to_log_returns,
)
from .spectrum import (
    GeneralizedHurst,
    RangePolicy,
    RollingHurstTrack,
    ScalingRange,
    SingularitySpectrum,
    asymmetry_parameter,
    fit_scaling_exponent,
    generalized_hurst,
    legendre_transform,
    mirror_wings,
    rolling_hurst,
    select_scaling_range,
)
from .stylized import (
    AutocorrCurve,
    TailDistribution,
    TailFit,
    cumulative_tail,
    fit_decay_exponent,
    fit_tail_exponent,
    volatility_autocorrelation,
)
from .synthetic import (
    CascadeSpec,
    FgnSpec,
    cascade_hurst_analytic,
    generate_binomial_cascade,
    generate_fgn,
    generate_pareto_tail,
    generate_volatility_clusters,
)
