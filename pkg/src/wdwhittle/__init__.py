"""Whittle estimation for weakly dependent stationary time series."""
from .spectral import (
    FourierFunction,
    PeriodogramSummary,
    SpectralDensity,
    TimeSeries,
    c_s_constant,
    dual_norm_discrepancy,
    integrated_periodogram,
    limit_covariance,
    periodogram,
    sample_autocovariance,
    sigma_ell,
    sigma_matrix,
    sobolev_norm,
    spectral_integral,
)
from .processes import (
    ArchInf,
    Bilinear,
    CausalLinear,
    Decay,
    Garch,
    InnovationSpec,
    LinearDepInnov,
    TwoSidedLinear,
    Volterra,
    simulate,
    stationarity_check,
    true_spectral_density,
)

__version__ = "0.1.0"
