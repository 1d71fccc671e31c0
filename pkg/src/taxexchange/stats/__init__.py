from .estimator import WealthDistribution, check_wealth
from .fitting import (MIN_TAIL_COUNT, EmpiricalCCDF, TailFit, empirical_ccdf, fit_exponential,
                      fit_lognormal_slope, modal_wealth)
from .histogram import WealthHistogram, build_histogram, l1_distance
from .probit import inverse_normal_cdf

__all__ = [
    "EmpiricalCCDF", "MIN_TAIL_COUNT", "TailFit", "WealthDistribution", "WealthHistogram",
    "build_histogram", "check_wealth", "empirical_ccdf", "fit_exponential",
    "fit_lognormal_slope", "inverse_normal_cdf", "l1_distance", "modal_wealth",
]
