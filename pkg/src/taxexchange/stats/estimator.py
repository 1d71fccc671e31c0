"""scikit-learn style front end over the histogram and tail fits."""
import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from ..exceptions import InsufficientDataError
from .fitting import (MIN_TAIL_COUNT, empirical_ccdf, fit_exponential, fit_lognormal_slope,
                      modal_wealth)
from .histogram import WealthHistogram


def check_wealth(X):
    """Validate wealth samples: finite, non-negative floats, any shape, flattened."""
    X = check_array(X, ensure_2d=False, allow_nd=True, dtype=np.float64,
                    ensure_all_finite=True, input_name="X")
    if X.size and X.min() < 0:
        raise ValueError("wealth samples must be non-negative")
    return X.ravel()


class WealthDistribution(BaseEstimator):
    """Histogram estimate of P(w) with mode, Q(w) and tail fits.

    Parameters
    ----------
    bin_width : float, default=0.05
        Bin width in wealth units.
    n_bins : int, default=200
        Number of regular bins; wealth past ``n_bins * bin_width`` is
        counted as overflow.
    min_count : int, default=100
        Tail points backed by fewer observations are left out of the fits.

    Attributes
    ----------
    histogram_ : WealthHistogram
    ccdf_ : EmpiricalCCDF
    modal_wealth_ : float
    lognormal_fit_, exponential_fit_ : TailFit or None
        ``None`` when too few points survive the selection.
    """

    def __init__(self, bin_width=0.05, n_bins=200, min_count=MIN_TAIL_COUNT):
        self.bin_width = bin_width
        self.n_bins = n_bins
        self.min_count = min_count

    def fit(self, X, y=None):
        self.histogram_ = WealthHistogram(self.bin_width, self.n_bins)
        return self.partial_fit(X)

    def partial_fit(self, X, y=None):
        """Accumulate more snapshots and refresh the derived quantities."""
        if not hasattr(self, "histogram_"):
            self.histogram_ = WealthHistogram(self.bin_width, self.n_bins)
        self.histogram_.add(check_wealth(X))
        self._refresh()
        return self

    def _refresh(self):
        self.ccdf_ = empirical_ccdf(self.histogram_)
        self.modal_wealth_ = modal_wealth(self.histogram_)
        try:
            self.lognormal_fit_ = fit_lognormal_slope(self.ccdf_, self.modal_wealth_,
                                                      self.min_count)
        except InsufficientDataError:
            self.lognormal_fit_ = None
        try:
            self.exponential_fit_ = fit_exponential(self.ccdf_, self.min_count)
        except InsufficientDataError:
            self.exponential_fit_ = None

    def density(self):
        """``(bin_centers, P(w))`` of the accumulated histogram."""
        check_is_fitted(self, "histogram_")
        return self.histogram_.centers, self.histogram_.density()
