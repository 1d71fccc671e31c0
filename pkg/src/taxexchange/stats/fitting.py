"""Q(w), the modal wealth and straight-line fits to the distribution tails."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import InsufficientDataError
from .histogram import WealthHistogram
from .probit import inverse_normal_cdf


# Tail points resting on fewer observations than this carry mostly counting
# noise in ln Q and probit(1 - Q); unweighted least squares cannot absorb it.
MIN_TAIL_COUNT = 100


@dataclass(frozen=True)
class EmpiricalCCDF:
    """Fraction ``q`` of observations above each wealth level ``w``.

    ``n_observations`` is the sample size behind ``q``; leave it ``None`` for
    exact (analytic) curves.
    """

    w: np.ndarray
    q: np.ndarray
    n_observations: int | None = None

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        q = np.asarray(self.q, dtype=np.float64)
        if w.shape != q.shape or w.ndim != 1:
            raise ValueError("w and q must be 1-d arrays of equal length")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "q", q)


@dataclass(frozen=True)
class TailFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int

    @property
    def temperature(self) -> float:
        """``-1/slope``; meaningful for an exponential fit of ``ln Q`` against ``w``."""
        return -1.0 / self.slope


def empirical_ccdf(hist: WealthHistogram) -> EmpiricalCCDF:
    """Q at every bin edge: the observed mass at or beyond that edge."""
    total = hist.total_observations
    if total == 0:
        raise InsufficientDataError("cannot build Q(w) from an empty histogram")
    above = np.concatenate([np.cumsum(hist.counts[::-1])[::-1], [0]]) + hist.overflow
    return EmpiricalCCDF(hist.edges, above / total, total)


def modal_wealth(hist: WealthHistogram) -> float:
    """Centre of the fullest bin; the lowest bin wins a tie."""
    if hist.total_observations == 0:
        raise InsufficientDataError("modal wealth of an empty histogram")
    return float((np.argmax(hist.counts) + 0.5) * hist.bin_width)


def _ols(x, y) -> TailFit:
    n = x.size
    if n < 3:
        raise InsufficientDataError(f"need at least 3 points for a tail fit, got {n}")
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    sxx = dx @ dx
    if sxx == 0:
        raise InsufficientDataError("all fit abscissae coincide")
    slope = (dx @ (y - ym)) / sxx
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    ss_tot = (y - ym) @ (y - ym)
    r2 = 1.0 - (resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return TailFit(float(slope), float(intercept), float(min(max(r2, 0.0), 1.0)), n)


def _usable(ccdf: EmpiricalCCDF, min_count: int) -> np.ndarray:
    keep = (ccdf.q > 0) & (ccdf.q < 1)
    if ccdf.n_observations is not None and min_count > 0:
        n = ccdf.n_observations
        keep &= (np.rint(ccdf.q * n) >= min_count) & (np.rint((1 - ccdf.q) * n) >= min_count)
    return keep


def fit_lognormal_slope(ccdf: EmpiricalCCDF, w_m: float,
                        min_count: int = MIN_TAIL_COUNT) -> TailFit:
    """Least-squares slope of ``probit(Q)`` against ``ln w`` above the mode.

    This is the slope of Q(w) drawn on log-normal probability axes; for an
    exact log-normal law with shape ``sigma`` it equals ``-1/sigma``, so a
    narrower distribution has a more negative slope.
    Points with ``Q`` equal to 0 or 1, or (for sampled curves) backed by fewer
    than ``min_count`` observations on either side, are dropped.
    """
    keep = (ccdf.w > w_m) & (ccdf.w > 0) & _usable(ccdf, min_count)
    x = np.log(ccdf.w[keep])
    y = inverse_normal_cdf(ccdf.q[keep]) if keep.any() else np.empty(0)
    return _ols(x, y)


def fit_exponential(ccdf: EmpiricalCCDF, min_count: int = MIN_TAIL_COUNT) -> TailFit:
    """Least-squares line through ``ln Q`` against ``w``; ``T = -1/slope``.

    Point selection follows :func:`fit_lognormal_slope`.
    """
    keep = _usable(ccdf, min_count)
    return _ols(ccdf.w[keep], np.log(ccdf.q[keep]))
