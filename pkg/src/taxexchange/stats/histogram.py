"""Uniform-bin wealth histogram with an explicit overflow counter."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .._kernels import bin_counts
from ..exceptions import InsufficientDataError, InvariantViolation


@dataclass
class WealthHistogram:
    """Occupancy of ``[0, n_bins * bin_width)`` in equal bins, plus overflow.

    Histograms with the same binning add exactly (integer counts), so partial
    histograms from independent runs can be merged in any order.
    """

    bin_width: float
    n_bins: int
    counts: np.ndarray = None
    overflow: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.bin_width) and self.bin_width > 0):
            raise ValueError(f"bin_width must be > 0, got {self.bin_width!r}")
        if self.n_bins < 2:
            raise ValueError(f"n_bins must be >= 2, got {self.n_bins!r}")
        if self.counts is None:
            self.counts = np.zeros(self.n_bins, dtype=np.int64)
        else:
            self.counts = np.asarray(self.counts, dtype=np.int64)
            if self.counts.shape != (self.n_bins,):
                raise ValueError("counts must have length n_bins")
        self.overflow = int(self.overflow)

    @property
    def total_observations(self) -> int:
        return int(self.counts.sum()) + self.overflow

    @property
    def edges(self) -> np.ndarray:
        return np.arange(self.n_bins + 1) * self.bin_width

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n_bins) + 0.5) * self.bin_width

    def density(self) -> np.ndarray:
        """Probability density per bin; overflow mass is left out."""
        total = self.total_observations
        if total == 0:
            raise InsufficientDataError("histogram is empty")
        return self.counts / (total * self.bin_width)

    def overflow_fraction(self) -> float:
        total = self.total_observations
        return self.overflow / total if total else 0.0

    def add(self, snapshot) -> "WealthHistogram":
        build_histogram(snapshot, self)
        return self

    def compatible(self, other: "WealthHistogram") -> bool:
        return self.bin_width == other.bin_width and self.n_bins == other.n_bins

    def merge(self, other: "WealthHistogram") -> "WealthHistogram":
        """Sum of two histograms with identical binning (neither is modified)."""
        if not self.compatible(other):
            raise ValueError("cannot merge histograms with different binning")
        return WealthHistogram(self.bin_width, self.n_bins,
                               self.counts + other.counts, self.overflow + other.overflow)

    __add__ = merge

    def copy(self) -> "WealthHistogram":
        return WealthHistogram(self.bin_width, self.n_bins, self.counts.copy(), self.overflow)

    def __eq__(self, other):
        if not isinstance(other, WealthHistogram):
            return NotImplemented
        return (self.compatible(other) and self.overflow == other.overflow
                and np.array_equal(self.counts, other.counts))


def build_histogram(snapshot, hist: WealthHistogram) -> None:
    """Accumulate one wealth snapshot into ``hist`` in place."""
    w = np.ascontiguousarray(snapshot, dtype=np.float64).ravel()
    if w.size == 0:
        return
    if not np.all(np.isfinite(w)):
        raise InvariantViolation("non-finite wealth in snapshot")
    if w.min() < 0:
        raise InvariantViolation(f"negative wealth {w.min()!r} in snapshot")
    slots = np.zeros(hist.n_bins + 1, dtype=np.int64)
    bin_counts(w, float(hist.bin_width), slots)
    hist.counts += slots[:-1]
    hist.overflow += int(slots[-1])


def l1_distance(a: WealthHistogram, b: WealthHistogram) -> float:
    """L1 distance between two normalised histograms, overflow included (max 2)."""
    if not a.compatible(b):
        raise ValueError("histograms must share binning")
    ta, tb = a.total_observations, b.total_observations
    if ta == 0 or tb == 0:
        raise InsufficientDataError("histogram is empty")
    pa = np.append(a.counts, a.overflow) / ta
    pb = np.append(b.counts, b.overflow) / tb
    return float(np.abs(pa - pb).sum())
