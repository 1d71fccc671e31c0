"""Compiled inner loops for the trade engine.

Every kernel reproduces the plain-Python trade path bit for bit: the same
draw order from the xoshiro stream, the same floating-point expression order,
and the same beneficiary set (smallest wealth first, ties to the lower index).
"""
import numpy as np
from numba import njit

from ._rng import draw_pair, next_double


@njit(cache=True, nogil=True)
def _kth_inplace(buf, n, k):
    """Quickselect: k-th smallest (0-based) of ``buf[:n]``, reordering it."""
    lo = 0
    hi = n - 1
    while hi > lo:
        mid = (lo + hi) >> 1
        a = buf[lo]
        b = buf[mid]
        c = buf[hi]
        if a > b:
            a, b = b, a
        if b > c:
            b = c
            if a > b:
                b = a
        pivot = b
        i = lo
        j = hi
        while i <= j:
            while buf[i] < pivot:
                i += 1
            while buf[j] > pivot:
                j -= 1
            if i <= j:
                tmp = buf[i]
                buf[i] = buf[j]
                buf[j] = tmp
                i += 1
                j -= 1
        if k <= j:
            hi = j
        elif k >= i:
            lo = i
        else:
            return buf[k]
    return buf[k]


@njit(cache=True, nogil=True)
def kth_smallest(values, k, scratch):
    """Return the k-th smallest entry (0-based) of ``values``; ``values`` is untouched."""
    n = values.size
    for t in range(n):
        scratch[t] = values[t]
    return _kth_inplace(scratch, n, k)


@njit(cache=True, nogil=True)
def select_poorest(wealth, k, scratch, out):
    """Write the indices of the ``k`` poorest agents into ``out[:k]``.

    Agents strictly below the k-th smallest value are all in; agents equal to
    it are admitted in index order until ``k`` are chosen.
    """
    n = wealth.size
    if k >= n:
        for r in range(n):
            out[r] = r
        return n
    v = kth_smallest(wealth, k - 1, scratch)
    n_less = 0
    for r in range(n):
        if wealth[r] < v:
            n_less += 1
    ties_left = k - n_less
    m = 0
    for r in range(n):
        w = wealth[r]
        if w < v:
            out[m] = r
            m += 1
        elif w == v and ties_left > 0:
            out[m] = r
            m += 1
            ties_left -= 1
    return m


@njit(cache=True, nogil=True)
def _bracket_counts(wealth, lo, hi):
    n_lo = 0
    n_hi = 0
    for r in range(wealth.size):
        w = wealth[r]
        n_lo += w < lo
        n_hi += w <= hi
    return n_lo, n_hi


@njit(cache=True, nogil=True)
def _credit_bracketed(wealth, k, lo, hi, n_below, share, margin, cand, scratch):
    """Credit ``share`` to the ``k`` poorest agents given a valid cutoff bracket.

    The caller guarantees ``n_below < k <= count(wealth <= hi)`` where
    ``n_below = count(wealth < lo)``.  Agents below ``lo`` are all
    beneficiaries; the remaining places go to the agents inside ``[lo, hi]`` in
    (wealth, index) order, exactly as :func:`select_poorest` chooses them.

    Returns ``(top, next_lo, next_hi)``: the largest credited wealth after the
    credit, and a bracket that holds the cutoff of the next trade whatever its
    two traders do (a bound is -1.0 when the needed rank was not inside this
    bracket).
    """
    n = wealth.size
    c = 0
    for r in range(n):
        w = wealth[r]
        if w >= lo and w <= hi:
            cand[c] = r
            c += 1
    need = k - n_below
    for t in range(c):
        scratch[t] = wealth[cand[t]]
    v = _kth_inplace(scratch, c, need - 1)
    # pre-credit order statistics k-2-margin and k+2+margin (1-based)
    next_lo = -1.0
    rank = k - 2 - margin - n_below - 1
    if rank >= 0:
        next_lo = _kth_inplace(scratch, c, rank)
    next_hi = -1.0
    rank = k + 2 + margin - n_below - 1
    if rank < c:
        next_hi = _kth_inplace(scratch, c, rank)
    n_less = 0
    for t in range(c):
        n_less += wealth[cand[t]] < v
    ties_left = need - n_less
    m = 0
    for t in range(c):
        r = cand[t]
        w = wealth[r]
        if w < v:
            cand[m] = r
            m += 1
        elif w == v and ties_left > 0:
            ties_left -= 1
            cand[m] = r
            m += 1
    for r in range(n):
        w = wealth[r]
        wealth[r] = w + share if w < lo else w
    top = 0.0
    for t in range(m):
        r = cand[t]
        wealth[r] += share
        if wealth[r] > top:
            top = wealth[r]
    if next_hi >= 0.0 and top > next_hi:
        next_hi = top
    return top, next_lo, next_hi


@njit(cache=True, nogil=True)
def _cutoff(wealth, selected, m):
    v = wealth[selected[0]]
    for t in range(1, m):
        w = wealth[selected[t]]
        if w > v:
            v = w
    return v


@njit(cache=True, nogil=True)
def run_trades(wealth, rng_state, n_trades, tax_rate, n_beneficiaries, scratch, selected):
    """Apply ``n_trades`` taxed trades to ``wealth`` in place.

    ``n_beneficiaries >= len(wealth)`` means the pool is shared by everyone.
    Poorest-set selection keeps a bracket around the previous trade's cutoff
    and only orders the agents inside it; the chosen set is identical to a full
    quickselect.  Returns how many selections fell back to the full scan.
    """
    n = wealth.size
    keep = 1.0 - tax_rate
    everyone = n_beneficiaries >= n
    candidates = np.empty(n, dtype=np.int64)
    have_bracket = False
    lo = 0.0
    hi = 0.0
    fallbacks = 0
    for _ in range(n_trades):
        i, j = draw_pair(rng_state, n)
        eps = next_double(rng_state)
        total = wealth[i] + wealth[j]
        wealth[i] = keep * eps * total
        wealth[j] = keep * (1.0 - eps) * total
        pool = tax_rate * total
        if pool == 0.0:
            continue
        if everyone:
            share = pool / n
            for r in range(n):
                wealth[r] += share
            continue
        share = pool / n_beneficiaries
        done = False
        if have_bracket:
            for _attempt in range(8):
                n_lo, n_hi = _bracket_counts(wealth, lo, hi)
                if n_lo >= n_beneficiaries:
                    lo -= 2.0 * (hi - lo) + 1e-300
                elif n_hi < n_beneficiaries:
                    hi += 2.0 * (hi - lo) + 1e-300
                else:
                    top, next_lo, next_hi = _credit_bracketed(
                        wealth, n_beneficiaries, lo, hi, n_lo, share, 2, candidates, scratch)
                    lo = next_lo if next_lo >= 0.0 else lo
                    hi = next_hi if next_hi >= 0.0 else top + (hi - lo)
                    done = True
                    break
        if not done:
            m = select_poorest(wealth, n_beneficiaries, scratch, selected)
            for t in range(m):
                wealth[selected[t]] += share
            top = _cutoff(wealth, selected, m)
            fallbacks += 1
            lo = 0.99 * top
            hi = 1.01 * top
            have_bracket = True
    return fallbacks


@njit(cache=True, nogil=True)
def bin_counts(wealth, bin_width, counts):
    """Accumulate ``wealth`` into ``counts``; the last slot is the overflow bin."""
    n_bins = counts.size - 1
    for w in wealth:
        b = np.int64(w / bin_width)
        if b >= n_bins or b < 0:
            counts[n_bins] += 1
        else:
            counts[b] += 1
