"""Numba kernels for minimal integer-interval cover costs.

The solvers work on "items": deduplicated integer hulls [floor(p), ceil(p)]
of the points restricted to one dyadic block [2^(n-1), 2^n].  Any cover can
be normalised to intervals over consecutive runs of items, and for a run the
optimal admissible diameter is an endpoint of [d_min, 2^(n-1)] because
x -> x^rho * |log2 x|^xi first increases then decreases on (0, 1/2].
"""

import numpy as np
from numba import njit

__all__ = [
    "quad_dp",
    "greedy_unit_count",
    "concave_stack_dp",
    "collapse_segments",
]


@njit(cache=True)
def quad_dp(lo, hi, n, rho, xi):
    """O(m^2) run-partition DP over items, exact for any rho > 0, xi >= 0.

    Per-run cost is min(f(max(hull, 1)), f(2^(n-1))) with
    f(d) = (d/2^n)^rho * |log2(d/2^n)|^xi.
    """
    m = lo.shape[0]
    if m == 0:
        return 0.0
    inv = 2.0 ** (-n)
    f_block = 2.0 ** (-rho)  # whole-block interval: d/2^n = 1/2, |log2| = 1
    dp = np.empty(m + 1)
    dp[0] = 0.0
    for j in range(1, m + 1):
        hj = hi[j - 1]
        best = np.inf
        for i in range(j):
            d = hj - lo[i]
            if d < 1:
                d = 1
            x = d * inv
            c = x**rho
            if xi > 0.0:
                c *= np.abs(np.log2(x)) ** xi
            if c > f_block:
                c = f_block
            v = dp[i] + c
            if v < best:
                best = v
        dp[j] = best
    return dp[m]


@njit(cache=True)
def greedy_unit_count(lo, hi):
    """Minimum number of unit intervals covering all items (classic greedy).

    For rho >= 1 and xi = 0 the cover cost is exactly this count times
    (1/2^n)^rho, since f(d) >= d*f(1) allows refining any interval into
    unit pieces.
    """
    m = lo.shape[0]
    count = 0
    cover_end = -1
    for k in range(m):
        if hi[k] > cover_end:
            # place the rightmost unit interval covering item k
            count += 1
            cover_end = lo[k] + 1
    return count


@njit(cache=True)
def _span_cost(dp_i, b, a, inv, rho):
    d = b - a
    return dp_i + (d * inv) ** rho


@njit(cache=True)
def concave_stack_dp(a, b, n, rho):
    """O(S log S) DP for xi = 0, rho < 1 over gap-separated segments.

    Segments are maximal chains of touching items; within a chain splitting
    never pays for rho <= 1 (subadditivity of d^rho).  The run cost
    f(span) = (span/2^n)^rho is concave in the span, so for candidates
    i < i' the difference f(B_j - A_{i+1}) - f(B_j - A_{i'+1}) is
    non-increasing in j: a new candidate is optimal on a prefix of the
    remaining positions.  Candidates are kept on a takeover stack whose top
    owns the nearest future positions.

    Runs consisting of a single segment are handled by a direct transition
    (their span can fall below 1 and needs the widening to diameter 1);
    candidate i enters the stack only from position i+2 on, where every
    evaluated span is >= 1 and concavity holds.
    """
    S = a.shape[0]
    inv = 2.0 ** (-n)
    dp = np.empty(S + 1)
    dp[0] = 0.0
    cand = np.empty(S + 2, dtype=np.int64)
    right = np.empty(S + 2, dtype=np.int64)
    top = -1  # stack pointer; top owns the earliest remaining positions

    for j in range(1, S + 1):
        # drop owners whose interval ended before j
        while top >= 0 and right[top] < j:
            top -= 1
        # admit candidate j-2 (run start at segment j-1, first usable at j)
        c = j - 2
        if c >= 0:
            if top < 0:
                cand[0] = c
                right[0] = S
                top = 0
            else:
                vc = _span_cost(dp[c], b[j - 1], a[c], inv, rho)
                vo = _span_cost(dp[cand[top]], b[j - 1], a[cand[top]], inv, rho)
                if vc < vo:
                    lo_pos = j
                    while top >= 0:
                        r = right[top]
                        if (
                            _span_cost(dp[c], b[r - 1], a[c], inv, rho)
                            < _span_cost(dp[cand[top]], b[r - 1], a[cand[top]], inv, rho)
                        ):
                            lo_pos = r + 1
                            top -= 1
                        else:
                            break
                    if top < 0:
                        cand[0] = c
                        right[0] = S
                        top = 0
                    else:
                        # largest t in [lo_pos, right[top]] where c still wins
                        lo_t = lo_pos
                        hi_t = right[top]
                        o = cand[top]
                        while lo_t <= hi_t:
                            mid = (lo_t + hi_t) // 2
                            if (
                                _span_cost(dp[c], b[mid - 1], a[c], inv, rho)
                                < _span_cost(dp[o], b[mid - 1], a[o], inv, rho)
                            ):
                                lo_t = mid + 1
                            else:
                                hi_t = mid - 1
                        top += 1
                        cand[top] = c
                        right[top] = hi_t
        # direct singleton run (span may need widening to >= 1)
        d = b[j - 1] - a[j - 1]
        if d < 1:
            d = 1
        best = dp[j - 1] + (d * inv) ** rho
        if top >= 0:
            o = cand[top]
            v = _span_cost(dp[o], b[j - 1], a[o], inv, rho)
            if v < best:
                best = v
        dp[j] = best
    return dp[S]


@njit(cache=True)
def collapse_segments(lo, hi):
    """Merge touching items (lo[k+1] <= hi[k]) into segments.

    Returns (a, b, count); a/b are oversized buffers, use the first
    `count` entries.
    """
    m = lo.shape[0]
    a = np.empty(m, dtype=np.int64)
    b = np.empty(m, dtype=np.int64)
    if m == 0:
        return a, b, 0
    s = 0
    a[0] = lo[0]
    b[0] = hi[0]
    for k in range(1, m):
        if lo[k] <= b[s]:
            if hi[k] > b[s]:
                b[s] = hi[k]
        else:
            s += 1
            a[s] = lo[k]
            b[s] = hi[k]
    return a, b, s + 1
