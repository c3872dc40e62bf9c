"""Compiled inner loops for the variation functionals.

Every kernel takes the partial-sum path as two float64 arrays (real and
imaginary parts) of length ``N + 1`` with ``S_0`` at index 0, and returns the
*p-th power* of the variation; callers take the root.
"""

from __future__ import annotations

import numba
import numpy as np

_STACK = 256


@numba.njit(cache=True, inline="always")
def _dist_pow(dr: float, di: float, half_p: float) -> float:
    d2 = dr * dr + di * di
    if half_p == 1.0:
        return d2
    return d2**half_p


@numba.njit(cache=True)
def dp_backward(re, im, p):
    """Exact O(N^2) dynamic program with deterministic tie-breaking.

    ``tail[i]`` is the best value of a partition of ``(i, N]`` starting at
    ``i``; ``cnt[i]`` its number of breakpoints; ``nxt[i]`` the next
    breakpoint.  Scanning ``j`` upward and replacing only on strict
    improvement of (value, -count) keeps the smallest ``j`` among ties, so
    the forward walk from 0 yields the lexicographically smallest breakpoint
    list among the optimal ones with the fewest breakpoints.
    """
    n = re.shape[0] - 1
    half_p = p / 2.0
    tail = np.zeros(n + 1)
    cnt = np.zeros(n + 1, np.int64)
    nxt = np.full(n + 1, -1, np.int64)
    for i in range(n - 1, -1, -1):
        best = -1.0
        bcnt = 0
        bj = -1
        ri = re[i]
        ii = im[i]
        for j in range(i + 1, n + 1):
            v = _dist_pow(re[j] - ri, im[j] - ii, half_p) + tail[j]
            c = cnt[j] + 1
            if v > best or (v == best and c < bcnt):
                best = v
                bcnt = c
                bj = j
        tail[i] = best
        cnt[i] = bcnt
        nxt[i] = bj
    return tail[0] if n > 0 else 0.0, nxt


@numba.njit(cache=True)
def dp_value(re, im, p):
    """Exact p-variation (to the p-th power) by branch and bound.

    Same recursion as the plain forward DP, V(j) = max_i V(i) + |S_j - S_i|^p,
    but candidates ``i`` are visited through a segment tree of bounding boxes.
    Since V is nondecreasing, a node covering ``[a, b]`` can contribute at
    most ``V(b) + (max distance from S_j to the box)^p``; nodes whose bound
    does not beat the incumbent are skipped.  The result is exact.
    """
    n = re.shape[0]
    if n <= 1:
        return 0.0
    half_p = p / 2.0
    size = 1
    while size < n:
        size *= 2
    lo_r = np.full(2 * size, np.inf)
    hi_r = np.full(2 * size, -np.inf)
    lo_i = np.full(2 * size, np.inf)
    hi_i = np.full(2 * size, -np.inf)
    for k in range(n):
        lo_r[size + k] = re[k]
        hi_r[size + k] = re[k]
        lo_i[size + k] = im[k]
        hi_i[size + k] = im[k]
    for v in range(size - 1, 0, -1):
        lo_r[v] = min(lo_r[2 * v], lo_r[2 * v + 1])
        hi_r[v] = max(hi_r[2 * v], hi_r[2 * v + 1])
        lo_i[v] = min(lo_i[2 * v], lo_i[2 * v + 1])
        hi_i[v] = max(hi_i[2 * v], hi_i[2 * v + 1])

    V = np.zeros(n)
    st_node = np.empty(_STACK, np.int64)
    st_lo = np.empty(_STACK, np.int64)
    st_w = np.empty(_STACK, np.int64)
    arg = 0
    for j in range(1, n):
        rj = re[j]
        ij = im[j]
        best = V[j - 1] + _dist_pow(rj - re[j - 1], ij - im[j - 1], half_p)
        barg = j - 1
        cand = V[arg] + _dist_pow(rj - re[arg], ij - im[arg], half_p)
        if cand > best:
            best = cand
            barg = arg
        top = 1
        st_node[0] = 1
        st_lo[0] = 0
        st_w[0] = size
        while top > 0:
            top -= 1
            node = st_node[top]
            lo = st_lo[top]
            w = st_w[top]
            if lo >= j - 1:
                continue
            hi = lo + w - 1
            if hi < j - 1:
                ar = max(abs(rj - lo_r[node]), abs(rj - hi_r[node]))
                ai = max(abs(ij - lo_i[node]), abs(ij - hi_i[node]))
                if V[hi] + _dist_pow(ar, ai, half_p) <= best:
                    continue
                if w == 1:
                    cand = V[lo] + _dist_pow(rj - re[lo], ij - im[lo], half_p)
                    if cand > best:
                        best = cand
                        barg = lo
                    continue
            h = w // 2
            st_node[top] = 2 * node
            st_lo[top] = lo
            st_w[top] = h
            top += 1
            st_node[top] = 2 * node + 1
            st_lo[top] = lo + h
            st_w[top] = h
            top += 1
        V[j] = best
        arg = barg
    return V[n - 1]


@numba.njit(cache=True)
def diameter(re, im):
    """Largest |S_b - S_a| over all pairs, with the pair (a < b)."""
    n = re.shape[0]
    best = 0.0
    ba = 0
    bb = 0
    for a in range(n):
        ra = re[a]
        ia = im[a]
        for b in range(a + 1, n):
            dr = re[b] - ra
            di = im[b] - ia
            d2 = dr * dr + di * di
            if d2 > best:
                best = d2
                ba = a
                bb = b
    return np.sqrt(best), ba, bb


@numba.njit(cache=True)
def real_extrema(re):
    """Indices of the turning points of a real path, plus both endpoints.

    Flat stretches are collapsed: a turning point is the last index of a
    strictly monotone run before the direction flips.
    """
    n = re.shape[0]
    out = np.empty(n, np.int64)
    m = 0
    out[m] = 0
    m += 1
    direction = 0
    last = 0
    for k in range(1, n):
        d = re[k] - re[k - 1]
        if d == 0.0:
            continue
        s = 1 if d > 0.0 else -1
        if direction != 0 and s != direction:
            out[m] = last
            m += 1
        direction = s
        last = k
    if n > 1 and out[m - 1] != n - 1:
        out[m] = n - 1
        m += 1
    return out[:m]
