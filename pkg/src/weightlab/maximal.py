"""Maximal operators on grid functions, each with a brute-force oracle.

Three operators:

* ``dyadic_maximal``      M_d f(x) = max over dyadic ancestors Q of avg_Q |f|;
  the signed ("tilde") variant takes |avg_Q f| instead, which annihilates
  mean-zero pieces.
* ``uncentered_maximal``  max over grid-endpoint intervals containing the
  cell of the interval average of |f| (the cell's own value is the
  singleton interval).  This is the grid-restricted uncentered maximal: for
  piecewise-constant f it agrees with sup over intervals whose endpoints
  sit on cell boundaries.
* ``weighted_dyadic_maximal``  M_v f(x) = max over dyadic ancestors of
  (int_Q |f| v) / v(Q).

All interval averages are formed from one shared prefix-sum (dyadic ops:
one shared sum pyramid), so the fast paths and the exhaustive oracles see
identical floating-point candidates and agree bitwise.

The uncentered operator runs the naive O(N^2) sweep up to N = 4096 and a
divide-and-conquer convex-hull pass above (exact, gate-tested for equality
against the naive sweep).
"""

from __future__ import annotations

import numpy as np

from .weights import GridFunction, GridWeight

NAIVE_CEILING = 4096


# ---------------------------------------------------------------------------
# shared average builders

def _prefix(values: np.ndarray) -> np.ndarray:
    P = np.zeros(len(values) + 1)
    np.cumsum(values, out=P[1:])
    return P


def _sum_pyramid(values: np.ndarray) -> list[np.ndarray]:
    levels = [np.asarray(values, dtype=float)]
    cur = levels[0]
    while len(cur) > 1:
        cur = cur[0::2] + cur[1::2]
        levels.append(cur)
    return levels


# ---------------------------------------------------------------------------
# dyadic maximal

def _dyadic_candidates(values: np.ndarray, signed: bool) -> list[np.ndarray]:
    """Per level d (cube size 2^d cells), the |average| candidates."""
    base = values if signed else np.abs(values)
    cands = []
    for d, sums in enumerate(_sum_pyramid(base)):
        avg = sums / (1 << d)
        cands.append(np.abs(avg) if signed else avg)
    return cands


def dyadic_maximal(f: GridFunction, signed: bool = False) -> GridFunction:
    """Dyadic maximal function; signed=True gives the tilde variant."""
    cands = _dyadic_candidates(f.values, signed)
    run = None
    for cand in reversed(cands):
        run = cand if run is None else np.maximum(np.repeat(run, 2), cand)
    return GridFunction(f.grid, run)


def dyadic_maximal_brute(f: GridFunction, signed: bool = False) -> GridFunction:
    """Oracle: explicit sweep over every dyadic ancestor of every cell."""
    cands = _dyadic_candidates(f.values, signed)
    n = f.grid.ncells
    out = np.empty(n)
    for i in range(n):
        out[i] = max(cands[d][i >> d] for d in range(len(cands)))
    return GridFunction(f.grid, out)


# ---------------------------------------------------------------------------
# weighted dyadic maximal

def _weighted_candidates(f: GridFunction, v: GridWeight) -> list[np.ndarray]:
    num = _sum_pyramid(np.abs(f.values) * v.cell_masses)
    den = _sum_pyramid(v.cell_masses)
    cands = []
    for ns, ds in zip(num, den):
        with np.errstate(invalid="ignore", divide="ignore"):
            avg = np.where(ds > 0, ns / ds, -np.inf)  # zero-mass cubes skipped
        cands.append(avg)
    return cands


def weighted_dyadic_maximal(f: GridFunction, v: GridWeight) -> GridFunction:
    """M_v f: maximal v dx-averages over dyadic ancestors."""
    cands = _weighted_candidates(f, v)
    run = None
    for cand in reversed(cands):
        run = cand if run is None else np.maximum(np.repeat(run, 2), cand)
    return GridFunction(f.grid, run)


def weighted_dyadic_maximal_brute(f: GridFunction, v: GridWeight) -> GridFunction:
    cands = _weighted_candidates(f, v)
    n = f.grid.ncells
    out = np.empty(n)
    for i in range(n):
        out[i] = max(cands[d][i >> d] for d in range(len(cands)))
    return GridFunction(f.grid, out)


# ---------------------------------------------------------------------------
# uncentered maximal: naive sweep, hull-based fast pass, exhaustive oracle

def _uncentered_naive_range(P: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """Max interval average per cell, intervals within [lo, hi] only."""
    n = hi - lo
    res = np.empty(n)
    acc = np.full(n, -np.inf)
    idx = np.arange(lo, hi, dtype=np.int64)
    for b in range(hi, lo, -1):
        m = b - lo
        col = (P[b] - P[lo:b]) / (b - idx[:m])
        np.maximum(acc[:m], col, out=acc[:m])
        res[m - 1] = acc[:m].max()
    return res


def _upper_hull(xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Strict upper hull of points sorted by x (collinear points dropped)."""
    hx: list[float] = []
    hy: list[float] = []
    for x, y in zip(xs, ys):
        # pop while slope(h[-2], h[-1]) <= slope(h[-1], new)
        while len(hx) >= 2 and (hy[-1] - hy[-2]) * (x - hx[-1]) <= (y - hy[-1]) * (
            hx[-1] - hx[-2]
        ):
            hx.pop()
            hy.pop()
        hx.append(x)
        hy.append(y)
    return np.asarray(hx), np.asarray(hy)


def _max_slope_to_hull(qx: np.ndarray, qy: np.ndarray, hx: np.ndarray, hy: np.ndarray) -> np.ndarray:
    """Max slope from each query point (left of the hull) to a hull vertex.

    The slope sequence along a strictly convex hull is unimodal in the
    vertex index, so a vectorized binary search on adjacent comparisons
    lands on the peak.
    """
    m = len(hx)
    if m == 1:
        return (hy[0] - qy) / (hx[0] - qx)
    lo = np.zeros(len(qx), dtype=np.int64)
    hi = np.full(len(qx), m - 1, dtype=np.int64)
    while True:
        active = lo < hi
        if not active.any():
            break
        mid = (lo + hi) >> 1
        g_mid = (hy[mid] - qy) / (hx[mid] - qx)
        g_nxt = (hy[mid + 1] - qy) / (hx[mid + 1] - qx)
        move = active & (g_nxt > g_mid)
        lo = np.where(move, mid + 1, lo)
        hi = np.where(active & ~move, mid, hi)
    return (hy[lo] - qy) / (hx[lo] - qx)


def _uncentered_dnc(P: np.ndarray, lo: int, hi: int, out: np.ndarray) -> None:
    n = hi - lo
    if n <= NAIVE_CEILING:
        np.maximum(out[lo:hi], _uncentered_naive_range(P, lo, hi), out=out[lo:hi])
        return
    mid = (lo + hi) // 2
    _uncentered_dnc(P, lo, mid, out)
    _uncentered_dnc(P, mid, hi, out)
    # straddling intervals: a in [lo, mid-1], b in [mid+1, hi]
    bx = np.arange(mid + 1, hi + 1, dtype=np.int64)
    by = P[mid + 1 : hi + 1]
    ax = np.arange(lo, mid, dtype=np.int64)
    ay = P[lo:mid]
    # cells in the left half: any b > mid works, best a is a prefix max
    uhx, uhy = _upper_hull(bx, by)
    T = _max_slope_to_hull(ax, ay, uhx, uhy)
    np.maximum.accumulate(T, out=T)
    np.maximum(out[lo:mid], T, out=out[lo:mid])
    # cells in the right half: any a <= mid-1 works, best b is a suffix max.
    # Point-reflecting (x,y) -> (-x,-y) preserves slopes, turns the lower
    # hull of the a-points into an upper hull, and puts the b-queries on
    # its left, so the same tangent search applies.
    lhx, lhy = _upper_hull(-ax[::-1], -ay[::-1])
    S = _max_slope_to_hull(-bx, -by, lhx, lhy)
    SM = np.maximum.accumulate(S[::-1])[::-1]
    np.maximum(out[mid:hi], SM, out=out[mid:hi])


def uncentered_maximal(f: GridFunction, method: str = "auto") -> GridFunction:
    """Grid-restricted uncentered Hardy-Littlewood maximal function.

    method: "naive" (O(N^2) sweep), "fast" (divide-and-conquer hull pass),
    or "auto" (naive up to 4096 cells).
    """
    vals = np.abs(f.values)
    P = _prefix(vals)
    n = len(vals)
    if method == "auto":
        method = "naive" if n <= NAIVE_CEILING else "fast"
    if method == "naive":
        out = _uncentered_naive_range(P, 0, n)
    elif method == "fast":
        out = np.full(n, -np.inf)
        _uncentered_dnc(P, 0, n, out)
    else:
        raise ValueError(f"unknown method {method!r}")
    return GridFunction(f.grid, out)


def uncentered_maximal_brute(f: GridFunction) -> GridFunction:
    """Oracle: exhaustive max over every grid-endpoint interval per cell."""
    vals = np.abs(f.values)
    P = _prefix(vals)
    n = len(vals)
    idx = np.arange(n + 1, dtype=np.int64)
    out = np.empty(n)
    for c in range(n):
        num = P[c + 1 :][None, :] - P[: c + 1][:, None]
        den = idx[c + 1 :][None, :] - idx[: c + 1][:, None]
        out[c] = (num / den).max()
    return GridFunction(f.grid, out)


def uncentered_restricted(values: np.ndarray) -> np.ndarray:
    """Uncentered maximal of a raw cell-value block (intervals inside it).

    Used for M(chi_Q w) restricted to a cube Q: truncation kills any gain
    from leaving Q, so intervals inside Q suffice.
    """
    vals = np.abs(np.asarray(values, dtype=float))
    P = _prefix(vals)
    n = len(vals)
    if n <= NAIVE_CEILING:
        return _uncentered_naive_range(P, 0, n)
    out = np.full(n, -np.inf)
    _uncentered_dnc(P, 0, n, out)
    return out
