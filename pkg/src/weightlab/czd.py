"""Calderon-Zygmund decomposition at height t with respect to v dx.

The stopping time walks the dyadic tree from the root and selects a cube
the first time its v-average of f exceeds t.  Selected cubes {Q_j} carry
the good/bad split g + sum_j b_j with exact cell-wise reconstruction and
mean-zero bad parts.  Signed f is supported by running the stopping time
on |f| while the averages a_j (and hence g, b_j) use f itself, which keeps
int b_j v = 0 exact.

The off-Omega vanishing of the signed dyadic maximal of b v is evaluated
in exact rational arithmetic (every float lifts exactly to a Fraction), so
"exactly zero" is a computed fact, not a tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .constants import DIM, ap_constant
from .errors import ConfigError
from .grid import Cube, Grid, cells_of, children
from .maximal import dyadic_maximal
from .weights import GridFunction, GridWeight


@dataclass
class CZDecomposition:
    height: float
    cubes: list[Cube]
    averages: list[float]  # signed v-averages a_j of f over Q_j
    selection_averages: list[float]  # v-averages of |f| (the stopping values)
    good: GridFunction
    bad_total: GridFunction
    source: GridFunction
    weight: GridWeight
    truncated: bool  # root v-average of |f| already exceeded t

    @property
    def omega_mask(self) -> np.ndarray:
        mask = np.zeros(self.good.grid.ncells, dtype=bool)
        for q in self.cubes:
            r = cells_of(self.good.grid, q)
            mask[r.start : r.stop] = True
        return mask

    def bad_part(self, j: int) -> GridFunction:
        vals = np.zeros_like(self.bad_total.values)
        r = cells_of(self.good.grid, self.cubes[j])
        vals[r.start : r.stop] = self.bad_total.values[r.start : r.stop]
        return GridFunction(self.good.grid, vals)

    def to_json_dict(self) -> dict:
        return {
            "t": self.height,
            "cubes": [
                {"level": q.level, "index": q.index, "avg": a}
                for q, a in zip(self.cubes, self.averages)
            ],
            "truncated": self.truncated,
        }


def _pyramids(f: GridFunction, v: GridWeight):
    fv = np.abs(f.values) * v.cell_masses
    fv_signed = f.values * v.cell_masses
    def pyr(x):
        levels = [x]
        cur = x
        while len(cur) > 1:
            cur = cur[0::2] + cur[1::2]
            levels.append(cur)
        return levels
    return pyr(fv), pyr(fv_signed), [lvl for lvl in v.mass.levels]


def cz_decompose(f: GridFunction, v: GridWeight, t: float) -> CZDecomposition:
    """Stopping-time decomposition of f at height t w.r.t. the measure v dx."""
    if not t > 0:
        raise ConfigError(f"CZ height must be positive, got {t}")
    if f.grid != v.grid:
        raise ConfigError("f and v on different grids")
    grid = f.grid
    if np.any(v.cell_masses <= 0) or not np.all(np.isfinite(v.cell_masses)):
        raise ConfigError("CZ decomposition needs strictly positive finite v-mass per cell")
    abs_pyr, signed_pyr, v_pyr = _pyramids(f, v)

    def avg_abs(q: Cube) -> float:
        d = grid.L - q.level
        return float(abs_pyr[d][q.index] / v_pyr[d][q.index])

    def avg_signed(q: Cube) -> float:
        d = grid.L - q.level
        return float(signed_pyr[d][q.index] / v_pyr[d][q.index])

    root = grid.root
    truncated = avg_abs(root) > t
    cubes: list[Cube] = []
    sel_avgs: list[float] = []
    stack = [root]
    while stack:
        q = stack.pop()
        val = avg_abs(q)
        if val > t:
            cubes.append(q)
            sel_avgs.append(val)
            continue
        if q.level < grid.L:
            left, right = children(grid, q)
            stack.append(right)
            stack.append(left)
    # stack order gives left-to-right selection; keep deterministic sort anyway
    order = sorted(range(len(cubes)), key=lambda i: cells_of(grid, cubes[i]).start)
    cubes = [cubes[i] for i in order]
    sel_avgs = [sel_avgs[i] for i in order]
    averages = [avg_signed(q) for q in cubes]

    good_vals = f.values.copy()
    bad_vals = np.zeros_like(f.values)
    for q, a in zip(cubes, averages):
        r = cells_of(grid, q)
        sl = slice(r.start, r.stop)
        bad_vals[sl] = f.values[sl] - a
        good_vals[sl] = a
    return CZDecomposition(
        height=t,
        cubes=cubes,
        averages=averages,
        selection_averages=sel_avgs,
        good=GridFunction(grid, good_vals),
        bad_total=GridFunction(grid, bad_vals),
        source=f,
        weight=v,
        truncated=truncated,
    )


# ---------------------------------------------------------------------------
# verification

@dataclass
class CheckResult:
    ok: bool
    worst: float  # worst margin (check-specific; see verify_cz)
    detail: str = ""

    def to_json_dict(self) -> dict:
        return {"ok": self.ok, "worst": self.worst, "detail": self.detail}


@dataclass
class CZVerifyReport:
    r: float
    ar: float
    bound: float  # 2^{nr} [v]_{A_r} * t
    above_height: CheckResult  # (i)  t < a_j
    average_bound: CheckResult  # (ii) a_j <= 2^{nr} [v]_{A_r} t
    good_bound: CheckResult  # (iii) |g| <= 2^{nr} [v]_{A_r} t a.e.
    cancellation: CheckResult  # (iv) int_{Q_j} b_j v = 0
    small_off_omega: CheckResult  # (v)  |f| <= t off Omega
    mass_accounting: CheckResult  # sum_j v(Q_j) <= (1/t) int |f| v

    @property
    def all_ok(self) -> bool:
        return all(
            c.ok
            for c in (
                self.above_height,
                self.average_bound,
                self.good_bound,
                self.cancellation,
                self.small_off_omega,
                self.mass_accounting,
            )
        )

    def to_json_dict(self) -> dict:
        return {
            "r": self.r,
            "a_r_constant": self.ar,
            "bound": self.bound,
            "checks": {
                "above_height": self.above_height.to_json_dict(),
                "average_bound": self.average_bound.to_json_dict(),
                "good_bound": self.good_bound.to_json_dict(),
                "cancellation": self.cancellation.to_json_dict(),
                "small_off_omega": self.small_off_omega.to_json_dict(),
                "mass_accounting": self.mass_accounting.to_json_dict(),
            },
            "pass": self.all_ok,
        }


def verify_cz(
    dec: CZDecomposition,
    v: GridWeight,
    r: float,
    rtol: float = 1e-12,
) -> CZVerifyReport:
    """Re-check the five defining properties of the decomposition.

    Verification never raises; every check reports pass/fail with its worst
    offender.  The average bound (ii) goes through the parent-cube route
    a_j <= (v(Q'_j)/v(Q_j)) avg_{Q'_j} <= 2^{nr} [v]_{A_r} t and is skipped
    for a truncated root selection (no parent to bound through).
    """
    if not r > 1:
        raise ConfigError(f"verify_cz needs r > 1, got {r}")
    grid = dec.good.grid
    t = dec.height
    ar = ap_constant(v, r)
    bound = 2.0 ** (DIM * r) * ar * t
    tol = 1.0 + rtol

    # (i) t < a_j on the stopping averages
    worst_i = min((a / t for a in dec.selection_averages), default=math.inf)
    check_i = CheckResult(all(a > t for a in dec.selection_averages), worst_i,
                          "min selection average over t")

    # (ii) selection averages against the doubling bound
    worst_ii = 0.0
    ok_ii = True
    for q, a in zip(dec.cubes, dec.selection_averages):
        if q.level == -grid.J:
            continue  # truncated root: flagged, no parent route
        worst_ii = max(worst_ii, a / bound)
        if a > bound * tol:
            ok_ii = False
    check_ii = CheckResult(ok_ii, worst_ii, "max selection average over 2^{nr}[v]_{A_r} t")

    # (iii) |g| <= bound cell-wise; a truncated root selection has no parent
    # route, so only off-Omega values and non-root averages are in scope
    gmax = 0.0
    mask_root = np.zeros(grid.ncells, dtype=bool)
    for q, a in zip(dec.cubes, dec.averages):
        if q.level == -grid.J:
            mask_root[:] = True
            continue
        gmax = max(gmax, abs(a))
    off_root = ~mask_root
    if off_root.any():
        gmax = max(gmax, float(np.abs(np.where(off_root, dec.good.values, 0.0)).max()))
    check_iii = CheckResult(gmax <= bound * tol, gmax / bound, "max |g| over bound")

    # (iv) cancellation, relative to int_{Q_j} |f| v
    worst_iv = 0.0
    for j, q in enumerate(dec.cubes):
        rng = cells_of(grid, q)
        sl = slice(rng.start, rng.stop)
        resid = abs(float(np.sum(dec.bad_total.values[sl] * v.cell_masses[sl])))
        scale = float(np.sum(np.abs(dec.source.values[sl]) * v.cell_masses[sl]))
        if scale > 0:
            worst_iv = max(worst_iv, resid / scale)
    check_iv = CheckResult(worst_iv <= 1e-12, worst_iv, "max |int b_j v| / int_{Q_j} |f| v")

    # (v) |f| <= t off Omega (exact: unselected cells never exceeded t)
    mask = dec.omega_mask
    off = np.abs(dec.source.values[~mask])
    worst_v = float(off.max() / t) if off.size else 0.0
    check_v = CheckResult(bool(np.all(off <= t)), worst_v, "max |f|/t off Omega")

    # mass accounting: sum_j v(Q_j) <= (1/t) int |f| v
    vsum = sum(v.mass_of(q) for q in dec.cubes)
    total = float(np.sum(np.abs(dec.source.values) * v.cell_masses))
    ok_m = vsum * t <= total * tol
    check_m = CheckResult(ok_m, (vsum * t / total) if total > 0 else 0.0,
                          "t sum_j v(Q_j) over int |f| v")

    return CZVerifyReport(
        r=r,
        ar=ar,
        bound=bound,
        above_height=check_i,
        average_bound=check_ii,
        good_bound=check_iii,
        cancellation=check_iv,
        small_off_omega=check_v,
        mass_accounting=check_m,
    )


# ---------------------------------------------------------------------------
# pointwise domination M_d(fv) <= M_d(gv) + Mtilde_d(bv)

@dataclass
class DominationReport:
    domination_ok: bool
    max_violation: float  # max of (lhs - rhs) / scale, cell-wise
    off_omega_exact_zero: bool  # exact rational evaluation of Mtilde_d(bv)
    off_omega_float_residual: float  # float-path max off Omega

    @property
    def all_ok(self) -> bool:
        return self.domination_ok and self.off_omega_exact_zero

    def to_json_dict(self) -> dict:
        return {
            "domination_ok": self.domination_ok,
            "max_violation": self.max_violation,
            "off_omega_exact_zero": self.off_omega_exact_zero,
            "off_omega_float_residual": self.off_omega_float_residual,
            "pass": self.all_ok,
        }


def _rational_bad_masses(dec: CZDecomposition, v: GridWeight) -> list[Fraction]:
    """Exact per-cell integrals of b v, with a_j as exact rational ratios."""
    grid = dec.good.grid
    out = [Fraction(0)] * grid.ncells
    for q in dec.cubes:
        rng = cells_of(grid, q)
        fv = [
            Fraction(float(dec.source.values[i])) * Fraction(float(v.cell_masses[i]))
            for i in rng
        ]
        vm = [Fraction(float(v.cell_masses[i])) for i in rng]
        a = sum(fv) / sum(vm)
        for off, i in enumerate(rng):
            out[i] = fv[off] - a * vm[off]
    return out


def pointwise_domination_check(
    dec: CZDecomposition,
    v: GridWeight,
    rtol: float = 1e-12,
) -> DominationReport:
    """Cell-wise M_d(fv) <= M_d(gv) + Mtilde_d(bv), and the vanishing of
    Mtilde_d(bv) off Omega.

    The float inequality is checked at relative tolerance rtol; the
    off-Omega vanishing is decided in exact rational arithmetic over the
    decomposition's defining averages, alongside the float-path residual.
    """
    grid = dec.good.grid
    vrep = v.cell_values
    fv = GridFunction(grid, dec.source.values * vrep)
    gv = GridFunction(grid, dec.good.values * vrep)
    bv = GridFunction(grid, dec.bad_total.values * vrep)
    lhs = dyadic_maximal(fv).values
    rhs = dyadic_maximal(gv).values + dyadic_maximal(bv, signed=True).values
    scale = np.maximum(np.abs(lhs), 1e-300)
    viol = float(((lhs - rhs) / scale).max())
    dominated = bool(np.all(lhs <= rhs * (1.0 + rtol) + 1e-300))

    mask = dec.omega_mask
    tilde_float = dyadic_maximal(bv, signed=True).values
    float_resid = float(tilde_float[~mask].max()) if (~mask).any() else 0.0

    # exact rational pyramid of int_Q b v over ancestors of off-Omega cells
    rational = _rational_bad_masses(dec, v)
    exact_zero = True
    levels = [rational]
    cur = rational
    while len(cur) > 1:
        cur = [cur[2 * i] + cur[2 * i + 1] for i in range(len(cur) // 2)]
        levels.append(cur)
    for i in np.nonzero(~mask)[0]:
        for d in range(len(levels)):
            if levels[d][int(i) >> d] != 0:
                exact_zero = False
                break
        if not exact_zero:
            break
    return DominationReport(
        domination_ok=dominated,
        max_violation=viol,
        off_omega_exact_zero=exact_zero,
        off_omega_float_residual=float_resid,
    )
