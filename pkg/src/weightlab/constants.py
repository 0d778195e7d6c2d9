"""Muckenhoupt-type weight constants: local values, global suprema over the
dyadic cubes of a grid, the reverse-Holder checker, and doubling checks.

Conventions: n = 1 throughout (the dimensional factors 2^{n+1}, 2^{nr},
2^{np} are evaluated with n = 1); global suprema run over the dyadic cubes
of levels -J..L only, and every report carries that truncation note.
Divergent cached integrals surface as +inf constants, never exceptions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .grid import Cube, Grid, cells_of, parent
from .maximal import uncentered_restricted
from .weights import GridWeight, with_cached

DIM = 1  # n in the dimensional factors


@dataclass(frozen=True)
class ConstantKind:
    """Which constant: A1, Ap{p}, AinfExp, AinfFW, or Mixed{p, alpha, beta}."""

    tag: str
    p: float | None = None
    alpha: float | None = None
    beta: float | None = None

    def __post_init__(self):
        if self.tag not in ("A1", "Ap", "AinfExp", "AinfFW", "Mixed"):
            raise ConfigError(f"unknown constant kind {self.tag!r}")
        if self.tag == "Ap" and not (self.p is not None and self.p > 1):
            raise ConfigError("Ap kind needs p > 1")
        if self.tag == "Mixed":
            if not (self.p is not None and self.p > 1):
                raise ConfigError("Mixed kind needs p > 1")
            if self.alpha is None or self.beta is None or self.alpha < 0 or self.beta < 0:
                raise ConfigError("Mixed kind needs alpha, beta >= 0")


@dataclass
class ConstantReport:
    kind: ConstantKind
    value: float
    argmax: Cube
    per_level: list[tuple[int, float, int]]  # (level, max value, argmax index)
    truncation: tuple[int, int]  # (J, L)

    def to_json_dict(self) -> dict:
        def enc(x: float):
            return x if math.isfinite(x) else "inf"

        d: dict = {"kind": self.kind.tag}
        if self.kind.p is not None:
            d["p"] = self.kind.p
        if self.kind.alpha is not None:
            d["alpha"] = self.kind.alpha
        if self.kind.beta is not None:
            d["beta"] = self.kind.beta
        d["value"] = enc(self.value)
        d["argmax"] = {"level": self.argmax.level, "index": self.argmax.index}
        d["per_level"] = [
            {"level": k, "value": enc(v), "argmax_index": m} for k, v, m in self.per_level
        ]
        d["truncation"] = {"J": self.truncation[0], "L": self.truncation[1]}
        return d


# ---------------------------------------------------------------------------
# local constants

def ap_local(w: GridWeight, Q: Cube, p: float) -> float:
    """(avg_Q w) (avg_Q w^{1-p'})^{p-1}; +inf when the dual mass diverges."""
    length = Q.length
    m = w.mass_of(Q) / length
    d = w.dual_mass_of(Q, p) / length
    if math.isinf(d):
        return math.inf
    return m * d ** (p - 1.0)


def a1_local(w: GridWeight, Q: Cube) -> float:
    """(avg_Q w) / (ess inf_Q w); +inf at zero infimum."""
    inf_q = w.essinf_of(Q)
    avg = w.mass_of(Q) / Q.length
    if inf_q <= 0:
        return math.inf
    return avg / inf_q


def ainf_exp_local(w: GridWeight, Q: Cube) -> float:
    """(avg_Q w) exp(avg_Q log w^{-1}) (the exponential A_inf functional)."""
    length = Q.length
    avg = w.mass_of(Q) / length
    logavg = w.log_mass_of(Q) / length
    return avg * math.exp(-logavg)


def ainf_fw_local(w: GridWeight, Q: Cube) -> float:
    """(1/w(Q)) int_Q M(chi_Q w): the Fujii-Wilson functional.

    Exact for piecewise-constant weights; the uncentered maximal of the
    truncated weight is attained by intervals inside Q, so the restricted
    sweep suffices.  Analytic weights are refused: realize them on a grid.
    """
    if not w.is_piecewise:
        raise ConfigError(
            "Fujii-Wilson constant needs a piecewise-constant weight; "
            "realize the analytic weight on a grid first"
        )
    cells = cells_of(w.grid, Q)
    vals = w.cell_values[cells.start : cells.stop]
    mvals = uncentered_restricted(vals)
    integral = float(mvals.sum()) * w.grid.cell_width
    return integral / w.mass_of(Q)


def mixed_local(w: GridWeight, Q: Cube, p: float, alpha: float, beta: float) -> float:
    """A_p(w;Q)^alpha * A_inf^exp(w;Q)^beta."""
    out = 1.0
    if alpha > 0:
        ap = ap_local(w, Q, p)
        if math.isinf(ap):
            return math.inf
        out *= ap**alpha
    if beta > 0:
        out *= ainf_exp_local(w, Q) ** beta
    return out


# ---------------------------------------------------------------------------
# global suprema

def _level_values(w: GridWeight, kind: ConstantKind, k: int) -> np.ndarray:
    grid = w.grid
    scale = 2.0 ** float(k)  # 1/|Q| at level k
    m = w.mass.at_level(grid, k) * scale
    if kind.tag == "A1":
        inf_k = w.essinf.at_level(grid, k)
        with np.errstate(divide="ignore"):
            return np.where(inf_k > 0, m / inf_k, np.inf)
    if kind.tag == "Ap":
        d = w.duals[kind.p].at_level(grid, k) * scale
        return m * d ** (kind.p - 1.0)
    if kind.tag == "AinfExp":
        lg = w.logmass.at_level(grid, k) * scale
        return m * np.exp(-lg)
    if kind.tag == "Mixed":
        out = np.ones_like(m)
        if kind.alpha > 0:
            d = w.duals[kind.p].at_level(grid, k) * scale
            out = out * (m * d ** (kind.p - 1.0)) ** kind.alpha
        if kind.beta > 0:
            lg = w.logmass.at_level(grid, k) * scale
            out = out * (m * np.exp(-lg)) ** kind.beta
        return out
    raise ConfigError(f"no vectorized path for {kind.tag}")


def global_constant(w: GridWeight, kind: ConstantKind) -> ConstantReport:
    """Supremum of the local constant over every dyadic cube of the grid.

    Ties break to the smallest level, then smallest index.
    """
    if kind.tag in ("Ap", "Mixed") and kind.p not in w.duals:
        w = with_cached(w, dual=(kind.p,))
    grid = w.grid
    best = -math.inf
    best_cube = grid.root
    per_level: list[tuple[int, float, int]] = []
    for k in grid.levels():
        if kind.tag == "AinfFW":
            vals = np.array(
                [ainf_fw_local(w, Cube(k, m)) for m in range(grid.ncubes(k))]
            )
        else:
            vals = _level_values(w, kind, k)
        arg = int(np.argmax(vals))
        vmax = float(vals[arg])
        per_level.append((k, vmax, arg))
        if vmax > best:
            best = vmax
            best_cube = Cube(k, arg)
    return ConstantReport(kind, best, best_cube, per_level, (grid.J, grid.L))


def a1_constant(w: GridWeight) -> float:
    return global_constant(w, ConstantKind("A1")).value


def ap_constant(w: GridWeight, p: float) -> float:
    if p == 1:
        return a1_constant(w)
    return global_constant(w, ConstantKind("Ap", p=p)).value


def ainf_exp_constant(w: GridWeight) -> float:
    return global_constant(w, ConstantKind("AinfExp")).value


def ainf_fw_constant(w: GridWeight) -> float:
    return global_constant(w, ConstantKind("AinfFW")).value


# ---------------------------------------------------------------------------
# reverse Holder

@dataclass
class ReverseHolderReport:
    a1: float
    r_w: float
    eps_w: float
    max_lhs_over_rhs: float
    worst_cube: Cube
    rh_ok: bool
    levelset_samples: int
    levelset_violations: int
    max_levelset_ratio: float  # max of [w(E)/w(Q)] / [2 (|E|/|Q|)^eps]
    truncation: tuple[int, int]

    @property
    def ok(self) -> bool:
        return self.rh_ok and self.levelset_violations == 0

    def to_json_dict(self) -> dict:
        return {
            "a1": self.a1,
            "r_w": self.r_w,
            "eps_w": self.eps_w,
            "max_lhs_over_rhs": self.max_lhs_over_rhs,
            "worst_cube": {"level": self.worst_cube.level, "index": self.worst_cube.index},
            "rh_ok": self.rh_ok,
            "levelset_samples": self.levelset_samples,
            "levelset_violations": self.levelset_violations,
            "max_levelset_ratio": self.max_levelset_ratio,
            "pass": self.ok,
        }


def reverse_holder_exponent(a1: float) -> float:
    """r_w = 1 + 1/(2^{n+1} [w]_{A1}), n = 1."""
    return 1.0 + 1.0 / (2.0 ** (DIM + 1) * a1)


def reverse_holder_check(
    w: GridWeight,
    n_subsets: int = 64,
    seed: int = 0,
) -> ReverseHolderReport:
    """Check (avg_Q w^{r_w})^{1/r_w} <= 2 avg_Q w on every dyadic cube, plus
    the measure-comparison consequence w(E)/w(Q) <= 2 (|E|/|Q|)^{eps_w} on
    sampled E (every single cell of Q plus seeded random cell unions)."""
    a1 = a1_constant(w)
    if not math.isfinite(a1):
        raise ConfigError("reverse Holder check needs a finite A1 constant")
    rw = reverse_holder_exponent(a1)
    eps = 1.0 / (1.0 + 2.0 ** (DIM + 1) * a1)
    w = with_cached(w, power=(rw,))
    grid = w.grid
    worst = -math.inf
    worst_cube = grid.root
    for k in grid.levels():
        scale = 2.0 ** float(k)
        lhs = (w.powers[rw].at_level(grid, k) * scale) ** (1.0 / rw)
        rhs = 2.0 * w.mass.at_level(grid, k) * scale
        ratio = lhs / rhs
        arg = int(np.argmax(ratio))
        if float(ratio[arg]) > worst:
            worst = float(ratio[arg])
            worst_cube = Cube(k, arg)
    rng = np.random.default_rng(seed)
    cells = w.cell_masses
    samples = 0
    violations = 0
    max_ratio = -math.inf
    for k in grid.levels():
        m = 1 << (grid.L - k)
        for idx in range(grid.ncubes(k)):
            sl = slice(idx * m, (idx + 1) * m)
            block = cells[sl]
            wq = float(w.mass.at_level(grid, k)[idx])
            # single cells: the extremal small-|E| cases
            ratios = (block / wq) / (2.0 * (1.0 / m) ** eps)
            samples += m
            violations += int(np.count_nonzero(ratios > 1.0))
            max_ratio = max(max_ratio, float(ratios.max()))
            if m > 1:
                for _ in range(n_subsets):
                    mask = rng.random(m) < 0.5
                    sz = int(mask.sum())
                    if sz == 0:
                        continue
                    we = float(block[mask].sum())
                    bound = 2.0 * (sz / m) ** eps
                    ratio = (we / wq) / bound
                    samples += 1
                    if ratio > 1.0:
                        violations += 1
                    max_ratio = max(max_ratio, ratio)
    return ReverseHolderReport(
        a1=a1,
        r_w=rw,
        eps_w=eps,
        max_lhs_over_rhs=worst,
        worst_cube=worst_cube,
        rh_ok=worst <= 1.0,
        levelset_samples=samples,
        levelset_violations=violations,
        max_levelset_ratio=max_ratio,
        truncation=(grid.J, grid.L),
    )


# ---------------------------------------------------------------------------
# doubling

@dataclass
class DoublingReport:
    p: float
    ap: float
    max_parent_ratio: float
    parent_bound: float
    parent_ok: bool
    max_double_ratio: float
    double_bound: float
    double_ok: bool
    truncated_doubles: int

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "ap": self.ap,
            "max_parent_ratio": self.max_parent_ratio,
            "parent_bound": self.parent_bound,
            "parent_ok": self.parent_ok,
            "max_double_ratio": self.max_double_ratio,
            "double_bound": self.double_bound,
            "double_ok": self.double_ok,
            "truncated_doubles": self.truncated_doubles,
        }


def doubling_check(v: GridWeight, p: float, rtol: float = 1e-12) -> DoublingReport:
    """v(2Q) / v(Q) against 2^{np} [v]_{A_p}, and the parent-cube variant
    v(Q') / v(Q) <= 2^{np} [v]_{A_p} used by the CZ verifier.

    2Q is evaluated for cube levels k <= L-1 (so its endpoints are
    cell-aligned) and truncated to the domain where necessary; truncations
    are counted in the report.
    """
    grid = v.grid
    ap = ap_constant(v, p)
    bound = 2.0 ** (DIM * p) * ap
    # parent-cube variant over all non-root cubes
    max_parent = -math.inf
    for k in grid.levels():
        if k == -grid.J:
            continue
        child = v.mass.at_level(grid, k)
        par = np.repeat(v.mass.at_level(grid, k - 1), 2)
        max_parent = max(max_parent, float((par / child).max()))
    # doubled cubes, cell-aligned at level k+1
    cells = v.cell_masses
    csum = np.concatenate([[0.0], np.cumsum(cells)])
    max_double = -math.inf
    truncated = 0
    n = grid.ncells
    for k in grid.levels():
        if k == grid.L:
            continue  # 2Q of a single cell is not cell-aligned
        m = 1 << (grid.L - k)  # cells per cube
        half = m // 2
        starts = np.arange(grid.ncubes(k)) * m
        lo = starts - half
        hi = starts + m + half
        clipped = (lo < 0) | (hi > n)
        truncated += int(np.count_nonzero(clipped))
        lo = np.clip(lo, 0, n)
        hi = np.clip(hi, 0, n)
        dq = csum[hi] - csum[lo]
        q = v.mass.at_level(grid, k)
        max_double = max(max_double, float((dq / q).max()))
    tol = 1.0 + rtol
    return DoublingReport(
        p=p,
        ap=ap,
        max_parent_ratio=max_parent,
        parent_bound=bound,
        parent_ok=max_parent <= bound * tol,
        max_double_ratio=max_double,
        double_bound=bound,
        double_ok=max_double <= bound * tol,
        truncated_doubles=truncated,
    )
