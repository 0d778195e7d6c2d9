import math

import numpy as np
import pytest

import weightlab as wl
import weightlab.experiments as exp
from weightlab.errors import ConfigError


def test_scaling_fit_trivial():
    fit = wl.scaling_fit([(1.0, 1.0), (2.0, 2.0), (4.0, 4.0)])
    assert fit.slope == pytest.approx(1.0, abs=1e-12)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)
    fit2 = wl.scaling_fit([(1.0, 1.0), (2.0, 4.0), (3.0, 9.0)])
    assert fit2.slope == pytest.approx(2.0, abs=1e-12)


def test_scaling_fit_errors():
    with pytest.raises(ConfigError):
        wl.scaling_fit([(1.0, 1.0), (2.0, 2.0)])
    with pytest.raises(ConfigError):
        wl.scaling_fit([(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)])
    with pytest.raises(ConfigError):
        wl.scaling_fit([(1.0, 1.0), (-2.0, 2.0), (3.0, 3.0)])


def test_sharpness_a1_analytic_values():
    res = wl.sharpness_a1_sweep([0.5, 1 / 3, 0.25, 0.2])
    rows = {r["delta"]: r for r in res.rows}
    assert rows[0.5]["numerator"] == 8.0
    assert rows[0.5]["denominator"] == 4.0
    assert rows[0.5]["ratio"] == 2.0
    assert rows[0.25]["ratio"] == 4.0
    for d, r in rows.items():
        assert r["numerator"] == d**-3
        assert r["denominator"] == d**-2
        assert r["numerator"] * d**3 == pytest.approx(1.0, rel=1e-14)
        assert r["slack"] == pytest.approx(1.0, rel=1e-12)
    fit = res.fits["ratio_vs_inv_delta"]
    assert fit.slope == pytest.approx(1.0, abs=1e-9)


def test_sharpness_a1_grid_cross_check():
    row = exp.sharpness_a1_grid(0.5, L=8)
    assert row["J"] == 4
    assert abs(row["rel_gap"]) <= 0.15
    with pytest.raises(ConfigError):
        exp.sharpness_a1_grid(0.25, L=8)


def test_sharpness_product_values():
    res = wl.sharpness_product_sweep([0.5, 0.25], [0.5, 0.25])
    rows = {(r["alpha"], r["delta"]): r for r in res.rows}
    r = rows[(0.5, 0.5)]
    assert r["numerator"] == 6.0
    assert r["denominator"] == 2.0
    assert r["ratio"] == 3.0
    assert r["ratio"] >= 0.5 / (0.5 * 0.5)
    # alpha halved at fixed delta doubles the ratio exactly
    assert rows[(0.25, 0.5)]["ratio"] == 2 * rows[(0.5, 0.5)]["ratio"]
    # closed-form oracle at (1/4, 1/4)
    num = (0.25**-2 - 1) / 0.25
    den = 0.25 / 0.25**2
    assert rows[(0.25, 0.25)]["ratio"] == pytest.approx(num / den, rel=1e-14)
    assert all(r["lower_ok"] for r in res.rows)


def test_sharpness_product_marginal_slopes():
    res = wl.sharpness_product_sweep([0.5, 0.25, 0.125, 0.0625], [0.5, 1 / 3, 0.25, 0.2])
    assert res.fits["ratio_vs_inv_alpha"].slope == pytest.approx(1.0, abs=1e-9)
    assert res.fits["ratio_vs_inv_delta"].slope >= 0.9


def test_r_parameter_algebra_spot_value():
    # [v] = e^2 - e, p = 1: log(e + [v]) = 2, r = 3, r' = 3/2, r^{r'} = 3 sqrt(3)
    row = exp.r_parameters(math.e**2 - math.e, 1.0)
    assert row["r"] == pytest.approx(3.0, rel=1e-14)
    assert row["r_conj"] == pytest.approx(1.5, rel=1e-14)
    assert row["r_pow"] == pytest.approx(3.0 * math.sqrt(3.0), rel=1e-12)
    assert row["r_pow"] <= 8.0
    assert row["r_pow_ok"] and row["ap_pow_ok"]


def test_r_algebra_grid():
    vs = list(np.geomspace(1.0, 1e6, 41))
    rows = exp.r_algebra_audit(vs, [1.0, 2.0, 4.0, 8.0])
    assert all(r["r_pow_ok"] for r in rows)
    assert all(r["ap_pow_ok"] for r in rows)
    # the sharper calculus bound: [v]^{2r'-2} <= e^2 when r' = 1 + 1/log(e+[v])
    for v in vs:
        rc = 1.0 + 1.0 / math.log(math.e + v)
        assert v ** (2 * rc - 2) <= math.e**2 * (1 + 1e-12)


def test_bound_audit_identity_weight():
    g = wl.build_grid(2, 5)
    one = wl.realize(wl.Constant(1.0), g)
    rep = exp.bound_audit_ap([("one", one)], 1.0)
    assert rep.all_ok
    row = rep.rows[0]
    assert row["ap"] == pytest.approx(1.0, rel=1e-12)
    # unweighted dyadic weak-(1,1) ratios never exceed 1 on the corpus
    assert row["max_ratio"] <= 1.0 + 1e-12
    assert rep.envelope_ainf <= 1.0 + 1e-12


def test_bound_audit_step_family():
    g = wl.build_grid(1, 6)
    fam = exp.step_family(g, alphas=(0.5, 0.25), n_random=1)
    for p in (1.0, 2.0):
        rep = exp.bound_audit_ap(fam, p)
        assert rep.all_ok
        assert rep.envelope_ainf < 10.0  # a loose family-wide envelope


def test_mixed_lemma_check(rng):
    g = wl.build_grid(1, 5)
    weights = [("one", wl.realize(wl.Constant(1.0), g))]
    for i in range(3):
        vals = tuple(float(v) for v in rng.lognormal(size=g.ncells))
        weights.append((f"w{i}", wl.realize(wl.Piecewise(vals), g)))
    rep = wl.mixed_lemma_check(weights, [1.5, 2.0, 3.0])
    assert rep.all_ok
    one_rows = [r for r in rep.rows if r["weight"] == "one"]
    for r in one_rows:
        assert r["ap"] == pytest.approx(1.0, rel=1e-12)
        assert r["mixed"] == pytest.approx(1.0, rel=1e-12)


def test_dual_exponent_identity():
    g = wl.build_grid(1, 6)
    rng = np.random.default_rng(2)
    vals = tuple(float(v) for v in rng.lognormal(size=g.ncells))
    v = wl.realize(wl.Piecewise(vals), g)
    assert exp.dual_exponent_identity_max_rel(v, 2.0) <= 1e-10
    assert exp.dual_exponent_identity_max_rel(v, 1.5) <= 1e-10


def test_buckley_empirical():
    g = wl.build_grid(1, 6)
    one = wl.realize(wl.Constant(1.0), g)
    rep = wl.buckley_empirical(one, 2.0)
    # bound term reduces to p' = 2 for the unit weight
    assert rep.bound_term == pytest.approx(2.0, rel=1e-10)
    assert rep.implied_c <= 1.0 + 1e-12  # ||Mf||_2 <= 2 ||f||_2 holds comfortably
    assert rep.dual_identity_ok
    rng = np.random.default_rng(4)
    w = exp.random_a1_weight(g, rng, cap=6.0)
    rep2 = wl.buckley_empirical(w, 2.0)
    assert rep2.dual_identity_ok
    assert rep2.max_ratio <= rep2.bound_term * 10  # envelope stays bounded


def test_buckley_envelope_refinement_stability():
    alphas = (0.5, 0.25)
    vals = {}
    for L in (6, 7):
        g = wl.build_grid(1, L)
        cs = []
        for a in alphas:
            rep = wl.buckley_empirical(wl.realize(wl.Step(a), g), 2.0, seed=1)
            cs.append(rep.implied_c)
        vals[L] = max(cs)
    assert abs(vals[7] / vals[6] - 1.0) < 0.10


def test_random_a1_weight_respects_cap(rng):
    g = wl.build_grid(1, 6)
    for _ in range(5):
        w = exp.random_a1_weight(g, rng, cap=10.0)
        assert wl.a1_constant(w) <= 10.0


def test_corpus_shapes(rng):
    g = wl.build_grid(1, 6)
    corpus = wl.test_function_corpus(g, seed=3, n_random=8)
    names = [n for n, _ in corpus]
    assert any(n.startswith("indicator") for n in names)
    assert any(n.startswith("spike") for n in names)
    assert any(n.startswith("one_sided_f") for n in names)
    assert sum(n.startswith("random") for n in names) == 8
    for _, f in corpus:
        assert np.all(f.values >= 0)
