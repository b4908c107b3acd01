import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_poly
from hardy_dirichlet import (
    CirclePolynomial,
    DirichletPolynomial,
    DomainError,
    SamplerConfig,
    builtin_spec,
    lambda_a,
)
from hardy_dirichlet.inequalities import (
    VERDICT_COLUMNS,
    condition_b_check,
    embed_lhs,
    g_r_at_one,
    growth_band_ok,
    growth_scan,
    helson_lhs,
    partial_sum_diagnostic,
    quartic_convergence_check,
    rama_partial_sum,
    rama_scan,
    theorem1_bounds,
    upper_real_scan,
    verify_circle_lemma,
    verify_condition_b,
    verify_embed,
    verify_helson,
    verify_upper_even,
)
from hardy_dirichlet.norms import norm_exact_two

CFG = SamplerConfig(samples=50_000, seed=5)
ZETA2_INV = 6 / math.pi**2


def ones(N):
    return DirichletPolynomial.from_terms({n: 1 for n in range(1, N + 1)})


# --- left-hand sides ---------------------------------------------------------------------


def test_embed_lhs_examples(small_table):
    assert embed_lhs(ones(3), 1, small_table) == pytest.approx(math.sqrt(2), rel=1e-15)
    F = random_poly(np.random.default_rng(0), 60)
    sq = [a for n, a in F.terms() if small_table.mobius_values[n]]
    assert embed_lhs(F, 2, small_table) == pytest.approx(math.sqrt(sum(abs(a) ** 2 for a in sq)), rel=1e-14)
    nsf = DirichletPolynomial.from_terms({4: 1.0, 12: 2.0, 18: -1.0})
    assert embed_lhs(nsf, 0.7, small_table) == 0
    assert helson_lhs(nsf, small_table) > 0
    with pytest.raises(DomainError):
        embed_lhs(F, 2.5, small_table)


def test_helson_lhs_example(small_table):
    ref = math.sqrt(sum(1 / small_table.divisors[n] for n in range(1, 11)))
    assert helson_lhs(ones(10), small_table) == pytest.approx(ref, rel=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_helson_below_two_norm(small_table, seed):
    F = random_poly(np.random.default_rng(seed), 200)
    assert helson_lhs(F, small_table) <= norm_exact_two(F).value


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_embed_at_two_always_passes(small_table, seed):
    F = random_poly(np.random.default_rng(seed), 200)
    rep = verify_embed(F, 2, CFG, small_table)
    assert rep.passed and rep.margin >= 0 and rep.std_error == 0 and rep.margin_units == "absolute"


def test_embed_lhs_monotone_in_q(small_table):
    # d(n)^(log2 q - 1) grows with q
    F = random_poly(np.random.default_rng(1), 100)
    vals = [embed_lhs(F, q, small_table) for q in (0.25, 0.5, 1, 1.5, 2)]
    assert vals == sorted(vals)


# --- verifiers ---------------------------------------------------------------------


def test_verify_embed_examples(small_table):
    D = DirichletPolynomial.from_spec(builtin_spec("one"), 50, small_table)
    rep = verify_embed(D, 1, CFG, small_table)
    assert rep.passed and rep.margin_units == "sigma" and rep.std_error > 0
    rng = np.random.default_rng(2)
    sqf = [n for n in range(1, 100) if small_table.mobius_values[n]]
    F = DirichletPolynomial.from_terms({n: complex(*rng.normal(size=2)) for n in sqf})
    assert verify_embed(F, 0.5, CFG, small_table).passed


def test_verify_helson_examples(small_table):
    single = DirichletPolynomial.from_terms({6: 2 - 1j})
    rep = verify_helson(single, SamplerConfig(samples=1000), small_table)
    assert rep.passed and rep.lhs == pytest.approx(abs(2 - 1j) / 2, rel=1e-15)
    one = DirichletPolynomial.from_terms({1: 3.0})
    rep = verify_helson(one, SamplerConfig(samples=1000), small_table)
    assert rep.passed and rep.lhs == pytest.approx(rep.rhs_value, rel=1e-15)


def test_verify_upper_even_examples(small_table):
    rep = verify_upper_even(ones(2), 2, small_table)
    assert rep.lhs == pytest.approx(math.sqrt(3), rel=1e-15)
    assert rep.rhs_value == pytest.approx(6**0.25, rel=1e-15)
    assert rep.passed
    rep = verify_upper_even(ones(20), 2, small_table)
    assert rep.passed and rep.std_error == 0 and rep.rhs.method == "exact_even"


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_upper_even_j1_margin_zero(small_table, seed, integer):
    F = random_poly(np.random.default_rng(seed), 80, integer=integer)
    rep = verify_upper_even(F, 1, small_table)
    assert rep.passed and rep.margin == 0


def test_verify_circle_lemma_example():
    rep = verify_circle_lemma(CirclePolynomial(np.array([1, 0.5])), 1)
    assert rep.passed and rep.lhs == pytest.approx(math.sqrt(1.125), rel=1e-15)


def test_report_serialization(small_table):
    rep = verify_embed(ones(10), 1, CFG, small_table)
    d = json.loads(json.dumps(rep.to_dict()))
    assert d["pass"] is True and d["rhs"]["method"] == "mc"
    header = rep.to_csv().splitlines()[0]
    assert tuple(header.split(",")) == VERDICT_COLUMNS


def test_digest_ignores_threads(small_table):
    F = ones(30)
    a = verify_embed(F, 1, SamplerConfig(samples=2000, seed=1, threads=1), small_table)
    b = verify_embed(F, 1, SamplerConfig(samples=2000, seed=1, threads=3), small_table)
    c = verify_embed(F, 1, SamplerConfig(samples=2000, seed=2, threads=1), small_table)
    assert a.inputs_digest == b.inputs_digest != c.inputs_digest
    assert a.to_dict() == b.to_dict()


# --- growth bound shapes and scans -------------------------------------------------------


def test_theorem1_bounds_examples(small_table):
    one = builtin_spec("one")
    lo, _ = theorem1_bounds(one, 10, 2, small_table)
    assert lo == pytest.approx(math.exp(lambda_a(one, 10, small_table) / 2), rel=1e-15)
    assert lo == pytest.approx(1.800559, abs=1e-5)
    lam = lambda_a(one, 1000, small_table)
    assert theorem1_bounds(one, 1000, 1, small_table)[1] == pytest.approx(lam * math.exp(lam / 4), rel=1e-15)
    assert theorem1_bounds(one, 1000, 0.5, small_table)[1] == pytest.approx(math.exp(lam / 4), rel=1e-15)
    assert theorem1_bounds(one, 1000, 3, small_table)[1] == pytest.approx(math.exp(3 * lam / 4), rel=1e-15)
    assert theorem1_bounds(one, 1, 1, small_table)[0] == 1


def test_mertens_sanity_band(big_table):
    one = builtin_spec("one")
    for N in (10**2, 10**3, 10**4, 10**5, 10**6):
        assert 1 <= math.exp(lambda_a(one, N, big_table)) / math.log(N) <= 4


def test_growth_scan_q2_exact(big_table):
    one = builtin_spec("one")
    rep = growth_scan(one, [2], [10**2, 10**3, 10**4, 10**5], CFG, big_table)
    for row in rep.rows:
        h = math.fsum(1 / n for n in range(1, row["N"] + 1))
        assert row["method"] == "exact2"
        assert row["ratio"] == pytest.approx(math.sqrt(h) / math.exp(lambda_a(one, row["N"], big_table) / 2))
        assert 0.5 <= row["ratio"] <= 2
    bounds = [r["bound"] for r in rep.rows]
    assert bounds == sorted(bounds)
    assert growth_band_ok(rep.summary["2.0"])


def test_growth_scan_exact_even_and_order(small_table):
    rep = growth_scan(builtin_spec("one"), [4, 1], [300, 100], SamplerConfig(samples=4000, seed=1), small_table)
    assert [(r["q"], r["N"]) for r in rep.rows] == [(1.0, 100), (1.0, 300), (4.0, 100), (4.0, 300)]
    assert all(r["method"] == "exact_even" for r in rep.rows if r["q"] == 4)
    assert all(0 < r["ratio"] < math.inf for r in rep.rows)


def test_growth_scan_empty(small_table):
    rep = growth_scan(builtin_spec("one"), [1, 2], [], CFG, small_table)
    assert rep.rows == [] and rep.summary == {}


def test_growth_band_rule():
    assert growth_band_ok({"band": 2.0, "monotone": True, "slope_log_ratio_vs_log_N": 0.05})
    assert not growth_band_ok({"band": 2.0, "monotone": True, "slope_log_ratio_vs_log_N": 0.2})
    assert growth_band_ok({"band": 2.0, "monotone": False, "slope_log_ratio_vs_log_N": 0.2})
    assert not growth_band_ok({"band": 11.0, "monotone": False, "slope_log_ratio_vs_log_N": 0.0})


# --- condition (B), squarefree sums, prime sums ------------------------------------------


def test_condition_b_example(small_table):
    rep = condition_b_check(builtin_spec("one"), 0, [10], small_table)
    row = rep.rows[0]
    # (3/2)(4/3)(6/5)(8/7) = 96/35
    assert row["product"] == pytest.approx(96 / 35, rel=1e-14)
    assert row["sum"] == pytest.approx(1 + 1 / 2 + 1 / 3 + 1 / 5 + 1 / 6 + 1 / 7 + 1 / 10, rel=1e-15)


def test_condition_b_negative_r(small_table):
    rep = condition_b_check(builtin_spec("one"), -60, [10, 1000], small_table)
    for row in rep.rows:
        assert row["product"] == pytest.approx(1, abs=1e-15)
        assert row["sum"] >= 1 and row["ratio"] <= row["product"]


def test_condition_b_bounded_r1(big_table):
    rep = verify_condition_b(builtin_spec("one"), 1, [10**3, 10**4, 10**5, 10**6], big_table)
    assert rep.passed and rep.lhs <= 3


def test_rama_examples(big_table):
    one = builtin_spec("one")
    assert rama_partial_sum(one, 0, 1, big_table) == 1
    cb = condition_b_check(one, 0, [10**4], big_table)
    assert rama_partial_sum(one, 0, 10**4, big_table) == cb.rows[0]["sum"]


def test_rama_sum_second_order_asymptotic(big_table):
    # sum_{n <= x} mu^2(n)/n = (6/pi^2)(log x + gamma - 2 zeta'(2)/zeta(2)) + O(x^(-1/2))
    zeta2 = math.pi**2 / 6
    dzeta2 = -0.93754825431584375370
    for x in (10**4, 10**5, 10**6):
        ref = ZETA2_INV * (math.log(x) + 0.5772156649015329 - 2 * dzeta2 / zeta2)
        assert abs(rama_partial_sum(builtin_spec("one"), 0, x, big_table) - ref) < 5 / math.sqrt(x)


def test_rama_scan_columns(big_table):
    rep = rama_scan(builtin_spec("one"), 1, 0, [10**5, 10**6], big_table)
    assert rep.columns == ("x", "sum", "main_term", "ratio", "coefficient")
    assert all(r["ratio"] > 1 for r in rep.rows)


def test_g_r_examples(big_table):
    one = builtin_spec("one")
    g = g_r_at_one(one, 1, 0, 10**6, big_table)
    assert abs(g.value - ZETA2_INV) <= g.tail_estimate * g.value
    assert abs(g.value - ZETA2_INV) / ZETA2_INV < 1e-5
    vals = [-g_r_at_one(one, 1, r, 10**6, big_table).log_value / 2**r for r in (4, 6, 8)]
    assert vals[0] < vals[1] < vals[2]
    # growth like log r: successive differences near log(6/4) and log(8/6)
    assert abs((vals[1] - vals[0]) - math.log(6 / 4)) < 0.5
    assert abs((vals[2] - vals[1]) - math.log(8 / 6)) < 0.5


def test_g_r_matched_constant_cancels(big_table):
    # a(p) = 1 and c = 1: log factor at p is log(1 - 1/p) + log(1 + 1/p) = log(1 - p^-2)
    g = g_r_at_one(builtin_spec("one"), 1, 0, 1000, big_table)
    ps = big_table.primes_upto(1000).tolist()
    assert g.log_value == pytest.approx(math.fsum(math.log1p(-(p**-2.0)) for p in ps), rel=1e-13)
    assert abs(g.log_value) < math.fsum(1 / (p * p - 1) for p in ps)


def test_quartic_check(big_table):
    one = builtin_spec("one")
    rep = quartic_convergence_check(one, [10**3, 10**4, 10**5, 10**6], big_table)
    assert all(r["increment"] < 1e-2 for r in rep.rows if r["x"] > 10**4)
    assert rep.summary["converging"]
    rep2 = quartic_convergence_check(builtin_spec("divisor"), [2], big_table)
    assert rep2.rows[0]["partial_sum"] == pytest.approx(2**4 / 4)
    rep3 = quartic_convergence_check(builtin_spec("power:0.45"), [10**3, 10**4, 10**5, 10**6], big_table)
    assert not rep3.summary["converging"]


# --- diagnostics ---------------------------------------------------------------------------------


def test_partial_sum_diagnostic(small_table):
    F = random_poly(np.random.default_rng(3), 100)
    rep = partial_sum_diagnostic(F, [10, 50, 100], 1, SamplerConfig(samples=4000, seed=2), small_table)
    assert rep.rows[-1]["ratio"] == pytest.approx(1.0)
    assert "diagnostic only" in rep.notes


def test_upper_real_scan(small_table):
    F = DirichletPolynomial.from_spec(builtin_spec("one"), 30, small_table)
    rep = upper_real_scan(F, [3.0], SamplerConfig(samples=20_000, seed=3), small_table)
    assert any("conjectural" in n for n in rep.notes)
    with pytest.raises(DomainError):
        upper_real_scan(F, [1.5], CFG, small_table)
