"""Divergence kernels, identities, sandwich bounds, envelope membership."""

import math

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cutofflab import chains
from cutofflab import divergences as dv
from cutofflab.errors import (
    AbsoluteContinuityViolated,
    DimensionMismatch,
    NonConvexDetected,
    NotTVType,
    ParameterOutOfRange,
    RatioUnbounded,
)


def random_pair(rng, n):
    a = rng.uniform(0.01, 1.0, n)
    b = rng.uniform(0.01, 1.0, n)
    return a / a.sum(), b / b.sum()


def delta(n, x=0):
    v = np.zeros(n)
    v[x] = 1.0
    return v


def uniform(n):
    return np.full(n, 1.0 / n)


# -- point values -------------------------------------------------------------

def test_kl_point_mass_vs_uniform():
    assert dv.f_divergence(delta(4), uniform(4), dv.KL()) == pytest.approx(
        math.log(4), abs=1e-12)
    assert dv.f_divergence(delta(4), uniform(4), dv.KL()) == pytest.approx(
        1.386294, abs=1e-6)


def test_chi2_point_mass_vs_uniform():
    assert dv.f_divergence(delta(4), uniform(4), dv.ChiSquare()) == pytest.approx(3.0)


def test_hellinger_point_mass_vs_uniform():
    assert dv.f_divergence(delta(4), uniform(4), dv.Hellinger2()) == pytest.approx(1.0)


def test_renyi_point_mass():
    for m in (3, 4, 7):
        assert dv.renyi(delta(m), uniform(m), 2.0) == pytest.approx(math.log(m), abs=1e-12)
        assert dv.renyi(delta(m), uniform(m), math.inf) == pytest.approx(math.log(m))


def test_renyi_order_one_is_kl():
    rng = np.random.default_rng(0)
    a, b = random_pair(rng, 6)
    assert dv.renyi(a, b, 1.0) == pytest.approx(
        dv.f_divergence(a, b, dv.KL()), abs=1e-14)


def test_tv_basic():
    a = np.array([0.7, 0.3])
    b = np.array([0.4, 0.6])
    assert dv.f_divergence(a, b, dv.TV()) == pytest.approx(0.3)


def test_js_bounded_by_two_ln_two():
    a = np.array([1.0, 0.0])
    b = np.array([0.0, 1.0])
    assert dv.f_divergence(a, b, dv.JensenShannon()) == pytest.approx(
        2 * math.log(2), abs=1e-12)


def test_lecam_equals_two_chi2_to_midpoint():
    rng = np.random.default_rng(1)
    a, b = random_pair(rng, 8)
    mid = 0.5 * (a + b)
    lhs = dv.f_divergence(a, b, dv.LeCam())
    rhs = 2.0 * dv.f_divergence(a, mid, dv.ChiSquare())
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_bhattacharyya_hellinger_link():
    rng = np.random.default_rng(2)
    a, b = random_pair(rng, 5)
    db = dv.f_divergence(a, b, dv.Bhattacharyya())
    h2 = dv.f_divergence(a, b, dv.Hellinger2())
    assert h2 == pytest.approx(2 - 2 * math.exp(-db), abs=1e-12)


def test_zero_conventions():
    # nu1 mass on a nu2-null state
    a = np.array([0.5, 0.5, 0.0])
    b = np.array([0.5, 0.0, 0.5])
    assert dv.f_divergence(a, b, dv.KL()) == math.inf
    assert dv.f_divergence(a, b, dv.ChiSquare()) == math.inf
    assert dv.f_divergence(a, b, dv.TV()) == pytest.approx(0.5)
    # alpha < 1 stays finite via the limit slope
    val = dv.f_divergence(a, b, dv.Alpha(0.5))
    assert math.isfinite(val) and val > 0
    # 0 * f(0/0) = 0: identical distributions with a shared null state
    c = np.array([0.5, 0.5, 0.0])
    assert dv.f_divergence(c, c, dv.KL()) == pytest.approx(0.0, abs=1e-15)


def test_nonnegativity_and_zero_iff_equal():
    rng = np.random.default_rng(3)
    for spec in (dv.TV(), dv.KL(), dv.ChiSquare(), dv.Hellinger2(),
                 dv.JensenShannon(), dv.LeCam(), dv.Alpha(1.7), dv.Alpha(0.3),
                 dv.Renyi(2.0), dv.Renyi(0.5)):
        a, b = random_pair(rng, 7)
        assert dv.f_divergence(a, b, spec) > 0
        assert dv.f_divergence(a, a, spec) == pytest.approx(0.0, abs=1e-13)


def test_spec_validation():
    with pytest.raises(ParameterOutOfRange):
        dv.Alpha(1.0)
    with pytest.raises(ParameterOutOfRange):
        dv.Renyi(1.0)
    with pytest.raises(ParameterOutOfRange):
        dv.Renyi(-2.0)
    with pytest.raises(ParameterOutOfRange):
        dv.Lp(0.5)
    with pytest.raises(ParameterOutOfRange):
        dv.DivergenceSpec("tv", 3.0)
    with pytest.raises(ParameterOutOfRange):
        dv.DivergenceSpec("nosuch")


def test_token_roundtrip():
    for spec in (dv.TV(), dv.KL(), dv.ChiSquare(), dv.Alpha(1.5), dv.Renyi(2.0),
                 dv.Lp(2.0), dv.Lp(math.inf), dv.Separation(), dv.RenyiInf(),
                 dv.ReverseRenyiInf(), dv.Hellinger2(), dv.ChiP(2.5)):
        assert dv.DivergenceSpec.parse(spec.token) == spec
    assert dv.DivergenceSpec.parse("renyi:2").param == 2.0
    assert dv.DivergenceSpec.parse("lp:inf").param == math.inf


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        dv.f_divergence([0.5, 0.5], [0.3, 0.3, 0.4], dv.TV())


def test_custom_f_matches_builtin_kl():
    spec = dv.CustomF(lambda t: np.where(t > 0, t * np.log(np.maximum(t, 1e-300)), 0.0)
                      - t + 1.0, 1.0, math.inf)
    rng = np.random.default_rng(4)
    a, b = random_pair(rng, 6)
    assert dv.f_divergence(a, b, spec) == pytest.approx(
        dv.f_divergence(a, b, dv.KL()), abs=1e-12)


# -- identities ----------------------------------------------------------------

def test_alpha_renyi_identity_exact():
    rng = np.random.default_rng(5)
    for alpha in (0.25, 0.5, 1.5, 2.0, 4.0):
        a, b = random_pair(rng, 9)
        d = dv.f_divergence(a, b, dv.Alpha(alpha))
        r = dv.renyi(a, b, alpha)
        assert r == pytest.approx(math.log1p((alpha - 1) * d) / (alpha - 1), abs=1e-12)


def test_lp_one_is_twice_tv():
    rng = np.random.default_rng(6)
    a, b = random_pair(rng, 8)
    assert dv.f_divergence(a, b, dv.Lp(1.0)) == pytest.approx(
        2 * dv.f_divergence(a, b, dv.TV()), abs=1e-12)


def test_lp_absolute_continuity():
    a = np.array([0.5, 0.5, 0.0])
    b = np.array([0.5, 0.0, 0.5])
    with pytest.raises(AbsoluteContinuityViolated):
        dv.f_divergence(a, b, dv.Lp(2.0))


def test_lp_monotone_in_p():
    rng = np.random.default_rng(7)
    a, b = random_pair(rng, 10)
    orders = [1.0, 1.5, 2.0, 3.0, 6.0, math.inf]
    vals = [dv.f_divergence(a, b, dv.Lp(p)) for p in orders]
    assert all(vals[i] <= vals[i + 1] + 1e-12 for i in range(len(vals) - 1))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 20), st.integers(0, 10_000))
def test_pinsker_for_small_orders(n, seed):
    rng = np.random.default_rng(seed)
    a, b = random_pair(rng, n)
    tv = dv.f_divergence(a, b, dv.TV())
    for alpha in (0.25, 0.5, 1.0):
        r = dv.renyi(a, b, alpha)
        assert 2 * alpha * tv ** 2 <= r + 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 20), st.integers(0, 10_000))
def test_order_monotonicity(n, seed):
    rng = np.random.default_rng(seed)
    a, b = random_pair(rng, n)
    grid = [0.25, 0.5, 0.75, 1.5, 2.0, 4.0, 8.0, math.inf]
    rvals = [dv.renyi(a, b, al) for al in grid]
    assert all(rvals[i] <= rvals[i + 1] + 1e-12 for i in range(len(rvals) - 1))
    dvals = [dv.f_divergence(a, b, dv.Alpha(al)) for al in grid[:-1]]
    assert all(dvals[i] <= dvals[i + 1] + 1e-12 for i in range(len(dvals) - 1))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 20), st.integers(0, 10_000))
def test_tv_sandwich_random_pairs(n, seed):
    rng = np.random.default_rng(seed)
    a, b = random_pair(rng, n)
    tv = dv.f_divergence(a, b, dv.TV())
    for spec in (dv.Hellinger2(), dv.JensenShannon(), dv.LeCam(),
                 dv.Alpha(0.5), dv.Alpha(0.25), dv.Renyi(0.5), dv.Bhattacharyya()):
        bounds = dv.tv_type_bounds(spec)
        val = dv.f_divergence(a, b, spec)
        assert float(bounds.psi(tv)) <= val + 1e-12
        assert val <= float(bounds.Psi(tv)) + 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 20), st.integers(0, 10_000))
def test_conjugate_bound(n, seed):
    rng = np.random.default_rng(seed)
    a, b = random_pair(rng, n)
    tv = dv.f_divergence(a, b, dv.TV())
    for spec in (dv.TV(), dv.Hellinger2(), dv.JensenShannon(), dv.LeCam(),
                 dv.Alpha(0.5)):
        c = dv.conjugate_bound_constant(spec)
        assert dv.f_divergence(a, b, spec) <= c * tv + 1e-12


def test_tv_type_bounds_closed_forms():
    s = np.array([0.05, 0.2, 0.5, 0.9])
    h = dv.tv_type_bounds(dv.Hellinger2())
    npt.assert_allclose(h.psi(s), s ** 2)
    npt.assert_allclose(h.Psi(s), 2 * s)
    js = dv.tv_type_bounds(dv.JensenShannon())
    npt.assert_allclose(js.psi(s), s ** 2)
    npt.assert_allclose(js.Psi(s), 2 * math.log(2) * s)
    lc = dv.tv_type_bounds(dv.LeCam())
    npt.assert_allclose(lc.psi(s), 2 * s ** 2)
    npt.assert_allclose(lc.Psi(s), 2 * s)
    al = dv.tv_type_bounds(dv.Alpha(0.5))
    npt.assert_allclose(al.psi(s), (np.exp(-0.125 * s ** 2) - 1) / (-0.5))
    npt.assert_allclose(al.Psi(s), 2 * s)
    re = dv.tv_type_bounds(dv.Renyi(0.5))
    npt.assert_allclose(re.psi(s), 0.25 * s ** 2)
    npt.assert_allclose(re.Psi(s), -np.log1p(-s) / 0.5)
    with pytest.raises(NotTVType):
        dv.tv_type_bounds(dv.Lp(2.0))
    with pytest.raises(NotTVType):
        dv.tv_type_bounds(dv.KL())


# -- envelope membership -------------------------------------------------------

def test_fpq_chi_square_exact():
    out = dv.fpq_membership(dv.Alpha(2.0), 2.0, 2.0)
    assert out.member
    assert out.m == pytest.approx(1.0, abs=1e-9)
    assert out.M == pytest.approx(1.0, abs=1e-9)


def test_fpq_cubic_limits():
    out = dv.fpq_membership(dv.Alpha(3.0), 2.0, 3.0)
    assert out.member
    assert out.limit_ratios == (1.5, 0.5, 0.5)
    for val in out.limit_ratios:
        assert out.m - 1e-9 <= val <= out.M + 1e-9


def test_fpq_alpha_three_halves_never_member():
    for p, q in [(2.0, 2.0), (2.0, 3.0), (1.5, 1.5), (1.5, 2.0), (2.0, 8.0)]:
        out = dv.fpq_membership(dv.Alpha(1.5), p, q)
        assert not out.member


def test_fpq_kl_not_member():
    f = lambda t: np.where(t > 0, t * np.log(np.maximum(t, 1e-300)), 0.0) - t + 1.0
    out = dv.fpq_membership(f, 2.0, 3.0)
    assert not out.member


def test_fpq_unbounded_ratio_raises():
    with pytest.raises(RatioUnbounded):
        dv.fpq_membership(dv.Alpha(3.0), 2.0, 2.0)


def test_fpq_nonconvex_raises():
    with pytest.raises(NonConvexDetected):
        dv.fpq_membership(lambda t: -np.abs(t - 1.0) ** 2, 2.0, 2.0)


def test_fpq_bad_orders():
    with pytest.raises(ParameterOutOfRange):
        dv.fpq_membership(dv.Alpha(2.0), 1.0, 2.0)
    with pytest.raises(ParameterOutOfRange):
        dv.fpq_membership(dv.Alpha(2.0), 3.0, 2.0)


# -- chain-level ----------------------------------------------------------------

def test_separation_two_state():
    c = chains.build_chain([[0.5, 0.5], [0.5, 0.5]], "continuized")
    assert dv.separation(c, 0, 0.0) == pytest.approx(1.0)
    assert dv.reverse_renyi_inf(c, 0, 0.0) == math.inf
    for t in (0.5, 1.0, 3.0):
        assert dv.separation(c, 0, t) == pytest.approx(math.exp(-t), abs=1e-12)
    assert dv.separation(c, 0, 40.0) == pytest.approx(0.0, abs=1e-12)


def test_separation_reverse_identity():
    rng = np.random.default_rng(8)
    W = rng.uniform(0.1, 1.0, (5, 5))
    W = W + W.T
    c = chains.build_chain(W / W.sum(1, keepdims=True), "continuized")
    for t in (0.2, 1.0, 4.0):
        s = dv.separation(c, 1, t)
        if s < 1.0:
            assert dv.reverse_renyi_inf(c, 1, t) == pytest.approx(
                math.log(1 / (1 - s)), abs=1e-12)


def test_lp_distance_two_state():
    c = chains.build_chain([[0.5, 0.5], [0.5, 0.5]], "continuized")
    for t in (0.3, 1.0, 2.0):
        assert dv.lp_distance(c, 0, t, 2.0) == pytest.approx(math.exp(-t), abs=1e-12)


def test_lp_distance_at_zero_uniform():
    c = chains.build_chain(np.full((5, 5), 0.2), "continuized")
    assert dv.lp_distance(c, 2, 0.0, math.inf) == pytest.approx(4.0)


def test_worst_case_transitive_cycle():
    holding = chains.build_chain(np.array([
        [0.4, 0.6, 0.0], [0.0, 0.4, 0.6], [0.6, 0.0, 0.4]]), "continuized")
    for t in (0.5, 2.0):
        w = dv.worst_case(holding, t, dv.TV())
        point = dv.pointwise_divergence(holding, 0, t, dv.TV())
        assert w == pytest.approx(point, abs=1e-12)


def test_worst_case_tv_at_zero():
    rng = np.random.default_rng(9)
    W = rng.uniform(0.1, 1.0, (4, 4))
    c = chains.build_chain(W / W.sum(1, keepdims=True), "continuized")
    assert dv.worst_case(c, 0.0, dv.TV()) == pytest.approx(
        1.0 - c.stationary.min(), abs=1e-12)


def test_worst_case_nonincreasing_continuized():
    rng = np.random.default_rng(10)
    W = rng.uniform(0.1, 1.0, (5, 5))
    W = W + W.T
    c = chains.build_chain(W / W.sum(1, keepdims=True), "continuized")
    ts = np.linspace(0.0, 8.0, 17)
    for spec in (dv.TV(), dv.KL(), dv.Lp(2.0), dv.Separation()):
        vals = [dv.worst_case(c, t, spec) for t in ts]
        assert all(vals[i + 1] <= vals[i] + 1e-10 for i in range(len(vals) - 1))
