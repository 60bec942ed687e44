"""Curves, crossing times, and the cross-divergence comparison identities."""

import math

import numpy as np
import pytest

from cutofflab import chains, divergences as dv, mixing, spectral
from cutofflab.errors import (
    HorizonExceeded,
    NonIntegerDiscreteTime,
    ParameterOutOfRange,
)


def random_reversible(n, rng, continuized=True):
    W = rng.uniform(0.1, 1.0, (n, n))
    W = W + W.T
    P = W / W.sum(1, keepdims=True)
    return chains.build_chain(P, "continuized" if continuized else "discrete")


def two_state():
    return chains.build_chain([[0.5, 0.5], [0.5, 0.5]], "continuized")


def lazy_hypercube(n):
    size = 1 << n
    P = 0.5 * np.eye(size)
    for x in range(size):
        for i in range(n):
            P[x, x ^ (1 << i)] += 0.5 / n
    return chains.build_chain(P, "continuized")


def test_two_state_l2_curve_is_exponential():
    curve = mixing.sample_curve(two_state(), dv.Lp(2.0), np.linspace(0, 5, 11))
    for t in np.linspace(0, 5, 11):
        assert curve(t) == pytest.approx(math.exp(-t), abs=1e-12)
    assert curve.sampled_monotone()


def test_tv_curve_at_zero():
    rng = np.random.default_rng(0)
    c = random_reversible(5, rng)
    curve = mixing.curve_from_chain(c, dv.TV())
    assert curve(0.0) == pytest.approx(1.0 - c.stationary.min(), abs=1e-12)


def test_product_l2_curve_tensorizes():
    comp = chains.build_chain([[0.5, 0.5], [0.5, 0.5]], "continuized")
    prod = chains.product_chain([comp, comp], [0.5, 0.5]).materialize()
    for t in (0.0, 0.4, 1.0, 3.0):
        d2 = dv.worst_case(prod, t, dv.Lp(2.0))
        want = math.sqrt((1.0 + math.exp(-t)) ** 2 - 1.0)
        assert d2 == pytest.approx(want, abs=1e-10)


def test_mixing_time_exponential_curve():
    curve = mixing.curve_from_function(lambda t: math.exp(-t),
                                       time_kind="continuized", horizon=100.0)
    res = mixing.mixing_time(curve, 0.1)
    assert res.t_lo < math.log(10) <= res.t_hi + 1e-12
    assert res.t_hi - res.t_lo <= max(1e-6 * res.t_hi, 1e-9)
    assert res.t == res.t_hi
    assert res.method == "bisection"


def test_mixing_time_at_or_above_initial_value():
    rng = np.random.default_rng(1)
    c = random_reversible(4, rng)
    g0 = dv.worst_case(c, 0.0, dv.TV())
    res = mixing.mixing_time(c, g0 + 0.01, dv.TV())
    assert res.t == 0.0 and (res.t_lo, res.t_hi) == (0.0, 0.0)


def test_hypercube_tv_mixing_matches_dense_scan():
    c = lazy_hypercube(8)
    curve = mixing.curve_from_chain(c, dv.TV())
    res = mixing.mixing_time(curve, 0.25)
    # dense oracle: first grid point below eps at resolution 0.01
    t = max(res.t - 0.5, 0.0)
    while curve(t) > 0.25:
        t += 0.01
    assert abs(res.t - t) <= 0.01 + (res.t_hi - res.t_lo)


def test_discrete_bracket_is_one_step():
    rng = np.random.default_rng(2)
    c = random_reversible(5, rng, continuized=False).lazify(0.5)
    res = mixing.mixing_time(c, 0.1, dv.TV())
    assert res.method == "integer-scan"
    assert res.t_hi - res.t_lo == 1.0
    assert res.t == res.t_hi == float(int(res.t))
    curve = mixing.curve_from_chain(c, dv.TV())
    assert curve(res.t_lo) > 0.1 >= curve(res.t_hi)


def test_discrete_curve_rejects_fractional_time():
    rng = np.random.default_rng(3)
    c = random_reversible(3, rng, continuized=False)
    curve = mixing.curve_from_chain(c, dv.TV())
    with pytest.raises(NonIntegerDiscreteTime):
        curve(0.5)


def test_horizon_exceeded_carries_last_value():
    curve = mixing.curve_from_function(lambda t: math.exp(-t / 1000.0),
                                       time_kind="continuized", horizon=10.0)
    with pytest.raises(HorizonExceeded) as err:
        mixing.mixing_time(curve, 1e-3)
    assert err.value.last_value == pytest.approx(math.exp(-0.01))


def test_epsilon_monotonicity():
    rng = np.random.default_rng(4)
    c = random_reversible(5, rng)
    ts = [mixing.mixing_time(c, e, dv.TV()).t for e in (0.05, 0.1, 0.3)]
    assert ts[0] >= ts[1] >= ts[2]


def test_lp_order_monotonicity_of_mixing_times():
    rng = np.random.default_rng(5)
    c = random_reversible(5, rng)
    ts = [mixing.mixing_time(c, 0.2, dv.Lp(p)).t for p in (1.0, 2.0, 4.0)]
    slack = 1e-5
    assert ts[0] <= ts[1] + slack and ts[1] <= ts[2] + slack
    rs = [mixing.mixing_time(c, 0.2, dv.Renyi(a)).t for a in (0.5, 1.5, 2.0, 4.0)]
    assert all(rs[i] <= rs[i + 1] + slack for i in range(3))


def test_l2_submultiplicativity_of_mixing_times():
    rng = np.random.default_rng(6)
    for seed in range(3):
        c = random_reversible(4 + seed, np.random.default_rng(seed))
        eps = 0.3
        t1 = mixing.mixing_time(c, eps, dv.Lp(2.0))
        t2 = mixing.mixing_time(c, eps * eps, dv.Lp(2.0))
        assert t2.t <= 2.0 * t1.t + 2.0 * (t1.t_hi - t1.t_lo) + 1e-9


def test_spectral_lower_bound_below_measured_l1_time():
    rng = np.random.default_rng(7)
    for n in (4, 6):
        c = random_reversible(n, rng)
        bound = spectral.eigenvalue_lower_bounds(c, 0.2)["continuized"]
        measured = mixing.mixing_time(c, 0.2, dv.Lp(1.0))
        assert bound <= measured.t + (measured.t_hi - measured.t_lo) + 1e-9


def test_alpha_renyi_identity_random_chain():
    rng = np.random.default_rng(8)
    c = random_reversible(5, rng)
    out = mixing.alpha_renyi_mixing_identity(c, 1.5, 0.3)
    assert out.consistent
    assert out.t_alpha.t == pytest.approx(out.t_renyi.t, abs=1e-5)


def test_alpha_renyi_identity_boundary_at_zero():
    c = chains.build_chain(np.full((4, 4), 0.25), "continuized")
    out = mixing.alpha_renyi_mixing_identity(c, 2.0, 3.0)  # chi^2 of a point mass
    assert out.t_alpha.t == 0.0 and out.t_renyi.t == 0.0 and out.consistent


def test_alpha_renyi_identity_rejects_order_one():
    rng = np.random.default_rng(9)
    c = random_reversible(3, rng)
    with pytest.raises(ParameterOutOfRange):
        mixing.alpha_renyi_mixing_identity(c, 1.0, 0.3)


def test_renyi_halving_comparison():
    rng = np.random.default_rng(10)
    rev = random_reversible(5, rng)
    assert mixing.renyi_halving_comparison(rev, 4.0, 0.25)
    holding = chains.build_chain(np.array([
        [0.4, 0.6, 0.0], [0.0, 0.4, 0.6], [0.6, 0.0, 0.4]]), "continuized")
    assert mixing.renyi_halving_comparison(holding, 2.25, 0.25)
    assert mixing.renyi_halving_comparison(rev, 2.0, 50.0)  # above g(0): both zero


def test_leftmost_crossing_fallback_on_humped_curve():
    def humped(t):
        if t <= 1.5:
            return 1.0 - 0.53 * t
        if t <= 3.0:
            return 0.205 + 0.3 * (t - 1.5) / 1.5
        return 0.505 * math.exp(-(t - 3.0))

    curve = mixing.curve_from_function(humped, time_kind="continuized", horizon=50.0)
    res = mixing.mixing_time(curve, 0.3)
    want = 0.7 / 0.53  # first downcrossing, on the initial decreasing leg
    assert res.t == pytest.approx(want, abs=2e-2)
    assert curve(res.t) <= 0.3


def test_sample_curve_rejects_unsorted_grid():
    with pytest.raises(ParameterOutOfRange):
        mixing.sample_curve(two_state(), dv.TV(), [1.0, 0.5])


def test_matrix_backed_continuized_curves_monotone_on_grid():
    rng = np.random.default_rng(11)
    c = random_reversible(6, rng)
    for spec in (dv.TV(), dv.KL(), dv.Lp(2.0), dv.Separation()):
        curve = mixing.sample_curve(c, spec, np.linspace(0.0, 10.0, 41))
        assert curve.sampled_monotone()
