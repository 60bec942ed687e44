"""Chain construction, stationary solve, adjoints, semigroups, products."""

import numpy as np
import numpy.testing as npt
import pytest

from cutofflab import chains
from cutofflab.errors import (
    BadChainFile,
    DimensionMismatch,
    NegativeTime,
    NonIntegerDiscreteTime,
    NonPositiveStationary,
    NotStochastic,
    ParameterOutOfRange,
    Reducible,
    StateExplosion,
)

SYM2 = [[0.5, 0.5], [0.5, 0.5]]
CYCLE3 = [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]


def random_chain(n, rng, reversible=False):
    if reversible:
        W = rng.uniform(0.1, 1.0, size=(n, n))
        W = W + W.T
        P = W / W.sum(axis=1, keepdims=True)
    else:
        P = rng.uniform(0.05, 1.0, size=(n, n))
        P = P / P.sum(axis=1, keepdims=True)
    return chains.build_chain(P, "continuized")


def test_build_symmetric_two_state():
    c = chains.build_chain(SYM2)
    npt.assert_allclose(c.stationary, [0.5, 0.5], atol=1e-14)


def test_build_two_state_skewed():
    a, b = 0.2, 0.3
    c = chains.build_chain([[1 - a, a], [b, 1 - b]])
    npt.assert_allclose(c.stationary, [0.6, 0.4], atol=1e-12)


def test_identity_kernel_reducible():
    with pytest.raises(Reducible):
        chains.build_chain([[1.0, 0.0], [0.0, 1.0]])


def test_transient_state_rejected():
    with pytest.raises(NonPositiveStationary):
        chains.build_chain([[0.5, 0.5], [0.0, 1.0]])


def test_bad_row_sum_rejected():
    with pytest.raises(NotStochastic):
        chains.build_chain([[0.6, 0.6], [0.5, 0.5]])


def test_negative_entry_rejected():
    with pytest.raises(NotStochastic):
        chains.build_chain([[1.2, -0.2], [0.5, 0.5]])


def test_stationary_residual_small():
    rng = np.random.default_rng(0)
    for _ in range(20):
        c = random_chain(5, rng)
        assert np.abs(c.stationary @ c.kernel - c.stationary).sum() <= 1e-10
        assert np.all(c.stationary > 0)


def test_adjoint_symmetric_fixed_point():
    c = chains.build_chain(SYM2)
    npt.assert_allclose(c.adjoint().kernel, c.kernel, atol=1e-14)


def test_adjoint_reverses_cycle():
    c = chains.build_chain(CYCLE3)
    expect = np.array(CYCLE3).T
    npt.assert_allclose(c.adjoint().kernel, expect, atol=1e-12)


def test_adjoint_identity_and_involution():
    rng = np.random.default_rng(1)
    c = random_chain(4, rng)
    pi = c.stationary
    Pstar = c.adjoint().kernel
    # pi(x) P*(x,y) = pi(y) P(y,x)
    lhs = pi[:, None] * Pstar
    rhs = pi[None, :] * c.kernel.T
    npt.assert_allclose(lhs, rhs, atol=1e-12)
    npt.assert_allclose(c.adjoint().adjoint().kernel, c.kernel, atol=1e-12)
    npt.assert_allclose(c.adjoint().stationary, pi, atol=1e-12)


def test_reversible_and_normal_predicates():
    assert chains.is_reversible(chains.build_chain(SYM2))
    assert chains.is_normal(chains.build_chain(SYM2))
    cyc = chains.build_chain(CYCLE3)
    assert not chains.is_reversible(cyc)
    assert chains.is_normal(cyc)  # circulant
    rng = np.random.default_rng(2)
    rev = random_chain(5, rng, reversible=True)
    assert chains.is_reversible(rev)
    assert chains.is_normal(rev)


def test_lazify():
    cyc = chains.build_chain(CYCLE3)
    assert chains.lazify(cyc, 0.0).kernel is not None
    npt.assert_allclose(chains.lazify(cyc, 0.0).kernel, cyc.kernel)
    lazy = chains.lazify(cyc, 0.5)
    npt.assert_allclose(np.diag(lazy.kernel), [0.5, 0.5, 0.5])
    npt.assert_allclose(lazy.stationary, cyc.stationary)
    with pytest.raises(ParameterOutOfRange):
        chains.lazify(cyc, 1.0)


def test_lazify_scales_gap():
    # eigenvalues map affinely, so the gap of theta*I + (1-theta)*P scales
    rng = np.random.default_rng(3)
    c = random_chain(5, rng, reversible=True)
    evals = np.sort(np.linalg.eigvals(c.kernel).real)[::-1]
    lazy = c.lazify(0.3)
    evals_lazy = np.sort(np.linalg.eigvals(lazy.kernel).real)[::-1]
    npt.assert_allclose(1 - evals_lazy[1], 0.7 * (1 - evals[1]), atol=1e-10)


def test_semigroup_basics():
    c = chains.build_chain(SYM2, "continuized")
    npt.assert_allclose(c.semigroup_at(0.0), np.eye(2), atol=1e-12)
    for t in (0.3, 1.0, 2.5):
        npt.assert_allclose(c.semigroup_at(t)[0, 0], (1 + np.exp(-t)) / 2, atol=1e-12)
    big = c.semigroup_at(60.0)
    npt.assert_allclose(big, [[0.5, 0.5], [0.5, 0.5]], atol=1e-8)


def test_semigroup_chapman_kolmogorov():
    rng = np.random.default_rng(4)
    c = random_chain(4, rng)  # non-reversible path through expm
    for s, t in [(0.4, 1.1), (2.0, 0.7), (3.3, 3.3)]:
        lhs = c.semigroup_at(s + t)
        rhs = c.semigroup_at(s) @ c.semigroup_at(t)
        assert np.max(np.abs(lhs - rhs)) <= 1e-9


def test_semigroup_rows_stochastic():
    rng = np.random.default_rng(5)
    c = random_chain(6, rng, reversible=True)
    for t in (0.1, 1.0, 10.0):
        Pt = c.semigroup_at(t)
        npt.assert_allclose(Pt.sum(axis=1), np.ones(6), atol=1e-10)
        assert np.all(Pt >= 0)


def test_semigroup_discrete_powers():
    c = chains.build_chain(CYCLE3, "discrete")
    npt.assert_allclose(c.semigroup_at(3), np.eye(3), atol=1e-14)
    with pytest.raises(NonIntegerDiscreteTime):
        c.semigroup_at(1.5)
    with pytest.raises(NegativeTime):
        c.semigroup_at(-1)


def test_generator_view():
    c = chains.build_chain(SYM2, "continuized")
    g = c.generator()
    npt.assert_allclose(g.matrix.sum(axis=1), [0.0, 0.0], atol=1e-12)
    npt.assert_allclose(g.adjoint_matrix.sum(axis=1), [0.0, 0.0], atol=1e-12)
    assert g.discrete_pair is None
    gd = chains.build_chain(SYM2, "discrete").generator()
    assert gd.discrete_pair is not None


def test_dirichlet_form_constant_is_zero():
    c = chains.build_chain(SYM2, "continuized")
    assert chains.dirichlet_form(c, [3.0, 3.0], [3.0, 3.0]) == pytest.approx(0.0, abs=1e-14)


def test_dirichlet_form_two_state():
    # double-sum oracle: (1/2) sum pi(x) P(x,y) (f(x)-f(y))^2
    c = chains.build_chain(SYM2, "continuized")
    f = np.array([1.0, -1.0])
    oracle = 0.5 * sum(
        c.stationary[x] * c.kernel[x, y] * (f[x] - f[y]) ** 2
        for x in range(2) for y in range(2)
    )
    assert chains.dirichlet_form(c, f, f) == pytest.approx(oracle, abs=1e-14)
    assert oracle == pytest.approx(1.0)


def test_dirichlet_form_matches_double_sum_reversible():
    rng = np.random.default_rng(6)
    c = random_chain(5, rng, reversible=True)
    for _ in range(10):
        f = rng.standard_normal(5)
        g = rng.standard_normal(5)
        dbl = 0.5 * sum(
            c.stationary[x] * c.kernel[x, y] * (f[x] - f[y]) * (g[x] - g[y])
            for x in range(5) for y in range(5)
        )
        assert chains.dirichlet_form(c, f, g) == pytest.approx(dbl, abs=1e-12)


def test_dirichlet_form_adjoint_symmetry():
    rng = np.random.default_rng(7)
    c = random_chain(5, rng)
    for _ in range(5):
        f = rng.standard_normal(5)
        a = chains.dirichlet_form(c, f, f)
        b = chains.dirichlet_form(c.adjoint(), f, f)
        assert a == pytest.approx(b, abs=1e-12)


def test_dirichlet_form_dimension_mismatch():
    c = chains.build_chain(SYM2)
    with pytest.raises(DimensionMismatch):
        chains.dirichlet_form(c, [1.0, 2.0, 3.0], [1.0, 2.0])


def test_product_chain_two_coordinates():
    sym = chains.build_chain(SYM2, "continuized")
    prod = chains.product_chain([sym, sym], [0.5, 0.5])
    dense = prod.materialize()
    assert dense.n == 4
    npt.assert_allclose(dense.stationary, np.full(4, 0.25), atol=1e-12)
    evals = np.sort(np.linalg.eigvals(dense.kernel).real)[::-1]
    assert 1 - evals[1] == pytest.approx(0.5, abs=1e-12)


def test_product_semigroup_factorizes():
    sym = chains.build_chain(SYM2, "continuized")
    prod = chains.product_chain([sym, sym, sym], [0.2, 0.3, 0.5])
    dense = prod.materialize()
    for t in (0.5, 2.0):
        assert np.max(np.abs(prod.semigroup_at(t) - dense.semigroup_at(t))) <= 1e-10


def test_product_single_component_rejected():
    sym = chains.build_chain(SYM2)
    with pytest.raises(ParameterOutOfRange):
        chains.product_chain([sym], [1.0])


def test_product_state_explosion():
    sym = chains.build_chain(SYM2)
    with pytest.raises(StateExplosion):
        chains.product_chain([sym] * 13, np.full(13, 1 / 13)).kernel()


def test_stationarity_preserved_by_derived_kernels():
    rng = np.random.default_rng(8)
    c = random_chain(6, rng)
    pi = c.stationary
    for M in (c.adjoint().kernel, c.lazify(0.4).kernel, c.semigroup_at(1.7)):
        assert np.abs(pi @ M - pi).sum() <= 1e-10


def test_chain_io_roundtrip(tmp_path):
    rng = np.random.default_rng(9)
    c = random_chain(4, rng)
    txt = tmp_path / "chain.txt"
    chains.save_chain_text(c, txt)
    back = chains.load_chain(str(txt), "continuized")
    npt.assert_allclose(back.kernel, c.kernel, atol=1e-15)
    js = tmp_path / "chain.json"
    chains.save_chain_json(c, js)
    back = chains.load_chain(str(js))
    npt.assert_allclose(back.kernel, c.kernel, atol=1e-15)
    assert back.time_kind == "continuized"


@pytest.mark.parametrize("name,body", [
    ("bad.json", "this is not json"),
    ("list.json", "[1, 2, 3]"),
    ("nokernel.json", '{"time_kind": "discrete"}'),
    ("strings.json", '{"kernel": [["a", "b"], ["c", "d"]]}'),
    ("words.txt", "two by two"),
    ("negative.txt", "-2 1 0 0 1"),
    ("short.txt", "3 0.5 0.5"),
    ("empty.txt", ""),
])
def test_load_chain_rejects_unparseable_files(tmp_path, name, body):
    path = tmp_path / name
    path.write_text(body)
    with pytest.raises(BadChainFile):
        chains.load_chain(str(path))
