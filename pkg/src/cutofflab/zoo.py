"""Example chain families with structure-exploiting curve evaluation.

Three families ship: the lazy hypercube walk (closed forms plus a
Hamming-weight lumping), the Pak interpolation Q = (1-c)P + c Pi on top of
the hypercube, and the two-factor product example whose second factor has
exp-scale state counts and therefore lives entirely in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp, xlogy

from . import divergences as dv
from .chains import FiniteChain, build_chain, product_chain
from .errors import COutOfRange, ParameterOutOfRange
from .mixing import DivergenceCurve

LN2 = math.log(2.0)
HORIZON_GAPS = 64.0


def _log_abs_expm1(x: np.ndarray) -> np.ndarray:
    """ln|e^x - 1| without overflow (x may be hundreds)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        small = np.log(np.abs(np.expm1(np.where(x > 30.0, 0.0, x))))
    return np.where(x > 30.0, x, small)


# -- hypercube ------------------------------------------------------------------

def _binomial_log_pi(n: int) -> np.ndarray:
    k = np.arange(n + 1)
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1) - n * LN2


def _lumped_kernel(n: int) -> np.ndarray:
    """Hamming-weight projection of the lazy walk: a birth-death chain."""
    L = np.zeros((n + 1, n + 1))
    k = np.arange(n + 1)
    L[k, k] = 0.5
    L[k[:-1], k[:-1] + 1] = (n - k[:-1]) / (2.0 * n)
    L[k[1:], k[1:] - 1] = k[1:] / (2.0 * n)
    return L


def _dense_lazy_kernel(n: int) -> np.ndarray:
    two = build_chain([[0.5, 0.5], [0.5, 0.5]], "continuized")
    if n == 1:
        return two.kernel
    return product_chain([two] * n, [1.0 / n] * n).kernel()


class HypercubeMember:
    """Lazy walk on {0,1}^n, continuized, with fast curve evaluation.

    Linear functionals of the distribution (TV and friends) come from the
    (n+1)-state lumped chain; everything with a closed product form (L2,
    Renyi, KL, separation, Hellinger) is evaluated per coordinate, which is
    both faster and immune to the eigensolver noise in the lumped tails.
    """

    kind = "hypercube"
    time_kind = "continuized"

    def __init__(self, n: int):
        if n < 1:
            raise ParameterOutOfRange(f"dimension must be >= 1, got {n}")
        self.n = n
        self.lam = 1.0 / n
        self.kappa = 1.0 - 1.0 / n
        self.lambda_prime = 1.0 if n == 1 else min(1.0, -math.log(self.kappa))
        self.horizon = HORIZON_GAPS / self.lam
        self._log_binom = (gammaln(n + 1) - gammaln(np.arange(n + 1) + 1)
                           - gammaln(n - np.arange(n + 1) + 1))
        self._pi = np.exp(self._log_binom - n * LN2)

    def lumped_distribution(self, t: float) -> np.ndarray:
        """Law of the Hamming weight at time t, started from weight 0.

        Coordinates refresh independently in continuized time, so this is
        exactly Binomial(n, q(t)); the log-space evaluation keeps relative
        precision even in tails far below the underflow of a naive product.
        """
        q = self._q(t)
        k = np.arange(self.n + 1)
        log_mu = self._log_binom + xlogy(k, q) + xlogy(self.n - k, 1.0 - q)
        return np.exp(log_mu)

    def _q(self, t: float) -> float:
        return 0.5 * -math.expm1(-t / self.n)

    def _closed_form(self, spec):
        n = self.n
        kind = spec.kind if isinstance(spec, dv.DivergenceSpec) else None

        def renyi_total(t, alpha):
            q = self._q(t)
            if alpha == math.inf:
                return n * (LN2 + math.log1p(-q))
            return n * (LN2 + math.log((1 - q) ** alpha + q ** alpha) / (alpha - 1.0))

        if kind == "lp" and spec.param == 2.0:
            return lambda t: math.sqrt(
                math.expm1(n * math.log1p(math.exp(-2.0 * t / n))))
        if kind == "chi2":
            return lambda t: math.expm1(n * math.log1p(math.exp(-2.0 * t / n)))
        if kind == "alpha":
            a = spec.param
            def alpha_curve(t):
                with np.errstate(over="ignore"):
                    return float(np.expm1((a - 1.0) * renyi_total(t, a)) / (a - 1.0))
            return alpha_curve
        if kind == "renyi":
            return lambda t: renyi_total(t, spec.param)
        if kind == "rinf":
            return lambda t: renyi_total(t, math.inf)
        if kind == "kl":
            def kl_curve(t):
                q = self._q(t)
                ent = 0.0 if q in (0.0, 1.0) else q * math.log(q) + (1 - q) * math.log1p(-q)
                return n * (LN2 + ent)
            return kl_curve
        if kind == "sep":
            return lambda t: -math.expm1(n * math.log(2.0 * self._q(t))) \
                if self._q(t) > 0 else 1.0
        if kind == "rrinf":
            return lambda t: -n * math.log(2.0 * self._q(t)) if self._q(t) > 0 else math.inf
        if kind == "hell2":
            def hell_curve(t):
                q = self._q(t)
                bc = (math.sqrt(q) + math.sqrt(1.0 - q)) / math.sqrt(2.0)
                return 2.0 * -math.expm1(n * math.log(bc))
            return hell_curve
        if kind == "bhat":
            def bhat_curve(t):
                q = self._q(t)
                return -n * math.log((math.sqrt(q) + math.sqrt(1.0 - q)) / math.sqrt(2.0))
            return bhat_curve
        return None

    def curve(self, spec) -> DivergenceCurve:
        fn = self._closed_form(spec)
        if fn is None:
            fn = lambda t: dv.f_divergence(self.lumped_distribution(t), self._pi, spec)
        return DivergenceCurve(fn, time_kind=self.time_kind, spec=spec,
                               horizon=self.horizon)

    def chain(self) -> FiniteChain:
        """Dense kernel; feasible for n <= 12."""
        return build_chain(_dense_lazy_kernel(self.n), "continuized")

    def default_eps_grid(self):
        return (0.4, 0.3)


def hypercube(n: int) -> HypercubeMember:
    return HypercubeMember(n)


# -- Pak interpolation ----------------------------------------------------------

def pak_transform(base: FiniteChain, c: float) -> FiniteChain:
    """Q = (1-c) P + c Pi, the uniform-restart interpolation toward pi."""
    if not (0.0 < c < 1.0):
        raise COutOfRange(f"c must lie in (0, 1), got {c}")
    pi = base.stationary
    Q = (1.0 - c) * base.kernel + c * np.outer(np.ones(base.n), pi)
    return FiniteChain(Q, time_kind=base.time_kind, states=base.states,
                       _stationary=pi)


def pak_identity_report(base: FiniteChain, c: float, t_grid) -> dict:
    """Max absolute error of the algebraic Pak identities on a time grid.

    TV, L2 and operator norm scale by (1-c)^t in discrete time and by
    e^{-ct} (with the base clock slowed to (1-c)t) in continuized time;
    kappa scales by exactly (1-c), hence -ln kappa shifts by -ln(1-c).
    The lambda_prime comparison is on the unclipped -ln kappa.
    """
    from .spectral import operator_norm_deviation, spectral_summary

    Q = pak_transform(base, c)
    discrete = base.time_kind == "discrete"
    errs = {"tv": 0.0, "l2": 0.0, "opnorm": 0.0}
    for t in t_grid:
        if discrete:
            factor = (1.0 - c) ** t
            base_t = t
        else:
            factor = math.exp(-c * t)
            base_t = (1.0 - c) * t
        pairs = (
            ("tv", dv.worst_case(Q, t, dv.TV()), dv.worst_case(base, base_t, dv.TV())),
            ("l2", dv.worst_case(Q, t, dv.Lp(2.0)), dv.worst_case(base, base_t, dv.Lp(2.0))),
            ("opnorm", operator_norm_deviation(Q, t),
             operator_norm_deviation(base, base_t)),
        )
        for key, left, right in pairs:
            errs[key] = max(errs[key], abs(left - factor * right))
    kappa_p = spectral_summary(base).kappa
    kappa_q = spectral_summary(Q).kappa
    errs["lambda_prime"] = abs(
        (-math.log(kappa_q)) - (-math.log(kappa_p) - math.log(1.0 - c)))
    return errs


class PakMember:
    """Discrete-time Pak chain over the lazy hypercube base.

    The exact mixture Q_t = (1-c)^t P_t + (1 - (1-c)^t) Pi turns every curve
    query into the base (lumped) distribution plus a convex shift toward
    stationarity, so no dense state space is ever touched.
    """

    kind = "pak"
    time_kind = "discrete"

    def __init__(self, n: int, c: float):
        if not (0.0 < c < 1.0):
            raise COutOfRange(f"c must lie in (0, 1), got {c}")
        self.n = n
        self.c = c
        base_kappa = 1.0 - 1.0 / n
        self.lam = 1.0 - (1.0 - c) * base_kappa
        self.kappa = (1.0 - c) * base_kappa
        self.lambda_prime = 1.0 if self.kappa == 0 else min(1.0, -math.log(self.kappa))
        self.horizon = HORIZON_GAPS / self.lam
        self._L = _lumped_kernel(n)
        self._pi = np.exp(_binomial_log_pi(n))
        w0 = np.zeros(n + 1)
        w0[0] = 1.0
        self._steps = [w0]

    def _base_weight_law(self, t: int) -> np.ndarray:
        while len(self._steps) <= t:
            self._steps.append(self._steps[-1] @ self._L)
        return self._steps[t]

    def distribution(self, t: int) -> np.ndarray:
        """Lumped law of Q at integer time t via the exact mixture identity."""
        decay = (1.0 - self.c) ** t
        return decay * self._base_weight_law(t) + (1.0 - decay) * self._pi

    def curve(self, spec) -> DivergenceCurve:
        fn = lambda t: dv.f_divergence(self.distribution(int(round(t))), self._pi, spec)
        return DivergenceCurve(fn, time_kind="discrete", spec=spec,
                               horizon=self.horizon)

    def chain(self) -> FiniteChain:
        """Dense Q; feasible for n <= 12."""
        base = build_chain(_dense_lazy_kernel(self.n), "discrete")
        return pak_transform(base, self.c)

    def default_eps_grid(self):
        return (0.4, 0.3)


def default_pak_c(n: int) -> float:
    return 1.0 / (n * math.sqrt(math.log(n)))


# -- product example --------------------------------------------------------------

class ProductExampleMember:
    """Two-factor product: a slow 2-state factor U against a fast uniform
    factor V on g states, with g carried only as ln g.

    The distribution from the worst start concentrates on four density
    atoms (U agrees/disagrees x V at start/elsewhere), so every built-in
    divergence reduces to log-sum-exp arithmetic over four numbers.
    """

    kind = "product_example"
    time_kind = "continuized"

    def __init__(self, p: float, ln_g: float, n: int | None = None):
        if not (0.0 < p < 0.5):
            raise ParameterOutOfRange(f"p must lie in (0, 1/2), got {p}")
        if not (ln_g > 0.0 and math.isfinite(ln_g)):
            raise ParameterOutOfRange(f"ln_g must be positive and finite, got {ln_g}")
        self.p = p
        self.ln_g = ln_g
        self.n = n
        self.lam = p
        self.kappa = 1.0 - p
        self.lambda_prime = min(1.0, -math.log1p(-p))
        self.horizon = HORIZON_GAPS / p
        ln_gm1 = ln_g + math.log1p(-math.exp(-ln_g))
        self._ln_mass = np.array([-LN2 - ln_g, -LN2 - ln_g,
                                  -LN2 + ln_gm1 - ln_g, -LN2 + ln_gm1 - ln_g])
        self._ln_gm1 = ln_gm1

    # closed forms named in the source formulas
    def d2_U(self, t: float) -> float:
        return math.exp(-self.p * t)

    def d2_V(self, t: float) -> float:
        return math.exp(0.5 * self._ln_gm1 - (1.0 - self.p) * t)

    def dKL_U(self, t: float) -> float:
        e = math.exp(-self.p * t)
        plus, minus = 0.5 * (1 + e), 0.5 * (1 - e)
        val = plus * math.log(2 * plus) if plus > 0 else 0.0
        if minus > 0:
            val += minus * math.log(2 * minus)
        return val

    def dKL_V(self, t: float) -> float:
        r = (1.0 - self.p) * t
        ln_B = self._ln_gm1 - r
        lh_start = np.logaddexp(0.0, ln_B)
        mass_start = math.exp(-r) + math.exp(-self.ln_g) * -math.expm1(-r)
        tail = -math.expm1(-r) * (1.0 - math.exp(-self.ln_g))
        val = mass_start * lh_start
        if tail > 0:
            val += tail * math.log1p(-math.exp(-r))
        return val

    def atoms(self, t: float):
        """(ln mass, ln density) for the four product atoms at time t."""
        e_u = math.exp(-self.p * t)
        r = (1.0 - self.p) * t
        ln_B = self._ln_gm1 - r
        with np.errstate(divide="ignore"):
            lh = np.array([
                math.log1p(e_u) + np.logaddexp(0.0, ln_B),
                np.log1p(-e_u) + np.logaddexp(0.0, ln_B),
                math.log1p(e_u) + np.log1p(-math.exp(-r)),
                np.log1p(-e_u) + np.log1p(-math.exp(-r)),
            ])
        return self._ln_mass, lh

    def _value(self, spec, t: float) -> float:
        lm, lh = self.atoms(t)
        kind = spec.kind if isinstance(spec, dv.DivergenceSpec) else None
        if kind is None:
            raise ParameterOutOfRange(
                "closed-form bundle supports built-in divergence kinds only")
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            if kind == "tv":
                return 0.5 * float(np.sum(np.exp(lm + _log_abs_expm1(lh))))
            if kind in ("chip", "lp"):
                p = spec.param
                if kind == "lp" and p == math.inf:
                    return float(np.max(np.abs(np.expm1(
                        np.where(lh > 700, np.inf, lh)))))
                s = float(np.sum(np.exp(lm + p * _log_abs_expm1(lh))))
                return s ** (1.0 / p) if kind == "lp" else s
            if kind == "chi2":
                return float(np.expm1(logsumexp(lm + 2.0 * lh)))
            if kind == "alpha":
                a = spec.param
                return float(np.expm1(logsumexp(lm + a * lh)) / (a - 1.0))
            if kind == "renyi":
                a = spec.param
                return float(logsumexp(lm + a * lh) / (a - 1.0))
            if kind == "rinf":
                return float(lh[0])
            if kind == "kl":
                terms = np.where(np.isfinite(lh), np.exp(lm + lh) * lh, 0.0)
                return float(np.sum(terms))
            if kind == "hell2":
                return 2.0 * -float(np.expm1(logsumexp(lm + 0.5 * lh)))
            if kind == "bhat":
                return -float(logsumexp(lm + 0.5 * lh))
            if kind == "sep":
                return -float(np.expm1(lh[3]))
            if kind == "rrinf":
                return -float(lh[3])
            if kind == "js":
                mix = np.logaddexp(0.0, lh) - LN2
                left = np.where(np.isfinite(lh),
                                np.exp(lm + lh) * (lh - mix), 0.0)
                return float(np.sum(left - np.exp(lm) * mix))
            if kind == "lecam":
                return float(np.sum(np.exp(
                    lm + 2.0 * _log_abs_expm1(lh) - np.logaddexp(0.0, lh))))
        raise ParameterOutOfRange(f"no closed form for kind {kind!r} on this family")

    def curve(self, spec) -> DivergenceCurve:
        return DivergenceCurve(lambda t: self._value(spec, t),
                               time_kind="continuized", spec=spec,
                               horizon=self.horizon)

    def chain(self) -> FiniteChain:
        """Dense materialization; needs g small enough to enumerate."""
        g = round(math.exp(self.ln_g))
        if 2 * g > 4096:
            raise ParameterOutOfRange(f"g={g} too large to materialize")
        two = build_chain([[0.5, 0.5], [0.5, 0.5]], "continuized")
        uni = build_chain(np.full((g, g), 1.0 / g), "continuized")
        return product_chain([two, uni], [self.p, 1.0 - self.p]).materialize()

    def default_eps_grid(self):
        return (0.4, 0.3, 0.001)


def product_example(p: float, ln_g: float) -> ProductExampleMember:
    return ProductExampleMember(p, ln_g)


def default_product_p(n: int) -> float:
    return 1.0 / (2.0 * math.log(n))


# -- family registry ---------------------------------------------------------------

@dataclass(frozen=True)
class ZooFamily:
    """A named, index-parametrized family of chain members."""

    kind: str
    builder: object
    default_eps: tuple
    description: str
    params: dict = field(default_factory=dict)

    def member(self, n: int):
        return self.builder(n)


def hypercube_family() -> ZooFamily:
    return ZooFamily("hypercube", HypercubeMember, (0.4, 0.3),
                     "lazy walk on {0,1}^n, continuized")


def pak_family(c_map=None) -> ZooFamily:
    c_map = default_pak_c if c_map is None else c_map
    return ZooFamily("pak", lambda n: PakMember(n, c_map(n)), (0.4, 0.3),
                     "discrete uniform-restart interpolation over the "
                     "lazy hypercube", params={"c": c_map})


def product_family(p_map=None, ln_g_map=None) -> ZooFamily:
    p_map = default_product_p if p_map is None else p_map
    ln_g_map = (lambda n: float(n * n)) if ln_g_map is None else ln_g_map
    return ZooFamily("product_example",
                     lambda n: ProductExampleMember(p_map(n), ln_g_map(n), n),
                     (0.4, 0.3, 0.001),
                     "slow 2-state factor against a fast uniform factor on "
                     "exp-many states", params={"p": p_map, "ln_g": ln_g_map})


FAMILY_BUILDERS = {
    "hypercube": hypercube_family,
    "pak": pak_family,
    "product": product_family,
    "product_example": product_family,
}


def get_family(kind: str, **kwargs) -> ZooFamily:
    if kind not in FAMILY_BUILDERS:
        raise ParameterOutOfRange(
            f"unknown family {kind!r}; available: {sorted(FAMILY_BUILDERS)}")
    return FAMILY_BUILDERS[kind](**kwargs)
