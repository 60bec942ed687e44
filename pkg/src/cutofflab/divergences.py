"""Divergences between finite probability vectors and to stationarity.

Conventions: f-divergences use D_f(nu1 || nu2) = sum_x nu2(x) f(nu1(x)/nu2(x))
with 0 * f(0/0) = 0, and mass of nu1 on nu2-null states contributes at the
limit slope f'(inf) = lim f(t)/t. KL and Renyi values are in nats. Infinity
is a first-class result, not an error; errors are reserved for divergences
that are mathematically undefined on the given pair (Lp without absolute
continuity) or for invalid parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, rel_entr, xlogy

from .errors import (
    AbsoluteContinuityViolated,
    DimensionMismatch,
    NonConvexDetected,
    NotTVType,
    ParameterOutOfRange,
    RatioUnbounded,
)

_PARAMETRIC = {"chip", "alpha", "renyi", "lp"}
_KINDS = {"tv", "kl", "chi2", "chip", "alpha", "renyi", "rinf", "hell2",
          "js", "lecam", "bhat", "lp", "sep", "rrinf"}


@dataclass(frozen=True)
class DivergenceSpec:
    """A named divergence, possibly with one real parameter."""

    kind: str
    param: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ParameterOutOfRange(f"unknown divergence kind {self.kind!r}")
        p = self.param
        if self.kind in _PARAMETRIC:
            if p is None:
                raise ParameterOutOfRange(f"{self.kind} needs a parameter")
            if self.kind == "chip" and not p > 0:
                raise ParameterOutOfRange("chi-p order must be positive")
            if self.kind in ("alpha", "renyi"):
                if not p > 0 or p == 1.0:
                    raise ParameterOutOfRange(
                        f"{self.kind} order must lie in (0,1) or (1,inf); "
                        "order 1 is the KL limit, use KL()")
                if self.kind == "alpha" and not np.isfinite(p):
                    raise ParameterOutOfRange("alpha order must be finite")
                if self.kind == "renyi" and not np.isfinite(p):
                    raise ParameterOutOfRange("infinite order is RenyiInf()")
            if self.kind == "lp" and not (p >= 1):
                raise ParameterOutOfRange("Lp order must satisfy p >= 1")
        elif p is not None:
            raise ParameterOutOfRange(f"{self.kind} takes no parameter")

    @property
    def token(self) -> str:
        if self.param is None:
            return self.kind
        p = self.param
        if np.isinf(p):
            return f"{self.kind}:inf"
        if float(p).is_integer():
            return f"{self.kind}:{int(p)}"
        return f"{self.kind}:{p:g}"

    @classmethod
    def parse(cls, token: str) -> "DivergenceSpec":
        token = token.strip().lower()
        if ":" in token:
            kind, raw = token.split(":", 1)
            param = math.inf if raw in ("inf", "infinity") else float(raw)
            return cls(kind, param)
        return cls(token)

    def __str__(self) -> str:
        return self.token


def TV() -> DivergenceSpec:
    return DivergenceSpec("tv")


def KL() -> DivergenceSpec:
    return DivergenceSpec("kl")


def ChiSquare() -> DivergenceSpec:
    return DivergenceSpec("chi2")


def ChiP(p: float) -> DivergenceSpec:
    return DivergenceSpec("chip", float(p))


def Alpha(a: float) -> DivergenceSpec:
    return DivergenceSpec("alpha", float(a))


def Renyi(a: float) -> DivergenceSpec:
    return DivergenceSpec("renyi", float(a))


def RenyiInf() -> DivergenceSpec:
    return DivergenceSpec("rinf")


def Hellinger2() -> DivergenceSpec:
    return DivergenceSpec("hell2")


def JensenShannon() -> DivergenceSpec:
    return DivergenceSpec("js")


def LeCam() -> DivergenceSpec:
    return DivergenceSpec("lecam")


def Bhattacharyya() -> DivergenceSpec:
    return DivergenceSpec("bhat")


def Lp(p: float) -> DivergenceSpec:
    return DivergenceSpec("lp", float(p))


def Separation() -> DivergenceSpec:
    return DivergenceSpec("sep")


def ReverseRenyiInf() -> DivergenceSpec:
    return DivergenceSpec("rrinf")


@dataclass(frozen=True)
class CustomF:
    """User-supplied convex f with f(1)=0, plus its declared limit values.

    slope_at_inf is lim_{t->inf} f(t)/t, equal to f*(0) for the conjugate
    f*(t) = t f(1/t); f_at_zero is f(0). Either may be math.inf.
    """

    f: "callable"
    f_at_zero: float
    slope_at_inf: float


def _f_data(spec: DivergenceSpec):
    """Return (vectorized f, f(0), f'(inf)) for an f-divergence kind."""
    kind, a = spec.kind, spec.param
    if kind == "tv":
        return lambda t: 0.5 * np.abs(t - 1.0), 0.5, 0.5
    if kind == "kl":
        return lambda t: xlogy(t, t) - t + 1.0, 1.0, math.inf
    if kind == "chi2":
        return lambda t: (t - 1.0) ** 2, 1.0, math.inf
    if kind == "chip":
        slope = math.inf if a > 1 else (1.0 if a == 1 else 0.0)
        return lambda t: np.abs(t - 1.0) ** a, 1.0, slope
    if kind == "alpha":
        slope = math.inf if a > 1 else a / (1.0 - a)
        return (lambda t: (np.power(t, a) - a * (t - 1.0) - 1.0) / (a - 1.0),
                1.0, slope)
    if kind == "hell2":
        return lambda t: (np.sqrt(t) - 1.0) ** 2, 1.0, 1.0
    if kind == "js":
        return (lambda t: xlogy(t, t) - xlogy(t + 1.0, (t + 1.0) / 2.0),
                math.log(2.0), math.log(2.0))
    if kind == "lecam":
        return lambda t: (t - 1.0) ** 2 / (t + 1.0), 1.0, 1.0
    raise NotTVType(f"{spec.token} is not an f-divergence kind")


F_DIVERGENCE_KINDS = ("tv", "kl", "chi2", "chip", "alpha", "hell2", "js", "lecam")


def _check_pair(nu1, nu2):
    nu1 = np.asarray(nu1, dtype=float)
    nu2 = np.asarray(nu2, dtype=float)
    if nu1.shape != nu2.shape or nu1.ndim != 1:
        raise DimensionMismatch(
            f"need equal-length vectors, got {nu1.shape} and {nu2.shape}")
    return nu1, nu2


def _generic_f(nu1, nu2, f, f_at_zero, slope_at_inf):
    pos = nu2 > 0.0
    ratio = nu1[pos] / nu2[pos]
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.asarray(f(ratio), dtype=float)
    total = float(np.sum(nu2[pos] * vals))
    extra = float(nu1[~pos].sum())
    if extra > 0.0:
        if math.isinf(slope_at_inf):
            return math.inf
        total += slope_at_inf * extra
    return total


def f_divergence(nu1, nu2, spec) -> float:
    """D_f, Renyi, Lp, separation, or related divergence of nu1 from nu2."""
    nu1, nu2 = _check_pair(nu1, nu2)
    if isinstance(spec, CustomF):
        val = _generic_f(nu1, nu2, spec.f, spec.f_at_zero, spec.slope_at_inf)
        return max(val, 0.0) if math.isfinite(val) else val
    kind = spec.kind
    if kind == "tv":
        return 0.5 * float(np.abs(nu1 - nu2).sum())
    if kind == "kl":
        return float(rel_entr(nu1, nu2).sum())
    if kind == "hell2":
        return max(2.0 - 2.0 * float(np.sqrt(nu1 * nu2).sum()), 0.0)
    if kind == "bhat":
        bc = float(np.sqrt(nu1 * nu2).sum())
        return math.inf if bc == 0.0 else max(-math.log(bc), 0.0)
    if kind == "renyi":
        return renyi(nu1, nu2, spec.param)
    if kind == "rinf":
        return renyi(nu1, nu2, math.inf)
    if kind == "lp":
        return _lp_pair(nu1, nu2, spec.param)
    if kind == "sep":
        return _separation_pair(nu1, nu2)
    if kind == "rrinf":
        s = _separation_pair(nu1, nu2)
        return math.inf if s >= 1.0 else -math.log1p(-s)
    f, f0, slope = _f_data(spec)
    val = _generic_f(nu1, nu2, f, f0, slope)
    return max(val, 0.0) if math.isfinite(val) else val


def _separation_pair(nu1, nu2) -> float:
    pos = nu2 > 0.0
    return float(np.max(1.0 - nu1[pos] / nu2[pos]))


def _lp_pair(nu1, nu2, p) -> float:
    if np.any((nu2 == 0.0) & (nu1 > 0.0)):
        raise AbsoluteContinuityViolated(
            "Lp distance needs nu1 absolutely continuous w.r.t. nu2")
    pos = nu2 > 0.0
    dev = np.abs(nu1[pos] / nu2[pos] - 1.0)
    if np.isinf(p):
        return float(dev.max())
    return float(np.sum(nu2[pos] * dev ** p) ** (1.0 / p))


def renyi(nu1, nu2, alpha) -> float:
    """Renyi divergence of order alpha; alpha=1 means the KL limit."""
    nu1, nu2 = _check_pair(nu1, nu2)
    if alpha == 1.0:
        return float(rel_entr(nu1, nu2).sum())
    if np.isinf(alpha):
        sup = nu1 > 0.0
        if np.any(nu2[sup] == 0.0):
            return math.inf
        return max(float(np.log(np.max(nu1[sup] / nu2[sup]))), 0.0)
    if not alpha > 0:
        raise ParameterOutOfRange(f"Renyi order must be positive, got {alpha}")
    # via the alpha-divergence identity R = log1p((alpha-1) D) / (alpha-1)
    d = f_divergence(nu1, nu2, Alpha(alpha))
    if math.isinf(d):
        return math.inf
    arg = (alpha - 1.0) * d
    if arg <= -1.0:
        return math.inf
    return max(math.log1p(arg) / (alpha - 1.0), 0.0)


# -- chain-level ------------------------------------------------------------

def pointwise_divergence(chain, x: int, t, spec) -> float:
    """d_f(x, t): divergence of the time-t law from x against stationarity."""
    return f_divergence(chain.distribution_from(x, t), chain.stationary, spec)


def lp_distance(chain, x: int, t, p: float) -> float:
    """L^p(pi) norm of the density of the time-t law from x, minus one."""
    return pointwise_divergence(chain, x, t, Lp(p))


def separation(chain, x: int, t) -> float:
    """max_y (1 - P_t(x,y) / pi(y)), in [0, 1]."""
    nu = chain.distribution_from(x, t)
    return min(max(_separation_pair(nu, chain.stationary), 0.0), 1.0)


def reverse_renyi_inf(chain, x: int, t) -> float:
    """ln 1/(1 - d_sep(x,t)); +inf when separation is 1."""
    s = separation(chain, x, t)
    return math.inf if s >= 1.0 else -math.log1p(-s)


def worst_case(chain, t, spec) -> float:
    """Divergence to stationarity maximized over the starting state."""
    pi = chain.stationary
    Pt = chain.semigroup_at(t)
    return max(f_divergence(Pt[x], pi, spec) for x in range(chain.n))


# -- total-variation sandwich -----------------------------------------------

@dataclass(frozen=True)
class TVTypeBounds:
    """Closed-form psi, Psi with psi(TV) <= D_f <= Psi(TV)."""

    spec: DivergenceSpec
    psi: "callable"
    Psi: "callable"


def tv_type_bounds(spec: DivergenceSpec) -> TVTypeBounds:
    """Sandwich functions for the TV-type divergences that admit them.

    Supported: Alpha(a<1), Hellinger2, LeCam, JensenShannon, plus Renyi(a<1)
    and Bhattacharyya through their monotone links to Alpha and Hellinger2.
    """
    kind, a = spec.kind, spec.param
    if kind == "alpha" and a < 1.0:
        def psi(s, a=a):
            return (np.exp(a * (a - 1.0) / 2.0 * np.square(s)) - 1.0) / (a - 1.0)

        def big(s, a=a):
            return np.asarray(s) / (1.0 - a)

        return TVTypeBounds(spec, psi, big)
    if kind == "hell2":
        return TVTypeBounds(spec, lambda s: np.square(s), lambda s: 2.0 * np.asarray(s))
    if kind == "lecam":
        return TVTypeBounds(spec, lambda s: 2.0 * np.square(s),
                            lambda s: 2.0 * np.asarray(s))
    if kind == "js":
        return TVTypeBounds(spec, lambda s: np.square(s),
                            lambda s: 2.0 * math.log(2.0) * np.asarray(s))
    if kind == "renyi" and a < 1.0:
        # compose the Alpha(a) sandwich with u -> log1p((a-1)u)/(a-1)
        def psi(s, a=a):
            return a / 2.0 * np.square(s)

        def big(s, a=a):
            return -np.log1p(-np.asarray(s)) / (1.0 - a)

        return TVTypeBounds(spec, psi, big)
    if kind == "bhat":
        # compose the Hellinger2 sandwich with u -> -log(1 - u/2)
        def psi(s):
            return -np.log1p(-np.square(s) / 2.0)

        def big(s):
            return -np.log1p(-np.asarray(s))

        return TVTypeBounds(spec, psi, big)
    raise NotTVType(f"no total-variation sandwich for {spec}")


def conjugate_bound_constant(spec) -> float:
    """f(0) + f*(0), the constant in D_f <= (f(0) + f*(0)) TV."""
    if isinstance(spec, CustomF):
        return spec.f_at_zero + spec.slope_at_inf
    _, f0, slope = _f_data(spec)
    return f0 + slope


# -- polynomial-envelope membership ------------------------------------------

@dataclass(frozen=True)
class FpqMembership:
    """Estimated sandwich m (|x-1|^p + |x-1|^q) <= f(x) <= M (...)."""

    p: float
    q: float
    m: float
    M: float
    member: bool
    limit_ratios: tuple | None = None


def _default_fpq_grid() -> np.ndarray:
    # Offsets below ~1e-3 are useless: computing f(1+u) loses so much
    # precision to cancellation that the ratio against u^p is pure noise.
    wide = np.geomspace(1e-9, 1e12, 4001)
    near = 1.0 + np.concatenate([-np.geomspace(3e-3, 0.9, 101),
                                 np.geomspace(3e-3, 10.0, 101)])
    grid = np.unique(np.concatenate([wide, near]))
    return grid[(grid > 0) & (np.abs(grid - 1.0) > 1e-3)]


MEMBER_FLOOR = 1e-9
UNBOUNDED_CEILING = 1e9


def _check_convexity(x: np.ndarray, fx: np.ndarray) -> None:
    """Reject f whose secant slopes decrease beyond floating-point noise."""
    dx = np.diff(x)
    slopes = np.diff(fx) / dx
    # Absolute error in each f sample is roughly eps * local magnitude; the
    # induced slope error scales with 1/dx, so the tolerance must too.
    local = np.maximum(1.0, np.maximum(np.abs(fx[:-1]), np.abs(fx[1:])))
    slope_err = 1e-13 * local / dx
    tol = 8.0 * (slope_err[:-1] + slope_err[1:]) + 1e-12 * np.maximum(
        1.0, np.abs(slopes[1:]))
    if np.any(np.diff(slopes) < -tol):
        raise NonConvexDetected("second differences of f go negative on the grid")


def fpq_membership(spec_or_f, p: float, q: float, grid=None) -> FpqMembership:
    """Estimate the envelope constants of f against |x-1|^p + |x-1|^q.

    When p == q the envelope is the single term |x-1|^p. spec_or_f is either
    Alpha(a) or a plain convex callable with f(1) = 0. For Alpha the question
    has an exact answer (the three regimes x -> 1, x -> inf, x -> 0 pin the
    admissible exponents to p = 2 and q = a), so the verdict is analytic and
    the grid only supplies the interior envelope constants. Callables are
    judged on the grid alone: RatioUnbounded when the upper constant blows
    past the ceiling, member=False when the lower ratio falls through the
    floor. A vanishing lower ratio is a legitimate answer about f, not an
    error, hence no raise on that side.
    """
    if not (1.0 < p <= q and np.isfinite(q)):
        raise ParameterOutOfRange(f"need 1 < p <= q < inf, got p={p}, q={q}")
    alpha = None
    if isinstance(spec_or_f, DivergenceSpec):
        if spec_or_f.kind != "alpha":
            raise ParameterOutOfRange("envelope membership expects Alpha or a callable")
        alpha = spec_or_f.param
        fvec, _, _ = _f_data(spec_or_f)
    elif isinstance(spec_or_f, CustomF):
        raw = spec_or_f.f
        fvec = lambda t: np.asarray(raw(np.asarray(t, dtype=float)), dtype=float)
    else:
        raw = spec_or_f
        fvec = lambda t: np.asarray(raw(np.asarray(t, dtype=float)), dtype=float)
        if abs(float(fvec(np.array([1.0]))[0])) > 1e-12:
            raise ParameterOutOfRange("f(1) must vanish")

    x = _default_fpq_grid() if grid is None else np.asarray(grid, dtype=float)
    x = np.sort(x[x > 0])
    with np.errstate(over="ignore", invalid="ignore"):
        fx = np.asarray(fvec(x), dtype=float)
        denom = np.abs(x - 1.0) ** p
        if q > p:
            denom = denom + np.abs(x - 1.0) ** q
    ok = np.isfinite(fx) & np.isfinite(denom) & (denom > 0)
    if alpha is None:
        _check_convexity(x[ok], fx[ok])
    with np.errstate(invalid="ignore"):
        ratios = fx[ok] / denom[ok]
    ratios = ratios[np.isfinite(ratios)]
    M = float(np.max(ratios))
    m = float(np.min(ratios))

    if alpha is not None:
        # f_a grows like u^2 at x = 1 and like x^a at infinity (a > 1),
        # linearly at infinity for a < 1. Boundedness of the ratio forces
        # p <= 2 and q >= a; positivity forces p >= 2 and q <= max(a, 1).
        tol = 1e-12
        if p > 2.0 + tol or (alpha > 1.0 and q < alpha - tol):
            raise RatioUnbounded(
                f"f_{alpha:g}(x) outgrows |x-1|^{p:g} + |x-1|^{q:g}")
        member = abs(p - 2.0) <= tol and alpha > 1.0 and abs(q - alpha) <= tol
        limit_ratios = None
        if member:
            at_zero = 1.0 if p == q else 0.5
            limit_ratios = (alpha / 2.0, 1.0 / (alpha - 1.0), at_zero)
            m = min(m, *limit_ratios)
            M = max(M, *limit_ratios)
        else:
            m = 0.0
        return FpqMembership(p, q, m, M, member=member, limit_ratios=limit_ratios)

    if not np.isfinite(M) or M > UNBOUNDED_CEILING:
        raise RatioUnbounded(
            f"f(x)/(|x-1|^{p:g} + |x-1|^{q:g}) exceeds {UNBOUNDED_CEILING:g}")
    return FpqMembership(p, q, m, M, member=bool(m > MEMBER_FLOOR))
