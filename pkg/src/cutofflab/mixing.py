"""Worst-case divergence curves over time and their eps-crossing times."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import divergences as dv
from .chains import FiniteChain
from .errors import (
    HorizonExceeded,
    NonIntegerDiscreteTime,
    ParameterOutOfRange,
)

REL_TOL = 1e-6
ABS_FLOOR = 1e-9
HORIZON_GAPS = 64.0
MONOTONE_SLACK = 1e-12


class DivergenceCurve:
    """A memoized map t -> worst-case divergence from stationarity.

    Backed either by a chain and a divergence spec or by a closed-form
    callable. Closed forms must bring their own horizon; matrix-backed
    curves default to 64 relaxation times. Evaluations are cached, so
    repeated eps-queries against the same curve stay cheap.
    """

    def __init__(self, fn, *, time_kind: str, spec=None, horizon: float | None = None):
        if time_kind not in ("discrete", "continuized"):
            raise ParameterOutOfRange(f"unknown time kind {time_kind!r}")
        self._fn = fn
        self.time_kind = time_kind
        self.spec = spec
        self._horizon = horizon
        self.samples: dict[float, float] = {}

    @property
    def horizon(self) -> float:
        if self._horizon is None:
            raise ParameterOutOfRange("closed-form curve needs an explicit horizon")
        return self._horizon

    def __call__(self, t) -> float:
        if self.time_kind == "discrete":
            k = round(float(t))
            if abs(float(t) - k) > 1e-9:
                raise NonIntegerDiscreteTime(f"discrete curve sampled at t={t}")
            t = k
        t = float(t)
        if t < 0:
            raise ParameterOutOfRange(f"time must be nonnegative, got {t}")
        if t not in self.samples:
            self.samples[t] = float(self._fn(t))
        return self.samples[t]

    def sampled_monotone(self) -> bool:
        """Whether the values seen so far are non-increasing in t."""
        ts = sorted(self.samples)
        vals = [self.samples[t] for t in ts]
        return all(b <= a + MONOTONE_SLACK for a, b in zip(vals, vals[1:]))


def curve_from_chain(chain: FiniteChain, spec, horizon: float | None = None) -> DivergenceCurve:
    if horizon is None:
        from .spectral import spectral_summary
        lam = spectral_summary(chain).lam
        horizon = HORIZON_GAPS / max(lam, 1e-12)
    return DivergenceCurve(lambda t: dv.worst_case(chain, t, spec),
                           time_kind=chain.time_kind, spec=spec, horizon=horizon)


def curve_from_function(fn, *, time_kind: str, horizon: float, spec=None) -> DivergenceCurve:
    return DivergenceCurve(fn, time_kind=time_kind, spec=spec, horizon=horizon)


def sample_curve(source, spec, t_grid) -> DivergenceCurve:
    """Evaluate a worst-case curve on a grid and attach the samples.

    source is a chain (spec selects the divergence) or a plain callable
    (spec is carried along unused). The grid must be sorted ascending.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size and np.any(np.diff(t_grid) < 0):
        raise ParameterOutOfRange("t_grid must be sorted ascending")
    if isinstance(source, FiniteChain):
        curve = curve_from_chain(source, spec)
    else:
        horizon = float(t_grid[-1]) if t_grid.size else 0.0
        curve = curve_from_function(source, time_kind="continuized",
                                    horizon=horizon, spec=spec)
    for t in t_grid:
        curve(t)
    return curve


@dataclass(frozen=True)
class MixingTimeResult:
    """Crossing time of a curve at level epsilon, with its bracket.

    The bracket satisfies g(t_lo) > epsilon >= g(t_hi) and t = t_hi, so the
    reported time is certified on the <=-side. Discrete brackets are exactly
    one step wide; continuized ones obey the bisection tolerance.
    """

    epsilon: float
    t: float
    t_lo: float
    t_hi: float
    method: str


def _as_curve(source, spec=None) -> DivergenceCurve:
    if isinstance(source, DivergenceCurve):
        return source
    if isinstance(source, FiniteChain):
        if spec is None:
            raise ParameterOutOfRange("a chain source needs a divergence spec")
        return curve_from_chain(source, spec)
    raise ParameterOutOfRange("source must be a DivergenceCurve or FiniteChain")


def _leftmost_crossing(curve: DivergenceCurve, eps: float, t_hi: float,
                       tol: float) -> tuple[float, float]:
    """Scan a fixed grid for the first downcrossing, then bisect inside it.

    Used when the sampled curve is not monotone (non-normal transients can
    produce humps); the leftmost sampled crossing is our recorded convention.
    """
    grid = np.linspace(0.0, t_hi, 257)
    vals = [curve(t) for t in grid]
    idx = next(i for i, v in enumerate(vals) if v <= eps)
    if idx == 0:
        return 0.0, 0.0
    lo, hi = grid[idx - 1], grid[idx]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if curve(mid) <= eps:
            hi = mid
        else:
            lo = mid
    return lo, hi


def mixing_time(source, eps: float, spec=None, *, rel_tol: float = REL_TOL,
                abs_floor: float = ABS_FLOOR, horizon: float | None = None) -> MixingTimeResult:
    """inf{t : g(t) <= eps}, bracketed and certified at t_hi."""
    if not (eps > 0):
        raise ParameterOutOfRange(f"eps must be positive, got {eps}")
    curve = _as_curve(source, spec)
    discrete = curve.time_kind == "discrete"
    method = "integer-scan" if discrete else "bisection"
    if curve(0) <= eps:
        return MixingTimeResult(eps, 0.0, 0.0, 0.0, method)
    H = horizon if horizon is not None else curve.horizon

    t_lo, t_hi = 0.0, 1.0
    while curve(min(t_hi, math.floor(H) if discrete else H)) > eps:
        t_lo = t_hi
        if t_hi >= H:
            raise HorizonExceeded(
                f"curve stayed above eps={eps} up to the horizon {H:g}",
                last_value=curve(math.floor(H) if discrete else H))
        t_hi = min(2.0 * t_hi, H)
    t_hi = min(t_hi, math.floor(H) if discrete else H)

    if discrete:
        lo, hi = int(t_lo), int(t_hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if curve(mid) <= eps:
                hi = mid
            else:
                lo = mid
        return MixingTimeResult(eps, float(hi), float(lo), float(hi), method)

    lo, hi = t_lo, t_hi
    while hi - lo > max(rel_tol * hi, abs_floor):
        mid = 0.5 * (lo + hi)
        if curve(mid) <= eps:
            hi = mid
        else:
            lo = mid
    if not curve.sampled_monotone():
        lo, hi = _leftmost_crossing(curve, eps, t_hi,
                                    max(rel_tol * t_hi, abs_floor))
        method = "bisection"
    return MixingTimeResult(eps, hi, lo, hi, method)


def _bracket_width(res: MixingTimeResult) -> float:
    return res.t_hi - res.t_lo


@dataclass(frozen=True)
class AlphaRenyiIdentity:
    """Both sides of the alpha-vs-Renyi mixing-time change of level."""

    t_alpha: MixingTimeResult
    t_renyi: MixingTimeResult
    consistent: bool


def alpha_renyi_mixing_identity(chain, alpha: float, eps: float) -> AlphaRenyiIdentity:
    """t_{f_alpha}(eps) equals t_{R_alpha}(ln(1 + (alpha-1) eps)/(alpha-1))."""
    if not (1.0 < alpha < math.inf):
        raise ParameterOutOfRange(f"alpha must lie in (1, inf), got {alpha}")
    t_a = mixing_time(chain, eps, dv.Alpha(alpha))
    level = math.log1p((alpha - 1.0) * eps) / (alpha - 1.0)
    t_r = mixing_time(chain, level, dv.Renyi(alpha))
    slack = _bracket_width(t_a) + _bracket_width(t_r) + 1e-9
    return AlphaRenyiIdentity(t_a, t_r, abs(t_a.t - t_r.t) <= slack)


def renyi_halving_comparison(chain, alpha: float, eps: float) -> bool:
    """Order-halving bounds: going from sqrt(alpha) to alpha costs at most 2x.

    Checks t_{R_alpha}(eps) <= 2 t_{R_sqrt(alpha)}(eps) and the L^p analogue
    t_s(2 delta^(1 + 1/sqrt(s))) <= 2 t_sqrt(s)(delta) with s = alpha and
    delta = eps.
    """
    if not (alpha > 1.0):
        raise ParameterOutOfRange(f"alpha must exceed 1, got {alpha}")
    root = math.sqrt(alpha)
    r_full = mixing_time(chain, eps, dv.Renyi(alpha))
    r_half = mixing_time(chain, eps, dv.Renyi(root))
    ok_renyi = r_full.t <= 2.0 * r_half.t + _bracket_width(r_full) \
        + 2.0 * _bracket_width(r_half) + 1e-9
    s = alpha
    lp_level = 2.0 * eps ** (1.0 + 1.0 / math.sqrt(s))
    p_full = mixing_time(chain, lp_level, dv.Lp(s))
    p_half = mixing_time(chain, eps, dv.Lp(math.sqrt(s)))
    ok_lp = p_full.t <= 2.0 * p_half.t + _bracket_width(p_full) \
        + 2.0 * _bracket_width(p_half) + 1e-9
    return bool(ok_renyi and ok_lp)
