"""Cutoff diagnosis across chain families indexed by n.

Tabulates mixing times and spectral quantities over an index list, forms
the threshold ratios r_n(eta, eps) = t_n(eta) / t_n(eps), and issues a
trend-based verdict: cutoff, no-cutoff, precutoff-only, or inconclusive.
The finite-n decision rules are surrogates for limit statements; their
thresholds are configuration and are echoed verbatim in every report.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import divergences as dv
from .chains import FiniteChain
from .errors import InsufficientIndices, ParameterOutOfRange
from .mixing import curve_from_chain, mixing_time
from .spectral import spectral_summary

RATIO_SLACK = 1e-9
MIN_INDICES = 4


@dataclass(frozen=True)
class Thresholds:
    """Decision-rule knobs; defaults are the shipped calibration."""

    delta_c: float = 0.15
    precutoff_cap: float = 4.0
    growth_factor: float = 2.0
    flat_slack: float = 0.2

    def to_dict(self) -> dict:
        return {"delta_c": self.delta_c, "precutoff_cap": self.precutoff_cap,
                "growth_factor": self.growth_factor,
                "flat_slack": self.flat_slack}


class DenseMember:
    """Adapter presenting a plain FiniteChain through the member protocol."""

    def __init__(self, chain: FiniteChain, n: int | None = None):
        self._chain = chain
        self.n = chain.n if n is None else n
        summ = spectral_summary(chain)
        self.lam = summ.lam
        self.kappa = summ.kappa
        self.lambda_prime = summ.lambda_prime
        self.time_kind = chain.time_kind
        self.horizon = None

    def curve(self, spec):
        return curve_from_chain(self._chain, spec)

    def default_eps_grid(self):
        return (0.4, 0.25)


@dataclass(frozen=True)
class ChainFamily:
    """A named index list plus a builder n -> member or FiniteChain."""

    name: str
    ns: tuple
    builder: object
    default_eps: tuple = (0.4, 0.25)

    def member(self, n: int):
        built = self.builder(n)
        if isinstance(built, FiniteChain):
            return DenseMember(built, n)
        return built


def chain_family(zoo_family, ns) -> ChainFamily:
    """Bind a zoo family to a concrete index list."""
    ns = tuple(int(n) for n in ns)
    if list(ns) != sorted(set(ns)):
        raise ParameterOutOfRange("index list must be strictly increasing")
    return ChainFamily(zoo_family.kind, ns, zoo_family.member,
                       tuple(zoo_family.default_eps))


@dataclass
class FamilyRow:
    n: int
    lam: float = math.nan
    kappa: float = math.nan
    lambda_prime: float = math.nan
    mix: dict = field(default_factory=dict)
    time_kind: str = ""
    missing: bool = False
    error: str = ""


@dataclass
class FamilyTable:
    family: str
    spec_token: str
    time_kind: str
    eps_grid: tuple
    rows: list

    @property
    def valid_rows(self):
        return [r for r in self.rows if not r.missing]


def _profile_one(member_of, n, spec, eps_grid) -> FamilyRow:
    row = FamilyRow(n=n)
    try:
        member = member_of(n)
        row.lam = member.lam
        row.kappa = member.kappa
        row.lambda_prime = member.lambda_prime
        row.time_kind = member.time_kind
        curve = member.curve(spec)
        for eps in eps_grid:
            row.mix[eps] = mixing_time(curve, eps)
    except Exception as exc:  # noqa: BLE001 - per-n failures are data
        row.missing = True
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def family_profile(family: ChainFamily, eps_grid=None, spec=None, *,
                   threads: int = 1) -> FamilyTable:
    """Mixing times and spectral quantities for every (n, eps).

    Per-n failures are recorded on the row instead of aborting the run, so
    a single degenerate family member cannot destroy a long profile.
    """
    spec = dv.TV() if spec is None else spec
    eps_grid = family.default_eps if eps_grid is None else tuple(eps_grid)
    if len(eps_grid) == 0:
        raise ParameterOutOfRange("eps_grid must be non-empty")
    if any(not (e > 0) for e in eps_grid):
        raise ParameterOutOfRange(f"eps_grid must be positive, got {eps_grid}")
    eps_grid = tuple(sorted(set(float(e) for e in eps_grid), reverse=True))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(
                lambda n: _profile_one(family.member, n, spec, eps_grid),
                family.ns))
    else:
        rows = [_profile_one(family.member, n, spec, eps_grid)
                for n in family.ns]

    time_kind = next((r.time_kind for r in rows if not r.missing), "discrete")
    token = spec.token if hasattr(spec, "token") else "custom"
    return FamilyTable(family.name, token, time_kind, eps_grid, rows)


@dataclass
class PairTrend:
    eta: float
    eps: float
    ratios: list
    slacks: list


@dataclass
class CutoffReport:
    family: str
    spec_token: str
    time_kind: str
    eps_grid: tuple
    thresholds: Thresholds
    rows: list
    pairs: list
    verdict: str
    window: float
    window_prediction: float
    product_trend: dict
    product_condition: dict
    type_row: dict | None = None

    def to_dict(self) -> dict:
        """JSON-ready form; key order is fixed so reports are byte-stable."""
        return {
            "family": self.family,
            "spec": self.spec_token,
            "time_kind": self.time_kind,
            "eps_grid": list(self.eps_grid),
            "thresholds": self.thresholds.to_dict(),
            "table": [
                {"n": r.n, "missing": r.missing, "error": r.error,
                 "lambda": r.lam, "kappa": r.kappa,
                 "lambda_prime": r.lambda_prime,
                 "mix": {f"{eps:g}": res.t for eps, res in r.mix.items()}}
                for r in self.rows
            ],
            "ratios": [
                {"eta": p.eta, "eps": p.eps, "values": p.ratios}
                for p in self.pairs
            ],
            "verdict": self.verdict,
            "window": self.window,
            "window_prediction": self.window_prediction,
            "product_trend": {k: v for k, v in self.product_trend.items()},
            "product_condition": dict(self.product_condition),
            "type_row": self.type_row,
        }


def _pair_trends(table: FamilyTable) -> list:
    rows = table.valid_rows
    discrete = table.time_kind == "discrete"
    grid = table.eps_grid
    pairs = []
    for i in range(len(grid)):
        for j in range(i + 1, len(grid)):
            eps, eta = grid[i], grid[j]  # eta < eps, so t(eta) >= t(eps)
            ratios, slacks = [], []
            for row in rows:
                t_eta, t_eps = row.mix[eta].t, row.mix[eps].t
                if t_eps <= 0 or t_eta <= 0:
                    ratios.append(math.inf)
                    slacks.append(math.inf)
                    continue
                r = t_eta / t_eps
                ratios.append(r)
                # integer rounding of discrete mixing times jitters each
                # ratio by about r * (1/t_eta + 1/t_eps)
                slacks.append(r * (1.0 / t_eta + 1.0 / t_eps)
                              if discrete else RATIO_SLACK)
            pairs.append(PairTrend(eta, eps, ratios, slacks))
    return pairs


def _verdict(pairs, thr: Thresholds) -> str:
    if not pairs or any(not all(map(math.isfinite, p.ratios)) for p in pairs):
        return "inconclusive"

    def cutoff_pair(p: PairTrend) -> bool:
        d = [abs(r - 1.0) for r in p.ratios[-3:]]
        s = p.slacks[-3:]
        weak_dec = d[1] <= d[0] + s[1] and d[2] <= d[1] + s[2]
        return weak_dec and d[-1] <= thr.delta_c

    def flat_high_pair(p: PairTrend) -> bool:
        last = p.ratios[-3:]
        if any(r < 1.0 + thr.delta_c for r in last):
            return False
        net_drop = last[0] - last[-1]
        return net_drop <= thr.flat_slack * (last[-1] - 1.0)

    if all(cutoff_pair(p) for p in pairs):
        return "cutoff"
    if any(flat_high_pair(p) for p in pairs):
        return "no-cutoff"
    if all(r <= thr.precutoff_cap for p in pairs for r in p.ratios):
        return "precutoff-only"
    return "inconclusive"


def cutoff_diagnosis(table: FamilyTable,
                     thresholds: Thresholds | None = None) -> CutoffReport:
    """Issue a trend verdict from a profile table.

    Cutoff requires every (eta, eps) pair to have |r - 1| weakly decreasing
    over the last three indices and small at the end; no-cutoff requires
    some pair to sit flat above 1 + delta_c; ratios bounded by the cap with
    neither pattern reads as precutoff-only.
    """
    thr = Thresholds() if thresholds is None else thresholds
    rows = table.valid_rows
    if len(rows) < MIN_INDICES:
        raise InsufficientIndices(
            f"need at least {MIN_INDICES} usable indices, got {len(rows)}")
    pairs = _pair_trends(table)
    verdict = _verdict(pairs, thr)

    # product condition: does rate * mixing time keep growing?
    discrete = table.time_kind == "discrete"
    product_trend, product_condition = {}, {}
    for eps in table.eps_grid:
        vals = [(r.lambda_prime if discrete else r.lam) * r.mix[eps].t
                for r in rows]
        increasing = all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
        grows = vals[-1] >= thr.growth_factor * vals[0] if vals[0] > 0 else False
        key = f"{eps:g}"
        product_trend[key] = vals
        product_condition[key] = bool(increasing and grows)

    last = rows[-1]
    rate = last.lambda_prime if discrete else last.lam
    gaps = [(last.mix[p.eta].t - last.mix[p.eps].t) * rate for p in pairs]
    window = float(np.median(gaps)) if gaps else math.nan

    return CutoffReport(table.family, table.spec_token, table.time_kind,
                        table.eps_grid, thr, table.rows, pairs, verdict,
                        window, 1.0, product_trend, product_condition)


# -- type classification -------------------------------------------------------

TYPE_BUCKETS = (
    ("L2-type", (dv.Lp(2.0), dv.Renyi(2.0), dv.Alpha(1.5))),
    ("TV-type", (dv.TV(), dv.Hellinger2())),
    ("KL", (dv.KL(),)),
    ("separation", (dv.Separation(),)),
)


@dataclass
class TypeClassification:
    family: str
    buckets: dict
    disagreements: list

    def to_dict(self) -> dict:
        return {"family": self.family,
                "buckets": {k: dict(v) for k, v in self.buckets.items()},
                "disagreements": list(self.disagreements)}


def classify_types(family: ChainFamily, eps_grid=None,
                   thresholds: Thresholds | None = None,
                   threads: int = 1) -> TypeClassification:
    """One verdict per divergence-type bucket, plus within-bucket audits.

    Representatives follow the type table: L2-type {d_2, Renyi-2,
    alpha=1.5}, TV-type {TV, Hellinger^2}, KL, and separation. Members of
    a bucket should agree; a split across buckets is the interesting
    finding, a split within one is flagged for scrutiny.
    """
    buckets: dict = {}
    disagreements = []
    for bucket, specs in TYPE_BUCKETS:
        verdicts = {}
        for spec in specs:
            table = family_profile(family, eps_grid, spec, threads=threads)
            report = cutoff_diagnosis(table, thresholds)
            verdicts[spec.token] = report.verdict
        buckets[bucket] = verdicts
        if len(set(verdicts.values())) > 1:
            disagreements.append(bucket)
    return TypeClassification(family.name, buckets, disagreements)
