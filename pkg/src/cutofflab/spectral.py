"""Eigenstructure of finite chains: gaps, singular values, perturbation checks.

Everything here works in the pi-weighted inner product: a kernel P is
conjugated to D^{1/2} P D^{-1/2} with D = diag(pi) before any symmetric
eigensolve, so "self-adjoint" always means self-adjoint on L2(pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chains import FiniteChain, build_chain
from .errors import (
    BNotLessThanOne,
    DegenerateSpectrum,
    EigenSolveFailure,
    NotSelfAdjoint,
    ParameterOutOfRange,
)

DEDUP_TOL = 1e-9


def _as_chain(obj) -> FiniteChain:
    if isinstance(obj, FiniteChain):
        return obj
    return build_chain(obj)


def _conjugate(P: np.ndarray, pi: np.ndarray) -> np.ndarray:
    root = np.sqrt(pi)
    return (P * root[:, None]) / root[None, :]


def _eigh(S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        return np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - numpy rarely fails here
        raise EigenSolveFailure(str(exc)) from exc


@dataclass(frozen=True)
class SpectralSummary:
    """Gap and eigenvalue surrogates of one chain.

    lam is the spectral gap 1 - (second-largest eigenvalue of the additive
    reversibilization (P + P*)/2). kappa is the second-largest singular value
    of the conjugated kernel, lambda_prime = min(1, -ln kappa). beta1 and
    gamma1 are the eigenvalues of second-largest magnitude and second-largest
    real part once one Perron root is removed. eta is the largest
    reversibilized eigenvalue strictly below 1 - lam (-inf when none).
    """

    eigenvalues: np.ndarray
    lam: float
    kappa: float
    lambda_prime: float
    beta1: complex
    gamma1: complex
    eta: float


def spectral_summary(chain) -> SpectralSummary:
    chain = _as_chain(chain)
    if chain.n < 2:
        raise DegenerateSpectrum("single-state chain has no second eigenvalue")
    pi = chain.stationary
    S = _conjugate(chain.kernel, pi)
    sym = 0.5 * (S + S.T)
    add_eigs = _eigh(sym)[0]
    lam = float(1.0 - add_eigs[-2])

    try:
        sigma = np.linalg.svd(S, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise EigenSolveFailure(str(exc)) from exc
    kappa = float(np.clip(sigma[1], 0.0, 1.0))
    lambda_prime = 1.0 if kappa == 0.0 else min(1.0, -math.log(kappa))

    try:
        eigs = np.linalg.eigvals(chain.kernel)
    except np.linalg.LinAlgError as exc:
        raise EigenSolveFailure(str(exc)) from exc
    order = np.lexsort((eigs.imag, eigs.real))[::-1]
    eigs = eigs[order]
    perron = int(np.argmin(np.abs(eigs - 1.0)))
    rest = np.delete(eigs, perron)
    beta1 = complex(rest[np.argmax(np.abs(rest))])
    gamma1 = complex(rest[np.argmax(rest.real)])

    below = add_eigs[add_eigs < add_eigs[-2] - DEDUP_TOL]
    eta = float(below[-1]) if below.size else -math.inf
    return SpectralSummary(eigenvalues=eigs, lam=lam, kappa=kappa,
                           lambda_prime=lambda_prime, beta1=beta1,
                           gamma1=gamma1, eta=eta)


def eigenvalue_lower_bounds(chain, eps: float) -> dict:
    """Spectral lower bounds on the worst-case L1 mixing time at level eps.

    Returns both readings: the continuized bound ln(1/eps)/(1 - Re gamma1)
    and the discrete bound |beta1|/(1 - |beta1|) ln(1/eps). A degenerate
    denominator makes the bound +inf, which is reported rather than raised.
    """
    if not (0.0 < eps <= 1.0):
        raise ParameterOutOfRange(f"eps must lie in (0, 1], got {eps}")
    summ = spectral_summary(chain)
    level = math.log(1.0 / eps)
    if level == 0.0:
        return {"continuized": 0.0, "discrete": 0.0}
    denom = 1.0 - summ.gamma1.real
    cont = level / denom if denom > 0 else math.inf
    mag = abs(summ.beta1)
    disc = mag / (1.0 - mag) * level if mag < 1.0 else math.inf
    return {"continuized": cont, "discrete": disc}


# -- (Q, a, b)-boundedness ------------------------------------------------------

def _qab_matrix(Q: np.ndarray, A: np.ndarray, b: float, pi) -> np.ndarray:
    Q = np.asarray(Q, dtype=float)
    A = np.asarray(A, dtype=float)
    if Q.shape != A.shape or Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ParameterOutOfRange("Q and A must be square matrices of equal shape")
    if b < 0:
        raise ParameterOutOfRange(f"b must be nonnegative, got {b}")
    n = Q.shape[0]
    pi = np.full(n, 1.0 / n) if pi is None else np.asarray(pi, dtype=float)
    SQ = _conjugate(Q, pi)
    SA = _conjugate(A, pi)
    scale = max(1.0, float(np.abs(SQ).max()))
    if np.abs(SQ - SQ.T).max() > 1e-8 * scale:
        raise NotSelfAdjoint("Q is not self-adjoint in the pi-inner product")
    return SA.T @ SA - b * b * (SQ @ SQ)


def qab_minimal_a(Q, A, b: float, pi=None) -> float:
    """Smallest a for which ||Af||^2 <= a^2 ||f||^2 + b^2 ||Qf||^2 on L2(pi)."""
    top = float(_eigh(_qab_matrix(Q, A, b, pi))[0][-1])
    return math.sqrt(max(0.0, top))


def qab_check(Q, A, a: float, b: float, pi=None) -> bool:
    """Whether (a, b) witnesses the relative bound of A against Q on L2(pi)."""
    if a < 0:
        raise ParameterOutOfRange(f"a must be nonnegative, got {a}")
    top = float(_eigh(_qab_matrix(Q, A, b, pi))[0][-1])
    return top <= a * a + 1e-12 * max(1.0, a * a)


@dataclass(frozen=True)
class PerturbationCertificate:
    """Outcome of the antisymmetric-part perturbation checks for one kernel.

    a is the minimal relative bound of A = (W - W*)/2 against Q = (W + W*)/2
    at the requested b. condition_ok records sqrt(a^2 + b^2) <
    (1/2) min(1 - lam - eta, lam) (discrete kernels additionally need
    b^2 < 3/4, strictly). enclosure_ok records the hyperbola containment
    |Im z|^2 <= (a^2 + b^2 |Re z|^2)/(1 - b^2) for every eigenvalue z of W,
    and strip_count_ok that W keeps as many eigenvalues (by real part) near
    1 - lam as Q has there.
    """

    a: float
    b: float
    condition_ok: bool
    enclosure_ok: bool
    strip_count_ok: bool


def _distinct_with_multiplicity(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    values = np.sort(values)
    reps = [values[0]]
    counts = [1]
    for v in values[1:]:
        if v - reps[-1] <= DEDUP_TOL:
            counts[-1] += 1
        else:
            reps.append(v)
            counts.append(1)
    return np.array(reps), np.array(counts)


def perturbation_certificate(W, b: float) -> PerturbationCertificate:
    chain = _as_chain(W)
    if b < 0:
        raise ParameterOutOfRange(f"b must be nonnegative, got {b}")
    if b >= 1.0:
        raise BNotLessThanOne(f"enclosure statements need b < 1, got {b}")
    pi = chain.stationary
    P = chain.kernel
    Pstar = chain.adjoint().kernel
    Q = 0.5 * (P + Pstar)
    A = 0.5 * (P - Pstar)
    a = qab_minimal_a(Q, A, b, pi)

    summ = spectral_summary(chain)
    half_min = 0.5 * min(1.0 - summ.lam - summ.eta, summ.lam)
    condition_ok = math.sqrt(a * a + b * b) < half_min
    if chain.time_kind == "discrete":
        condition_ok = condition_ok and (b * b < 0.75)

    z = summ.eigenvalues
    bound = (a * a + b * b * z.real ** 2) / (1.0 - b * b)
    enclosure_ok = bool(np.all(z.imag ** 2 <= bound + 1e-9))

    q_eigs = _eigh(_conjugate(Q, pi))[0]
    reps, counts = _distinct_with_multiplicity(q_eigs)
    target = 1.0 - summ.lam
    k = int(np.argmin(np.abs(reps - target)))
    lo = -math.inf if k == 0 else 0.5 * (reps[k - 1] + reps[k])
    hi = math.inf if k == len(reps) - 1 else 0.5 * (reps[k] + reps[k + 1])
    in_strip = int(np.sum((z.real > lo) & (z.real <= hi)))
    strip_count_ok = in_strip == int(counts[k])
    return PerturbationCertificate(a=a, b=b, condition_ok=condition_ok,
                                   enclosure_ok=enclosure_ok,
                                   strip_count_ok=strip_count_ok)


def operator_norm_deviation(chain, t: float) -> float:
    """||P_t - Pi|| on L2(pi), the worst L2 deviation over unit functions."""
    chain = _as_chain(chain)
    pi = chain.stationary
    Pt = chain.semigroup_at(t)
    M = _conjugate(Pt - np.outer(np.ones(chain.n), pi), pi)
    return float(np.linalg.svd(M, compute_uv=False)[0])
