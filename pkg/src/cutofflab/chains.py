"""Finite-state Markov chains: kernels, stationary laws, adjoints, semigroups.

The kernel convention is row-stochastic: P[x, y] is the probability of moving
from state x to state y, and distributions are row vectors acting on the left.
A chain carries a time kind, either "discrete" (powers of P) or "continuized"
(the semigroup e^{t(P-I)}). All matrices are dense; closed-form fast paths for
large structured chains live in the model zoo, not here.
"""

from __future__ import annotations

import json

import numpy as np
import scipy.linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
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

ROW_SUM_TOL = 1e-9
STATIONARY_RESIDUAL_TOL = 1e-10
DENSE_STATE_CAP = 4096

TIME_KINDS = ("discrete", "continuized")


def _as_kernel(matrix) -> np.ndarray:
    P = np.array(matrix, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise DimensionMismatch(f"kernel must be square, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise NotStochastic("kernel has non-finite entries")
    if np.any(P < -ROW_SUM_TOL):
        raise NotStochastic("kernel has a negative entry")
    rows = P.sum(axis=1)
    bad = np.abs(rows - 1.0) > ROW_SUM_TOL
    if np.any(bad):
        x = int(np.argmax(np.abs(rows - 1.0)))
        raise NotStochastic(f"row {x} sums to {rows[x]!r}, expected 1")
    P = np.clip(P, 0.0, None)
    return P / P.sum(axis=1, keepdims=True)


def _recurrent_class_count(P: np.ndarray) -> tuple[int, np.ndarray]:
    """Number of closed communicating classes and the component labels."""
    support = csr_matrix(P > 0.0)
    ncomp, labels = connected_components(support, directed=True, connection="strong")
    if ncomp == 1:
        return 1, labels
    closed = 0
    for comp in range(ncomp):
        members = labels == comp
        leaves = P[members][:, ~members].sum()
        if leaves <= 0.0:
            closed += 1
    return closed, labels


def _solve_stationary(P: np.ndarray) -> np.ndarray:
    n = P.shape[0]
    if n == 1:
        return np.ones(1)
    closed, _ = _recurrent_class_count(P)
    if closed > 1:
        raise Reducible(f"kernel has {closed} recurrent classes")
    M = P.T - np.eye(n)
    M[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    pi = scipy.linalg.solve(M, rhs)
    if np.any(pi <= 0.0):
        raise NonPositiveStationary(
            "stationary vector has non-positive mass (transient states present)"
        )
    pi = pi / pi.sum()
    residual = np.abs(pi @ P - pi).sum()
    if residual > STATIONARY_RESIDUAL_TOL:
        raise NonPositiveStationary(f"stationary residual {residual:.3e} too large")
    return pi


class FiniteChain:
    """Immutable finite Markov chain.

    Parameters
    ----------
    kernel : array_like
        Row-stochastic transition matrix.
    time_kind : str
        "discrete" or "continuized".
    states : sequence, optional
        State labels; defaults to range(n).
    """

    def __init__(self, kernel, time_kind: str = "discrete", states=None,
                 _stationary: np.ndarray | None = None):
        if time_kind not in TIME_KINDS:
            raise ParameterOutOfRange(f"time_kind must be one of {TIME_KINDS}")
        self._P = _as_kernel(kernel)
        self._P.flags.writeable = False
        self.time_kind = time_kind
        n = self._P.shape[0]
        self.states = list(range(n)) if states is None else list(states)
        if len(self.states) != n:
            raise DimensionMismatch("states list length does not match kernel")
        if _stationary is None:
            self._pi = _solve_stationary(self._P)
        else:
            self._pi = np.asarray(_stationary, dtype=float)
        self._pi.flags.writeable = False
        self._semigroup_cache: dict[float, np.ndarray] = {}
        self._sym_eig = None

    @property
    def n(self) -> int:
        return self._P.shape[0]

    @property
    def kernel(self) -> np.ndarray:
        return self._P

    @property
    def stationary(self) -> np.ndarray:
        return self._pi

    def __repr__(self) -> str:
        return f"FiniteChain(n={self.n}, time_kind={self.time_kind!r})"

    # -- structure ----------------------------------------------------------

    def adjoint(self) -> "FiniteChain":
        """Time reversal P*(x,y) = pi(y) P(y,x) / pi(x); same stationary law."""
        pi = self._pi
        Pstar = (pi[None, :] * self._P.T) / pi[:, None]
        # rows sum to 1 exactly in exact arithmetic; renormalize the dust
        Pstar = Pstar / Pstar.sum(axis=1, keepdims=True)
        return FiniteChain(Pstar, self.time_kind, self.states, _stationary=pi)

    def is_reversible(self, tol: float = 1e-10) -> bool:
        flows = self._pi[:, None] * self._P
        return bool(np.max(np.abs(flows - flows.T)) <= tol)

    def is_normal(self, tol: float = 1e-10) -> bool:
        Pstar = self.adjoint().kernel
        return bool(np.max(np.abs(self._P @ Pstar - Pstar @ self._P)) <= tol)

    def lazify(self, theta: float) -> "FiniteChain":
        """Return the chain with kernel theta*I + (1-theta)*P, theta in [0,1)."""
        if not 0.0 <= theta < 1.0:
            raise ParameterOutOfRange(f"theta must lie in [0,1), got {theta}")
        lazy = theta * np.eye(self.n) + (1.0 - theta) * self._P
        return FiniteChain(lazy, self.time_kind, self.states, _stationary=self._pi)

    def generator(self) -> "GeneratorView":
        return GeneratorView(self)

    # -- evolution ----------------------------------------------------------

    def _symmetric_eig(self):
        """Eigendecomposition of D^{1/2} P D^{-1/2}; only valid if reversible."""
        if self._sym_eig is None:
            d = np.sqrt(self._pi)
            S = (d[:, None] * self._P) / d[None, :]
            S = 0.5 * (S + S.T)
            lam, U = scipy.linalg.eigh(S)
            self._sym_eig = (lam, U, d)
        return self._sym_eig

    def semigroup_at(self, t) -> np.ndarray:
        """P^t (discrete) or e^{t(P-I)} (continuized)."""
        if t < 0:
            raise NegativeTime(f"time must be nonnegative, got {t}")
        if self.time_kind == "discrete":
            if abs(t - round(t)) > 1e-9:
                raise NonIntegerDiscreteTime(f"discrete chain queried at t={t}")
            t = int(round(t))
        key = float(t)
        cached = self._semigroup_cache.get(key)
        if cached is not None:
            return cached
        if self.time_kind == "discrete":
            Pt = np.linalg.matrix_power(self._P, int(t))
        elif self.is_reversible():
            lam, U, d = self._symmetric_eig()
            decay = np.exp(t * (lam - 1.0))
            St = (U * decay) @ U.T
            Pt = (St / d[:, None]) * d[None, :]
            np.clip(Pt, 0.0, None, out=Pt)
            Pt = Pt / Pt.sum(axis=1, keepdims=True)
        else:
            Pt = scipy.linalg.expm(t * (self._P - np.eye(self.n)))
            np.clip(Pt, 0.0, None, out=Pt)
            Pt = Pt / Pt.sum(axis=1, keepdims=True)
        Pt.flags.writeable = False
        if len(self._semigroup_cache) < 4096:
            self._semigroup_cache[key] = Pt
        return Pt

    def distribution_from(self, x: int, t) -> np.ndarray:
        """Law of the chain at time t started from state index x."""
        return self.semigroup_at(t)[x]


class GeneratorView:
    """Generator A = P - I and its pi-adjoint A* = P* - I.

    Row sums of both matrices vanish; for a discrete chain the pair (P, I)
    is retained so callers can tell one-step dynamics from the generator.
    """

    def __init__(self, chain: FiniteChain):
        eye = np.eye(chain.n)
        self.matrix = chain.kernel - eye
        self.adjoint_matrix = chain.adjoint().kernel - eye
        self.time_kind = chain.time_kind
        self.discrete_pair = (chain.kernel, eye) if chain.time_kind == "discrete" else None


def build_chain(matrix, time_kind: str = "discrete", states=None) -> FiniteChain:
    """Validate a transition matrix and solve its stationary distribution."""
    return FiniteChain(matrix, time_kind=time_kind, states=states)


def adjoint(chain: FiniteChain) -> FiniteChain:
    return chain.adjoint()


def is_reversible(chain: FiniteChain, tol: float = 1e-10) -> bool:
    return chain.is_reversible(tol)


def is_normal(chain: FiniteChain, tol: float = 1e-10) -> bool:
    return chain.is_normal(tol)


def lazify(chain: FiniteChain, theta: float) -> FiniteChain:
    return chain.lazify(theta)


def semigroup_at(chain: FiniteChain, t) -> np.ndarray:
    return chain.semigroup_at(t)


def dirichlet_form(chain: FiniteChain, f, g) -> float:
    """Energy <f, -A g>_pi with A = P - I.

    For reversible chains this equals the symmetric double sum
    (1/2) sum_{x,y} (f(x)-f(y)) (g(x)-g(y)) P(x,y) pi(x).
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != (chain.n,) or g.shape != (chain.n,):
        raise DimensionMismatch(
            f"expected vectors of length {chain.n}, got {f.shape} and {g.shape}"
        )
    Ag = chain.kernel @ g - g
    return float(np.sum(chain.stationary * f * (-Ag)))


class ProductChain:
    """Weighted product: one component moves at a time, chosen by weight.

    The kernel is sum_i w_i I x ... x P_i x ... x I on the product space; the
    continuized semigroup factorizes into a Kronecker product of component
    semigroups run at their weighted rates.
    """

    def __init__(self, components, weights):
        if len(components) < 2:
            raise ParameterOutOfRange("product needs at least 2 components")
        w = np.asarray(weights, dtype=float)
        if w.shape != (len(components),):
            raise DimensionMismatch("one weight per component required")
        if np.any(w < 0) or abs(w.sum() - 1.0) > ROW_SUM_TOL:
            raise NotStochastic("weights must be a probability vector")
        self.components = list(components)
        self.weights = w

    @property
    def n(self) -> int:
        out = 1
        for c in self.components:
            out *= c.n
        return out

    def kernel(self) -> np.ndarray:
        mats = [c.kernel for c in self.components]
        dims = [c.n for c in self.components]
        total = int(np.prod(dims))
        if total > DENSE_STATE_CAP:
            raise StateExplosion(f"product space has {total} states (cap {DENSE_STATE_CAP})")
        P = np.zeros((total, total))
        for i, w in enumerate(self.weights):
            term = np.ones((1, 1))
            for j, M in enumerate(mats):
                term = np.kron(term, M if j == i else np.eye(dims[j]))
            P += w * term
        return P

    def stationary(self) -> np.ndarray:
        pi = np.ones(1)
        for c in self.components:
            pi = np.kron(pi, c.stationary)
        return pi

    def semigroup_at(self, t) -> np.ndarray:
        """Kronecker factorization of the continuized semigroup."""
        if t < 0:
            raise NegativeTime(f"time must be nonnegative, got {t}")
        out = np.ones((1, 1))
        for w, c in zip(self.weights, self.components):
            cont = c if c.time_kind == "continuized" else FiniteChain(
                c.kernel, "continuized", c.states, _stationary=c.stationary)
            out = np.kron(out, cont.semigroup_at(w * t))
        return out

    def materialize(self, time_kind: str = "continuized") -> FiniteChain:
        return FiniteChain(self.kernel(), time_kind, _stationary=self.stationary())


def product_chain(components, weights) -> ProductChain:
    return ProductChain(components, weights)


# -- import/export ----------------------------------------------------------

def save_chain_text(chain: FiniteChain, path: str) -> None:
    """First line n, then n rows of n decimals."""
    with open(path, "w") as fh:
        fh.write(f"{chain.n}\n")
        for row in chain.kernel:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def load_chain_text(path: str, time_kind: str = "discrete") -> FiniteChain:
    with open(path) as fh:
        tokens = fh.read().split()
    if not tokens:
        raise BadChainFile(f"{path} is empty")
    try:
        n = int(tokens[0])
        vals = [float(v) for v in tokens[1:]]
    except ValueError as err:
        raise BadChainFile(f"{path}: {err}") from err
    if n <= 0:
        raise BadChainFile(f"{path}: state count must be positive, got {n}")
    if len(vals) != n * n:
        raise BadChainFile(f"{path}: expected {n * n} entries, "
                           f"found {len(vals)}")
    return build_chain(np.array(vals).reshape(n, n), time_kind)


def save_chain_json(chain: FiniteChain, path: str) -> None:
    payload = {
        "states": chain.states,
        "kernel": chain.kernel.tolist(),
        "time_kind": chain.time_kind,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_chain_json(path: str) -> FiniteChain:
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except ValueError as err:
            raise BadChainFile(f"{path}: {err}") from err
    if not isinstance(payload, dict) or "kernel" not in payload:
        raise BadChainFile(f"{path}: expected an object with a 'kernel' entry")
    try:
        return build_chain(payload["kernel"],
                           payload.get("time_kind", "discrete"),
                           states=payload.get("states"))
    except (TypeError, ValueError) as err:
        raise BadChainFile(f"{path}: {err}") from err


def load_chain(path: str, time_kind: str | None = None) -> FiniteChain:
    """Dispatch on extension: .json uses the structured form, else plain text."""
    if str(path).endswith(".json"):
        chain = load_chain_json(path)
        if time_kind is not None and time_kind != chain.time_kind:
            chain = FiniteChain(chain.kernel, time_kind, chain.states,
                                _stationary=chain.stationary)
        return chain
    return load_chain_text(path, time_kind or "discrete")
