"""Accelerated average consensus with lazy-Metropolis averaging and momentum.

Every node keeps two numbers, ``x`` and ``y``, with ``y(1) = x(1)``::

    y(t+1) = x(t) + 1/2 * sum_{j in N(i)} (x_j(t) - x_i(t)) / max(d(i), d(j))
    x(t+1) = y(t+1) + (1 - gamma) * (y(t+1) - y(t))

With ``gamma = 2/(9U+1)`` and any ``U >= n`` the squared distance of ``y(t)``
to the average decays like ``2 (1 - 1/(9U))^(t-1)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import InvalidParameterError, ShapeError
from .graphs import Graph, StochasticMatrix, lazy_metropolis, require_connected
from .linalg import symmetric_eig


@dataclass(frozen=True)
class MomentumParams:
    U: float
    gamma: float
    alpha: float
    eta: float

    @property
    def momentum(self) -> float:
        """The extrapolation factor ``1 - gamma``."""
        return 1.0 - self.gamma


def momentum_default(U: float) -> MomentumParams:
    if not U >= 1:
        raise InvalidParameterError(f"U must be >= 1, got {U}")
    gamma = 2.0 / (9.0 * U + 1.0)
    return MomentumParams(U, gamma, 2.0 - gamma, 1.0 - 1.0 / (9.0 * U))


def momentum_grid(U: float, c: float = 3.0) -> MomentumParams:
    """gamma = 2/(c sqrt(U ln U) + 1), eta = 1 - gamma.

    The constant ``c`` is not pinned down by the analysis; 3 is our default.
    """
    if not U >= 2:
        raise InvalidParameterError(f"U must be >= 2 for the grid schedule, got {U}")
    if not c > 0:
        raise InvalidParameterError(f"c must be positive, got {c}")
    gamma = 2.0 / (c * math.sqrt(U * math.log(U)) + 1.0)
    if gamma > 1.0:
        raise InvalidParameterError(f"c={c} gives gamma={gamma} > 1")
    return MomentumParams(U, gamma, 2.0 - gamma, 1.0 - gamma)


def momentum_leader(U: float) -> MomentumParams:
    """The 18U schedule used by non-leader nodes; equals momentum_default(2U)."""
    if not U >= 1:
        raise InvalidParameterError(f"U must be >= 1, got {U}")
    gamma = 2.0 / (18.0 * U + 1.0)
    return MomentumParams(U, gamma, 2.0 - gamma, 1.0 - 1.0 / (18.0 * U))


# --- one round ----------------------------------------------------------------

def neighbor_correction(g: Graph, x: np.ndarray, offsets: np.ndarray | None = None) -> np.ndarray:
    """``1/2 * sum_j (x_j - x_i [- r_ij]) / max(d(i), d(j))`` for every node.

    ``x`` has shape ``(n,)`` or ``(n, d)``; ``offsets`` (same trailing shape,
    one row per arc of ``g.arcs``) is subtracted from each difference.
    """
    src, dst, w = g.arcs
    diff = x[dst] - x[src]
    if offsets is not None:
        diff = diff - offsets
    if x.ndim == 1:
        return 0.5 * np.bincount(src, weights=w * diff, minlength=g.n)
    out = np.empty(x.shape)
    for k in range(x.shape[1]):
        out[:, k] = 0.5 * np.bincount(src, weights=w * diff[:, k], minlength=g.n)
    return out


def lazy_average(w: Union[Graph, StochasticMatrix], x: np.ndarray) -> np.ndarray:
    """Apply M' to ``x``: neighbor-sum form for a Graph, dense product otherwise."""
    if isinstance(w, Graph):
        if x.shape[0] != w.n:
            raise ShapeError(f"state has {x.shape[0]} rows, graph has {w.n} nodes")
        return x + neighbor_correction(w, x)
    if x.shape[0] != w.dim:
        raise ShapeError(f"state has {x.shape[0]} rows, matrix has dimension {w.dim}")
    return w.entries @ x


@dataclass(frozen=True)
class ConsensusState:
    x: np.ndarray
    y: np.ndarray
    t: int = 1

    @classmethod
    def initial(cls, x1) -> "ConsensusState":
        x = np.array(x1, dtype=float)
        return cls(x, x.copy(), 1)


def consensus_step(s: ConsensusState, w: Union[Graph, StochasticMatrix], p: MomentumParams) -> ConsensusState:
    """One synchronous round.

    ``w`` may be the graph itself (the distributed neighbor-sum update) or
    its lazy Metropolis matrix (the equivalent dense form ``y = M' x``).
    """
    if s.x.shape != s.y.shape:
        raise ShapeError("x and y must have the same shape")
    y_new = lazy_average(w, s.x)
    x_new = y_new + p.momentum * (y_new - s.y)
    return ConsensusState(x_new, y_new, s.t + 1)


# --- running to convergence ---------------------------------------------------

@dataclass
class ConvergenceReport:
    """Per-round diagnostics of a run; index k of each trace is round t = k+1.

    ``l2sq`` holds the squared 2-norm distance of y(t) from its target,
    ``linf`` the inf-norm distance of x(t) and ``bound`` the geometric bound
    ``2 eta^(t-1) l2sq[0]``.
    """

    rounds: int
    converged: bool
    l2sq: np.ndarray
    linf: np.ndarray
    bound: np.ndarray
    final: ConsensusState
    trajectory: Optional[list] = None  # x(t) snapshots when recorded

    def bound_holds(self, slack: float = 1e-9) -> bool:
        return bool(np.all(self.l2sq <= self.bound + slack))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", "l2sq_dev", "linf_dev", "theorem_bound"])
            for k in range(len(self.l2sq)):
                wr.writerow([k + 1, repr(float(self.l2sq[k])), repr(float(self.linf[k])),
                             repr(float(self.bound[k]))])


def run_iteration(state, step, target, eta, eps, norm, max_iter, record=False):
    """Shared driver: record deviations of ``state`` from ``target`` each round.

    Stops at the first round where the chosen norm of the x-deviation (``inf``)
    or the 2-norm of the y-deviation (``two``) is below ``eps``.
    """
    if not eps > 0:
        raise InvalidParameterError(f"eps must be positive, got {eps}")
    if norm not in ("inf", "two"):
        raise InvalidParameterError(f"norm must be 'inf' or 'two', got {norm!r}")
    if max_iter < 1:
        raise InvalidParameterError("max_iter must be >= 1")
    l2sq, linf = [], []
    traj = [] if record else None
    converged = False
    while True:
        if record:
            traj.append(state.x)
        dy = state.y - target
        dx = state.x - target
        e2 = float(np.sum(dy * dy))
        einf = float(np.max(np.abs(dx))) if dx.size else 0.0
        l2sq.append(e2)
        linf.append(einf)
        if (einf if norm == "inf" else math.sqrt(e2)) < eps:
            converged = True
            break
        if state.t >= max_iter:
            break
        state = step(state)
    l2sq = np.array(l2sq)
    bound = 2.0 * eta ** np.arange(len(l2sq)) * l2sq[0]
    return ConvergenceReport(len(l2sq), converged, l2sq, np.array(linf), bound, state, traj)


def run_consensus(g: Graph, x1, p: MomentumParams, eps: float = 1e-2, norm: str = "inf",
                  max_iter: int = 10**6) -> ConvergenceReport:
    """Iterate until ``||x(t) - xbar 1||_inf < eps`` (or the y 2-norm for ``norm='two'``).

    ``rounds`` is the first t that meets the rule; if ``max_iter`` is reached
    first, ``rounds == max_iter`` and ``converged`` is False.
    """
    require_connected(g)
    s = ConsensusState.initial(x1)
    if s.x.shape[0] != g.n:
        raise ShapeError(f"x1 has length {s.x.shape[0]}, graph has {g.n} nodes")
    xbar = s.x.mean(axis=0)
    return run_iteration(s, lambda st: consensus_step(st, g, p), xbar, p.eta, eps, norm, max_iter)


def theorem_round_bound(dev0_sq: float, p: MomentumParams, eps: float) -> int:
    """First round from which the geometric bound guarantees ``||x - xbar||_inf < eps``.

    Uses ``||x(t) - xbar|| <= alpha ||y(t) - xbar|| + (alpha-1) ||y(t-1) - xbar||``
    with each y-term replaced by the bound ``2 eta^(t-1) dev0_sq``.
    """
    if dev0_sq <= 0 or math.sqrt(dev0_sq) < eps:
        return 1
    s = math.sqrt(2.0 * dev0_sq)
    q = math.sqrt(p.eta)
    coef = s * (p.alpha + (p.alpha - 1.0) / q)
    # need coef * q^(t-1) < eps
    t = 1 + max(1, math.ceil(math.log(eps / coef) / math.log(q)))
    while t > 2 and coef * q ** (t - 2) < eps:
        t -= 1
    while coef * q ** (t - 1) >= eps:
        t += 1
    return t


# --- spectral view --------------------------------------------------------------

def _block_orbit(lams, alpha: float, r, steps: int):
    """Apply B(lam) = [[alpha lam, -(alpha-1) lam], [1, 0]] ``steps`` times to (r, r)."""
    lams = np.asarray(lams, dtype=float)
    a = np.broadcast_to(np.asarray(r, dtype=float), lams.shape).copy()
    b = a.copy()
    for _ in range(steps):
        a, b = alpha * lams * a - (alpha - 1.0) * lams * b, a
    return a, b


def block_iterate(lam: float, p: MomentumParams, r: float, t: int) -> tuple[float, float]:
    """``B(lam)^(t-1) (r, r)`` for a non-principal eigenvalue ``0 <= lam < 1``."""
    if not 0.0 <= lam < 1.0:
        raise InvalidParameterError(f"lambda must lie in [0, 1), got {lam}")
    if t < 1:
        raise InvalidParameterError("t must be >= 1")
    a, b = _block_orbit(lam, p.alpha, r, t - 1)
    return float(a), float(b)


def block_second_trace(lams, p: MomentumParams, r: float, tmax: int) -> np.ndarray:
    """Second coordinate of ``B(lam)^(t-1)(r, r)`` for t = 1..tmax, one column per lam."""
    lams = np.asarray(lams, dtype=float)
    a = np.full(lams.shape, float(r))
    b = a.copy()
    out = np.empty((tmax,) + lams.shape)
    for k in range(tmax):
        out[k] = b
        a, b = p.alpha * lams * a - (p.alpha - 1.0) * lams * b, a
    return out


def spectral_coordinates(g: Graph, x1, p: MomentumParams, t: int):
    """Eigenpairs of M' and the rotated coordinates ``z(t) = Q^T y(t)``.

    ``z(t)`` is obtained without running the protocol: each coordinate of
    ``z(1) = Q^T x1`` is pushed through ``B(lambda_i)^(t-1)``.
    """
    require_connected(g)
    if t < 1:
        raise InvalidParameterError("t must be >= 1")
    x1 = np.asarray(x1, dtype=float)
    if x1.shape[0] != g.n:
        raise ShapeError(f"x1 has length {x1.shape[0]}, graph has {g.n} nodes")
    lams, q = symmetric_eig(lazy_metropolis(g).entries)
    z1 = q.T @ x1
    # (z(t), z(t-1)) = B^(t-1) (z(1), z(0)) with z(0) = z(1)
    z_now, _ = _block_orbit(lams, p.alpha, z1, t - 1)
    return lams, q, z_now


def spectral_simulate(g: Graph, x1, p: MomentumParams, t: int) -> np.ndarray:
    """Reconstruct y(t) from the eigendecomposition of M' alone."""
    if t == 1:
        return np.array(x1, dtype=float)
    _, q, z = spectral_coordinates(g, x1, p, t)
    return q @ z
