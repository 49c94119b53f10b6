"""Decentralized subgradient method built on accelerated consensus.

Node i only knows its own convex ``f_i`` and minimises the network average
``f = (1/n) sum_i f_i`` by running three coupled sequences x, y, z::

    y(t+1) = M' x(t) - beta g(t)
    z(t+1) = y(t)    - beta g(t)
    x(t+1) = y(t+1) + (1 - gamma) (y(t+1) - z(t+1))

with ``g_i(t)`` a subgradient of ``f_i`` at ``y_i(t)``. The output is the
running average ``yhat(T) = (1/T) sum_{k<=T} y(k)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .consensus import MomentumParams, lazy_average, momentum_default
from .errors import InvalidParameterError, ShapeError, UnsupportedMetricError
from .graphs import Graph, StochasticMatrix, require_connected

SQRT2 = math.sqrt(2.0)


# --- objectives -----------------------------------------------------------------

class ObjectiveSet:
    """n scalar convex functions, node i owning the i-th.

    Subclasses implement the vectorised ``values`` / ``subgradients`` which
    evaluate ``f_i`` (resp. a subgradient of ``f_i``) at ``theta[i]``.
    """

    L: float
    optimum: Optional[float] = None
    optimum_value: Optional[float] = None

    @property
    def n(self) -> int:
        raise NotImplementedError

    def values(self, theta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def subgradients(self, theta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def average(self, theta: float) -> float:
        """f(theta) = (1/n) sum_i f_i(theta)."""
        return float(np.mean(self.values(np.full(self.n, float(theta)))))


@dataclass
class AbsoluteLoss(ObjectiveSet):
    """f_i(theta) = |theta - w_i|; the minimisers of f are the medians of w."""

    w: np.ndarray
    L: float = 1.0

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        # any point between the two middle order statistics minimises f; take the midpoint
        self.optimum = float(np.median(self.w))
        self.optimum_value = float(np.mean(np.abs(self.optimum - self.w)))

    @property
    def n(self):
        return self.w.shape[0]

    def values(self, theta):
        return np.abs(theta - self.w)

    def subgradients(self, theta):
        # sign(0) = 0 picks the symmetric subgradient at the kink
        return np.sign(theta - self.w)


@dataclass
class QuadraticLoss(ObjectiveSet):
    """f_i(theta) = (theta - w_i)^2 considered on the box [lo, hi].

    L is the largest |f_i'| on the box; outside it the returned subgradient is
    clipped to [-L, L] so the bounded-subgradient assumption keeps holding.
    """

    w: np.ndarray
    box: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        lo, hi = self.box
        if not lo < hi:
            raise InvalidParameterError(f"empty box {self.box}")
        self.L = float(2.0 * np.max(np.maximum(np.abs(lo - self.w), np.abs(hi - self.w))))
        self.optimum = float(np.clip(np.mean(self.w), lo, hi))
        self.optimum_value = float(np.mean((self.optimum - self.w) ** 2))

    @property
    def n(self):
        return self.w.shape[0]

    def values(self, theta):
        return (theta - self.w) ** 2

    def subgradients(self, theta):
        return np.clip(2.0 * (theta - self.w), -self.L, self.L)


@dataclass
class ZeroObjective(ObjectiveSet):
    size: int
    L: float = 1.0

    def __post_init__(self):
        self.optimum = 0.0
        self.optimum_value = 0.0

    @property
    def n(self):
        return self.size

    def values(self, theta):
        return np.zeros(self.size)

    def subgradients(self, theta):
        return np.zeros(self.size)


@dataclass
class CallableObjective(ObjectiveSet):
    """Per-node Python callables ``f_i`` and ``g_i``."""

    funcs: Sequence[Callable[[float], float]]
    subgrads: Sequence[Callable[[float], float]]
    L: float
    optimum: Optional[float] = None
    optimum_value: Optional[float] = field(default=None)

    def __post_init__(self):
        if len(self.funcs) != len(self.subgrads):
            raise ShapeError("need one subgradient oracle per function")
        if self.optimum is not None and self.optimum_value is None:
            self.optimum_value = self.average(self.optimum)

    @property
    def n(self):
        return len(self.funcs)

    def values(self, theta):
        return np.array([f(float(t)) for f, t in zip(self.funcs, theta)])

    def subgradients(self, theta):
        return np.array([g(float(t)) for g, t in zip(self.subgrads, theta)])


# --- metrics ----------------------------------------------------------------------

def lower_median(theta) -> float:
    """Lower middle order statistic (the usual median for odd lengths)."""
    v = np.sort(np.asarray(theta, dtype=float))
    if v.size == 0:
        raise InvalidParameterError("median of an empty vector")
    return float(v[(v.size - 1) // 2])


def dispersion(theta) -> float:
    """Mean absolute deviation from the (lower) median."""
    theta = np.asarray(theta, dtype=float)
    if theta.size == 0:
        raise InvalidParameterError("dispersion of an empty vector")
    return float(np.mean(np.abs(theta - lower_median(theta))))


def error_metric(theta, obj: ObjectiveSet) -> float:
    """``(1/n) sum_i f_i(theta_i) - f(w*)``.

    Each node is scored on its own function, so the value can be negative
    when the theta_i disagree.
    """
    if obj.optimum is None or obj.optimum_value is None:
        raise UnsupportedMetricError("the objective has no known minimiser")
    return float(np.mean(obj.values(np.asarray(theta, dtype=float))) - obj.optimum_value)


def beta_step(L: float, U: float, T: int) -> float:
    """Step size 1 / (L sqrt(U T))."""
    if not (L > 0 and U > 0 and T > 0):
        raise InvalidParameterError(f"L, U, T must be positive, got {L}, {U}, {T}")
    return 1.0 / (L * math.sqrt(U * T))


def dispersion_bound(U: float, T: int, n: int, dev0: float) -> float:
    """Bound on (1/n) ||yhat(T) - mean(yhat(T)) 1||_1, hence on Disp(yhat(T))."""
    return 18.0 * SQRT2 * math.sqrt(U) / math.sqrt(T) + 18.0 * SQRT2 * U * dev0 / (math.sqrt(n) * T)


def error_bound(L: float, U: float, T: int, n: int, dev0: float, gap0: float) -> float:
    """Six-term bound on Err(yhat(T)); ``gap0`` is xbar(1) - w*."""
    rt, ru, rn = math.sqrt(T), math.sqrt(U), math.sqrt(n)
    return (L * ru * gap0 ** 2 / (2.0 * rt)
            + L / (2.0 * rt * ru)
            + 36.0 * SQRT2 * L * ru / rt
            + 36.0 * SQRT2 * L * U * dev0 / (T * rn)
            + 18.0 * SQRT2 * L * ru / rt
            + 18.0 * SQRT2 * L * U * dev0 / (rn * T))


# --- protocol ---------------------------------------------------------------------

@dataclass(frozen=True)
class OptState:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    ysum: np.ndarray
    t: int = 1

    @classmethod
    def initial(cls, x1) -> "OptState":
        x = np.array(x1, dtype=float)
        return cls(x, x.copy(), x.copy(), x.copy(), 1)

    @property
    def yhat(self) -> np.ndarray:
        return self.ysum / self.t


def optimize_step(s: OptState, w: Union[Graph, StochasticMatrix], p: MomentumParams, beta: float,
                  obj: ObjectiveSet) -> OptState:
    if beta < 0:
        raise InvalidParameterError(f"beta must be nonnegative, got {beta}")
    if not (s.x.shape == s.y.shape == s.z.shape):
        raise ShapeError("x, y, z must share a shape")
    if obj.n != s.y.shape[0]:
        raise ShapeError(f"objective has {obj.n} nodes, state has {s.y.shape[0]}")
    g = obj.subgradients(s.y)
    y_new = lazy_average(w, s.x) - beta * g
    z_new = s.y - beta * g
    x_new = y_new + p.momentum * (y_new - z_new)
    return OptState(x_new, y_new, z_new, s.ysum + y_new, s.t + 1)


def baseline_step(x, w: Union[Graph, StochasticMatrix], alpha_step: float, obj: ObjectiveSet) -> np.ndarray:
    """Plain distributed subgradient step ``W x - alpha g(x)``."""
    if not alpha_step > 0:
        raise InvalidParameterError(f"alpha_step must be positive, got {alpha_step}")
    x = np.asarray(x, dtype=float)
    if obj.n != x.shape[0]:
        raise ShapeError(f"objective has {obj.n} nodes, state has {x.shape[0]}")
    g = obj.subgradients(x)
    return lazy_average(w, x) - alpha_step * g


@dataclass
class OptReport:
    yhat: np.ndarray
    disp: float
    err: float
    bound_disp: float
    bound_err: float
    bounds_apply: bool
    beta: float
    xbar: np.ndarray          # mean of x(t), t = 1..T
    ymean: np.ndarray
    zmean: np.ndarray
    gmean: np.ndarray         # mean of g(t), t = 1..T-1
    l1_dev: np.ndarray        # ||y(t) - xbar(t) 1||_1
    disp_running: np.ndarray  # Disp(yhat(t))
    err_running: np.ndarray   # Err(yhat(t)); NaN when w* is unknown
    final: OptState

    @property
    def avg_abs_dev(self) -> float:
        """(1/n) ||yhat(T)||_1, the mean distance from 0."""
        return float(np.mean(np.abs(self.yhat)))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", "xbar", "l1_dev_from_xbar", "disp_running", "err_running"])
            for k in range(len(self.xbar)):
                wr.writerow([k + 1, repr(float(self.xbar[k])), repr(float(self.l1_dev[k])),
                             repr(float(self.disp_running[k])), repr(float(self.err_running[k]))])
            fh.write(f"# summary disp={self.disp!r} bound_disp={self.bound_disp!r} "
                     f"err={self.err!r} bound_err={self.bound_err!r}\n")


def run_optimize(g: Graph, x1, obj: ObjectiveSet, U: float, T: int,
                 params: Optional[MomentumParams] = None, beta: Optional[float] = None) -> OptReport:
    """Run T rounds (states y(1)..y(T)) and score the running average yhat(T).

    The bound fields are filled whenever w* is known; ``bounds_apply`` says
    whether their hypotheses (U >= n, default schedule, prescribed beta) hold.
    """
    require_connected(g)
    if T < 1:
        raise InvalidParameterError("T must be >= 1")
    p = params if params is not None else momentum_default(U)
    b = beta if beta is not None else beta_step(obj.L, U, T)
    s = OptState.initial(x1)
    n = g.n
    if s.x.shape != (n,) or obj.n != n:
        raise ShapeError("x1, objective and graph sizes disagree")
    has_opt = obj.optimum is not None
    xbar, ymean, zmean, gmean, l1, dr, er = [], [], [], [], [], [], []
    while True:
        xb = float(np.mean(s.x))
        xbar.append(xb)
        ymean.append(float(np.mean(s.y)))
        zmean.append(float(np.mean(s.z)))
        l1.append(float(np.sum(np.abs(s.y - xb))))
        yh = s.yhat
        dr.append(dispersion(yh))
        er.append(error_metric(yh, obj) if has_opt else math.nan)
        if s.t >= T:
            break
        gmean.append(float(np.mean(obj.subgradients(s.y))))
        s = optimize_step(s, g, p, b, obj)

    x1a = np.asarray(x1, dtype=float)
    dev0 = float(np.linalg.norm(x1a - x1a.mean()))
    yhat = s.yhat
    bound_disp = dispersion_bound(U, T, n, dev0)
    if has_opt:
        err = error_metric(yhat, obj)
        bound_err = error_bound(obj.L, U, T, n, dev0, xbar[0] - obj.optimum)
    else:
        err = bound_err = math.nan
    default_p = momentum_default(U)
    applies = (U >= n and p == default_p and math.isclose(b, beta_step(obj.L, U, T), rel_tol=1e-15))
    return OptReport(yhat, dispersion(yhat), err, bound_disp, bound_err, applies, b,
                     np.array(xbar), np.array(ymean), np.array(zmean), np.array(gmean),
                     np.array(l1), np.array(dr), np.array(er), s)


@dataclass
class BaselineReport:
    xhat: np.ndarray
    x_final: np.ndarray
    disp: float
    alpha_step: float

    @property
    def avg_abs_dev(self) -> float:
        return float(np.mean(np.abs(self.xhat)))


def run_baseline(g: Graph, x1, obj: ObjectiveSet, T: int, alpha_step: Optional[float] = None,
                 w: Union[Graph, StochasticMatrix, None] = None) -> BaselineReport:
    """Plain distributed subgradient method with lazy-Metropolis mixing.

    Same budget convention as :func:`run_optimize`: T states x(1)..x(T),
    reported through their running average. Default step 1/(L sqrt(n T)).
    """
    require_connected(g)
    n = g.n
    a = alpha_step if alpha_step is not None else 1.0 / (obj.L * math.sqrt(n * T))
    mix = g if w is None else w
    x = np.array(x1, dtype=float)
    xsum = x.copy()
    for _ in range(T - 1):
        x = baseline_step(x, mix, a, obj)
        xsum += x
    xhat = xsum / T
    return BaselineReport(xhat, x, dispersion(xhat), a)


def median_instance(n: int) -> np.ndarray:
    """w_i = i mod 10 for i = 1..n/2 and w_{n/2+i} = -w_i; the median is 0."""
    if n < 2 or n % 2:
        raise InvalidParameterError(f"the antisymmetric instance needs even n >= 2, got {n}")
    half = np.arange(1, n // 2 + 1) % 10
    return np.concatenate([half, -half]).astype(float)
