"""Formation maintenance from offsets and leader-following.

Both protocols reuse the accelerated consensus round. For formations every
arc (i, j) carries an offset r_ij in R^d and node i moves towards
``p_j - r_ij``; for leader-following a nonempty set S of nodes is pinned to a
common value v and everybody else runs the consensus round with the slower
momentum ``1 - 2/(18U+1)``.

Formation file format (1-based, one orientation per edge; the reverse arc
gets the negated offset)::

    # comment
    i j r_1 ... r_d
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .consensus import (ConsensusState, ConvergenceReport, MomentumParams, momentum_default,
                        momentum_leader, neighbor_correction, run_iteration)
from .errors import (FormationInvalidError, IncompleteSpecError, InvalidConfigError,
                     InvalidParameterError, MalformedSpecError, ShapeError)
from .graphs import Graph, StochasticMatrix, require_connected

FORMATION_TOL = 1e-9


# --- formations ---------------------------------------------------------------

@dataclass
class FormationSpec:
    """Offsets ``r[(i, j)]`` for both orientations of every edge."""

    d: int
    offsets: dict = field(default_factory=dict)

    def __post_init__(self):
        self.offsets = {(int(i), int(j)): np.asarray(r, dtype=float).reshape(self.d)
                        for (i, j), r in self.offsets.items()}

    @classmethod
    def from_edges(cls, offsets: dict) -> "FormationSpec":
        """Build from one orientation per edge; the reverse gets ``-r``.

        Raises MalformedSpecError if both orientations are given and disagree.
        """
        full = {}
        d = None
        for (i, j), r in offsets.items():
            r = np.atleast_1d(np.asarray(r, dtype=float))
            d = r.shape[0] if d is None else d
            if r.shape != (d,):
                raise MalformedSpecError(f"offset ({i}, {j}) has dimension {r.shape[0]}, expected {d}")
            for key, val in (((i, j), r), ((j, i), -r)):
                if key in full and not np.array_equal(full[key], val):
                    raise MalformedSpecError(f"offsets for ({i}, {j}) and ({j}, {i}) are not opposite")
                full[key] = val
        return cls(d or 1, full)

    def arc_offsets(self, g: Graph) -> np.ndarray:
        """Offsets aligned with ``g.arcs``; shape (2m, d)."""
        src, dst, _ = g.arcs
        out = np.empty((src.shape[0], self.d))
        for k, (i, j) in enumerate(zip(src.tolist(), dst.tolist())):
            try:
                out[k] = self.offsets[(i, j)]
            except KeyError:
                raise IncompleteSpecError(f"no offset for arc ({i}, {j})") from None
        return out


@dataclass(frozen=True)
class FormationVerdict:
    valid: bool
    violating_edge: Optional[tuple[int, int]]
    positions: np.ndarray  # spanning-tree integrated points, root at the origin


def _check_structure(g: Graph, spec: FormationSpec) -> None:
    for (i, j), r in spec.offsets.items():
        if not (0 <= i < g.n and 0 <= j < g.n) or not g.has_edge(i, j):
            raise MalformedSpecError(f"offset given for non-edge ({i}, {j})")
    for i, j in g.edges:
        if (i, j) not in spec.offsets or (j, i) not in spec.offsets:
            raise IncompleteSpecError(f"missing offset on edge ({i}, {j})")
        if not np.array_equal(spec.offsets[(i, j)], -spec.offsets[(j, i)]):
            raise MalformedSpecError(f"r_{i}{j} != -r_{j}{i}")


def validate_formation(g: Graph, spec: FormationSpec, root: int = 0) -> FormationVerdict:
    """Check that offsets sum to zero around every cycle.

    Integrates offsets along a depth-first spanning tree from ``root`` (lowest
    index neighbour first) and checks each non-tree edge when it is first
    met, reporting the first one with ``|q_j - q_i - r_ij| > 1e-9``.
    """
    require_connected(g)
    _check_structure(g, spec)
    q = np.zeros((g.n, spec.d))
    seen = [False] * g.n
    seen[root] = True
    checked = set()
    stack = [(root, -1, iter(g.neighbors[root]))]
    while stack:
        i, parent, it = stack[-1]
        for j in it:
            if j == parent and (min(i, j), max(i, j)) not in checked:
                checked.add((min(i, j), max(i, j)))
                continue
            if not seen[j]:
                seen[j] = True
                q[j] = q[i] + spec.offsets[(i, j)]
                checked.add((min(i, j), max(i, j)))
                stack.append((j, i, iter(g.neighbors[j])))
                break
            key = (min(i, j), max(i, j))
            if key in checked:
                continue
            checked.add(key)
            if np.max(np.abs(q[j] - q[i] - spec.offsets[(i, j)])) > FORMATION_TOL:
                return FormationVerdict(False, (i, j), q)
        else:
            stack.pop()
    return FormationVerdict(True, None, q)


def in_formation(g: Graph, spec: FormationSpec, pts, tol: float = FORMATION_TOL) -> bool:
    pts = np.asarray(pts, dtype=float).reshape(g.n, spec.d)
    return all(np.max(np.abs(pts[j] - pts[i] - spec.offsets[(i, j)])) <= tol
               for i, j in g.edges)


def target_formation(g: Graph, spec: FormationSpec, p1, root: int = 0) -> np.ndarray:
    """The unique in-formation configuration with the same centroid as ``p1``."""
    verdict = validate_formation(g, spec, root)
    if not verdict.valid:
        raise FormationInvalidError(f"offsets inconsistent on edge {verdict.violating_edge}")
    p1 = np.asarray(p1, dtype=float).reshape(g.n, spec.d)
    q = verdict.positions
    return q + (p1 - q).mean(axis=0)


@dataclass(frozen=True)
class AgentPositions(ConsensusState):
    """Positions ``x`` (= p) and auxiliary ``y``, both shape (n, d)."""

    @property
    def p(self) -> np.ndarray:
        return self.x


def _formation_round(s, g, arc_r, params):
    y_new = s.x + neighbor_correction(g, s.x, arc_r)
    p_new = y_new + params.momentum * (y_new - s.y)
    return AgentPositions(p_new, y_new, s.t + 1)


def formation_step(s: AgentPositions, g: Graph, spec: FormationSpec, params: MomentumParams) -> AgentPositions:
    if s.x.shape != (g.n, spec.d):
        raise ShapeError(f"positions have shape {s.x.shape}, expected {(g.n, spec.d)}")
    return _formation_round(s, g, spec.arc_offsets(g), params)


def run_formation(g: Graph, spec: FormationSpec, p1, U: float, eps: float = 1e-6,
                  max_iter: int = 10**6, record: bool = False) -> ConvergenceReport:
    """Iterate until ``sum_i ||y_i(t) - pbar_i||^2 < eps^2``.

    The report's bound trace is ``2 (1 - 1/(9U))^(t-1) sum_i ||y_i(1) - pbar_i||^2``.
    """
    pbar = target_formation(g, spec, p1)
    params = momentum_default(U)
    arc_r = spec.arc_offsets(g)
    p1 = np.asarray(p1, dtype=float).reshape(g.n, spec.d)
    s = AgentPositions(p1.copy(), p1.copy(), 1)
    return run_iteration(s, lambda st: _formation_round(st, g, arc_r, params), pbar,
                         params.eta, eps, "two", max_iter, record)


def load_formation(path) -> tuple[Graph, FormationSpec]:
    """Read a formation file; the graph is the set of listed edges."""
    offsets = {}
    n = 0
    d = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) < 3:
                raise InvalidConfigError(f"{path}:{lineno}: expected 'i j r_1 .. r_d'")
            try:
                i, j = int(parts[0]) - 1, int(parts[1]) - 1
                r = [float(v) for v in parts[2:]]
            except ValueError:
                raise InvalidConfigError(f"{path}:{lineno}: malformed numbers") from None
            if d is None:
                d = len(r)
            elif len(r) != d:
                raise InvalidConfigError(f"{path}:{lineno}: expected {d} offset components")
            if i < 0 or j < 0:
                raise InvalidConfigError(f"{path}:{lineno}: node indices are 1-based")
            if (j, i) in offsets and not np.array_equal(offsets[(j, i)], -np.array(r)):
                raise MalformedSpecError(f"{path}:{lineno}: r_ij != -r_ji")
            if (j, i) not in offsets:
                offsets[(i, j)] = r
            n = max(n, i + 1, j + 1)
    if not offsets:
        raise InvalidConfigError(f"{path}: no edges")
    spec = FormationSpec.from_edges(offsets)
    g = Graph.from_edges(n, offsets.keys())
    return g, spec


def write_formation(path, g: Graph, spec: FormationSpec) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, j in g.edges:
            r = " ".join(repr(float(v)) for v in spec.offsets[(i, j)])
            fh.write(f"{i + 1} {j + 1} {r}\n")


def formation_from_points(g: Graph, pts) -> FormationSpec:
    """Offsets realised by the given points (always a valid formation)."""
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    return FormationSpec.from_edges({(i, j): pts[j] - pts[i] for i, j in g.edges})


def write_trajectory_csv(path, trajectory: Iterable[np.ndarray]) -> None:
    """Columns ``t, node, coord_1..coord_d``; 1-based t and node."""
    traj = [np.asarray(p, dtype=float) for p in trajectory]
    d = traj[0].shape[1] if traj and traj[0].ndim == 2 else 1
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "node"] + [f"coord_{k + 1}" for k in range(d)])
        for t, pts in enumerate(traj, 1):
            pts = pts.reshape(pts.shape[0], d)
            for i, row in enumerate(pts.tolist(), 1):
                wr.writerow([t, i] + [repr(v) for v in row])


# --- leader-following -----------------------------------------------------------

@dataclass(frozen=True)
class LeaderConfig:
    S: frozenset
    v: np.ndarray
    U: float

    def __init__(self, S: Iterable[int], v, U: float):
        S = frozenset(int(i) for i in S)
        if not S:
            raise InvalidConfigError("the leader set must be nonempty")
        if not U >= 1:
            raise InvalidParameterError(f"U must be >= 1, got {U}")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "v", np.atleast_1d(np.asarray(v, dtype=float)))
        object.__setattr__(self, "U", float(U))

    def mask(self, n: int) -> np.ndarray:
        m = np.zeros(n, dtype=bool)
        m[sorted(self.S)] = True
        return m


def _as_columns(x, d):
    x = np.asarray(x, dtype=float)
    return x.reshape(x.shape[0], d)


def leader_initial(x1, cfg: LeaderConfig) -> ConsensusState:
    """Initial state with the leaders pinned at v; ``y(1) = x(1)``."""
    x = _as_columns(np.array(x1, dtype=float), cfg.v.shape[0]).copy()
    x[cfg.mask(x.shape[0])] = cfg.v
    return ConsensusState(x, x.copy(), 1)


def _leader_round(s, g, leaders, v, params):
    y_new = s.x + neighbor_correction(g, s.x)
    x_new = y_new + params.momentum * (y_new - s.y)
    # leaders keep x = v; their y is bookkeeping only and never read by neighbours
    x_new[leaders] = v
    y_new[leaders] = v
    return ConsensusState(x_new, y_new, s.t + 1)


def leader_step(s: ConsensusState, g: Graph, cfg: LeaderConfig) -> ConsensusState:
    if s.x.shape[0] != g.n:
        raise ShapeError(f"state has {s.x.shape[0]} rows, graph has {g.n} nodes")
    x = _as_columns(s.x, cfg.v.shape[0])
    y = _as_columns(s.y, cfg.v.shape[0])
    out = _leader_round(ConsensusState(x, y, s.t), g, cfg.mask(g.n), cfg.v, momentum_leader(cfg.U))
    return ConsensusState(out.x.reshape(s.x.shape), out.y.reshape(s.y.shape), out.t)


def run_leader_follow(g: Graph, cfg: LeaderConfig, x1, eps: float = 1e-6, max_iter: int = 10**6,
                      record: bool = False) -> ConvergenceReport:
    """Iterate until ``sum_i ||y_i(t) - v||^2 < eps^2``; bound uses eta = 1 - 1/(18U)."""
    require_connected(g)
    if max(cfg.S) >= g.n or min(cfg.S) < 0:
        raise InvalidConfigError(f"leader index out of range for n={g.n}")
    s = leader_initial(x1, cfg)
    params = momentum_leader(cfg.U)
    leaders = cfg.mask(g.n)
    target = np.broadcast_to(cfg.v, s.x.shape)
    return run_iteration(s, lambda st: _leader_round(st, g, leaders, cfg.v, params), target,
                         params.eta, eps, "two", max_iter, record)


@dataclass(frozen=True)
class DoubledGraph:
    """Graph with every non-leader i split into copies ``a_of[i]`` and ``b_of[i]``.

    Leaders keep a single node (``a_of[i] == b_of[i]``). Nodes are ordered as
    all A copies, then all B copies, then the leaders, each in original order.
    """

    graph: Graph
    a_of: np.ndarray
    b_of: np.ndarray
    leaders: frozenset


def doubled_graph(g: Graph, S: Iterable[int]) -> DoubledGraph:
    """Split each non-leader into a positive and a negated copy.

    Non-leader edges (i, j) become (i^A, j^A) and (i^B, j^B); leader/non-leader
    edges (l, j) become (l, j^A) and (l, j^B); leader/leader edges are kept.
    """
    require_connected(g)
    S = frozenset(int(i) for i in S)
    if not S:
        raise InvalidConfigError("the leader set must be nonempty")
    followers = [i for i in range(g.n) if i not in S]
    k = len(followers)
    a_of = np.full(g.n, -1, dtype=np.int64)
    b_of = np.full(g.n, -1, dtype=np.int64)
    for pos, i in enumerate(followers):
        a_of[i] = pos
        b_of[i] = k + pos
    for pos, i in enumerate(sorted(S)):
        a_of[i] = b_of[i] = 2 * k + pos
    edges = []
    for i, j in g.edges:
        if i in S and j in S:
            edges.append((a_of[i], a_of[j]))
        else:
            edges.append((a_of[i], a_of[j]))
            edges.append((b_of[i], b_of[j]))
    gp = Graph.from_edges(2 * k + len(S), {(int(min(a, b)), int(max(a, b))) for a, b in edges})
    a_of.setflags(write=False)
    b_of.setflags(write=False)
    return DoubledGraph(gp, a_of, b_of, S)


def mirrored_initial(dg: DoubledGraph, x1, v) -> np.ndarray:
    """x'(i^A) = x_i - v, x'(i^B) = -(x_i - v), leaders at 0."""
    x1 = np.asarray(x1, dtype=float)
    shifted = x1 - v
    out = np.zeros((dg.graph.n,) + x1.shape[1:])
    for i in range(x1.shape[0]):
        if i in dg.leaders:
            continue
        out[dg.a_of[i]] = shifted[i]
        out[dg.b_of[i]] = -shifted[i]
    return out


def inherited_operator(g: Graph, dg: DoubledGraph) -> StochasticMatrix:
    """Lazy averaging matrix on the doubled graph with weights taken from ``g``.

    Each doubled edge carries ``1/(2 max(d(i), d(j)))`` with the degrees of the
    original endpoints, so leader nodes, whose degree grows when their
    neighbours are split, still weigh each copy exactly as in ``g``. Running the
    consensus round with this matrix and bound 2U reproduces leader-following.
    """
    deg = g.degrees
    orig = np.empty(dg.graph.n, dtype=np.int64)
    for i in range(g.n):
        orig[dg.a_of[i]] = i
        orig[dg.b_of[i]] = i
    a = np.zeros((dg.graph.n, dg.graph.n))
    for u, w in dg.graph.edges:
        val = 0.5 / max(deg[orig[u]], deg[orig[w]])
        a[u, w] = a[w, u] = val
    a[np.diag_indices_from(a)] = 1.0 - a.sum(axis=1)
    return StochasticMatrix(a, lazy=True)
