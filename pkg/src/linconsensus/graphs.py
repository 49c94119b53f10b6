"""Graph families, Metropolis weight matrices and spectral diagnostics.

Nodes are indexed from 0 internally; the edge-list text format written by
:func:`write_edgelist` uses 1-based indices::

    n m
    i j          (m lines, 1-based, i < j)
    i x y        (n lines, only for graphs carrying coordinates)

Blank lines and lines starting with ``#`` are ignored on read.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional

import numpy as np

from .errors import InvalidMatrixError, InvalidParameterError, InvalidSizeError, TopologyError
from .linalg import symmetric_eig
from .rng import SplitMix64


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph on nodes ``0..n-1``."""

    n: int
    neighbors: tuple[tuple[int, ...], ...]
    coords: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.neighbors) != self.n:
            raise InvalidSizeError("need one neighbor set per node")
        for i, nb in enumerate(self.neighbors):
            if i in nb:
                raise InvalidParameterError(f"self-loop at node {i}")
            for j in nb:
                if not 0 <= j < self.n or i not in self.neighbors[j]:
                    raise InvalidParameterError(f"adjacency not symmetric at ({i}, {j})")
        if self.coords is not None:
            c = np.array(self.coords, dtype=float)
            c.setflags(write=False)
            object.__setattr__(self, "coords", c)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], coords=None) -> "Graph":
        if n < 1:
            raise InvalidSizeError("a graph needs at least one node")
        adj: list[set[int]] = [set() for _ in range(n)]
        for i, j in edges:
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidParameterError(f"edge ({i}, {j}) out of range for n={n}")
            if i == j:
                raise InvalidParameterError(f"self-loop at node {i}")
            adj[i].add(j)
            adj[j].add(i)
        return cls(n, tuple(tuple(sorted(s)) for s in adj), coords)

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.array([len(nb) for nb in self.neighbors], dtype=np.int64)
        d.setflags(write=False)
        return d

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """Edges as sorted pairs ``(i, j)`` with ``i < j``."""
        return tuple((i, j) for i in range(self.n) for j in self.neighbors[i] if i < j)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def connected(self) -> bool:
        return is_connected(self)

    @cached_property
    def arcs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Both orientations of every edge with their Metropolis weight.

        Returns ``(src, dst, w)`` with ``w = 1 / max(d(src), d(dst))``.
        """
        src = np.array([i for i in range(self.n) for _ in self.neighbors[i]], dtype=np.int64)
        dst = np.array([j for i in range(self.n) for j in self.neighbors[i]], dtype=np.int64)
        d = self.degrees
        w = 1.0 / np.maximum(d[src], d[dst]).astype(float) if src.size else np.zeros(0)
        for a in (src, dst, w):
            a.setflags(write=False)
        return src, dst, w

    def has_edge(self, i: int, j: int) -> bool:
        return j in self.neighbors[i]

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        if self.n != other.n or self.neighbors != other.neighbors:
            return False
        if self.coords is None or other.coords is None:
            return self.coords is None and other.coords is None
        return bool(np.array_equal(self.coords, other.coords))

    __hash__ = None


def is_connected(g: Graph) -> bool:
    """Breadth-first reachability from node 0."""
    if g.n <= 1:
        return True
    seen = [False] * g.n
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        i = queue.popleft()
        for j in g.neighbors[i]:
            if not seen[j]:
                seen[j] = True
                count += 1
                queue.append(j)
    return count == g.n


def require_connected(g: Graph) -> None:
    if not g.connected:
        raise TopologyError("the protocol requires a connected graph")


# --- deterministic families -------------------------------------------------

def line_graph(n: int) -> Graph:
    if n < 2:
        raise InvalidSizeError(f"line graph needs n >= 2, got {n}")
    return Graph.from_edges(n, ((i, i + 1) for i in range(n - 1)))


def lollipop_graph(n: int) -> Graph:
    """Clique on the first n/2 nodes, a path on the rest, bridged at n/2-1 -- n/2."""
    if n < 4 or n % 2:
        raise InvalidSizeError(f"lollipop graph needs even n >= 4, got {n}")
    h = n // 2
    edges = [(i, j) for i in range(h) for j in range(i + 1, h)]
    edges += [(i, i + 1) for i in range(h - 1, n - 1)]
    return Graph.from_edges(n, edges)


def grid_2d(k: int) -> Graph:
    """k x k grid; node (i, j), 1 <= i, j <= k, has index (i-1)*k + (j-1)."""
    if k < 2:
        raise InvalidSizeError(f"grid needs k >= 2, got {k}")
    edges = []
    for r in range(k):
        for c in range(k):
            v = r * k + c
            if c + 1 < k:
                edges.append((v, v + 1))
            if r + 1 < k:
                edges.append((v, v + k))
    return Graph.from_edges(k * k, edges)


def complete_graph(n: int) -> Graph:
    if n < 1:
        raise InvalidSizeError(f"complete graph needs n >= 1, got {n}")
    return Graph.from_edges(n, ((i, j) for i in range(n) for j in range(i + 1, n)))


def star_graph(n: int) -> Graph:
    """Node 0 joined to every other node."""
    if n < 2:
        raise InvalidSizeError(f"star graph needs n >= 2, got {n}")
    return Graph.from_edges(n, ((0, j) for j in range(1, n)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise InvalidSizeError(f"cycle graph needs n >= 3, got {n}")
    return Graph.from_edges(n, ((i, (i + 1) % n) for i in range(n)))


# --- seeded random families -------------------------------------------------

def geometric_random_graph(n: int, r: float, seed: int) -> Graph:
    """Random geometric graph G(n, r) on the unit square.

    Node i gets coordinates ``(u_{2i}, u_{2i+1})`` from a SplitMix64 stream
    seeded with ``seed``; nodes are adjacent iff their Euclidean distance is
    at most ``r``. Disconnected draws are returned as-is (check ``.connected``).
    """
    if n < 2:
        raise InvalidSizeError(f"geometric graph needs n >= 2, got {n}")
    if not r > 0:
        raise InvalidParameterError(f"radius must be positive, got {r}")
    gen = SplitMix64(seed)
    pts = np.array([[gen.random(), gen.random()] for _ in range(n)])
    diff = pts[:, None, :] - pts[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", diff, diff)
    ii, jj = np.nonzero(np.triu(dist2 <= r * r, k=1))
    return Graph.from_edges(n, zip(ii.tolist(), jj.tolist()), coords=pts)


def connectivity_radius(n: int, c: float = 2.0) -> float:
    """Radius with r^2 = 8 c ln(n) / n."""
    return math.sqrt(8.0 * c * math.log(n) / n)


def random_connected_graph(n: int, p: float, seed: int) -> Graph:
    """Random spanning tree (uniform attachment) plus independent extra edges.

    Node ``i >= 1`` attaches to a uniformly chosen earlier node, then each
    remaining pair is added with probability ``p``. Always connected.
    """
    if n < 1:
        raise InvalidSizeError(f"need n >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise InvalidParameterError(f"edge probability must lie in [0, 1], got {p}")
    gen = SplitMix64(seed)
    edges = {(gen.randbelow(i), i) for i in range(1, n)}
    for i in range(n):
        for j in range(i + 1, n):
            if gen.random() < p:
                edges.add((i, j))
    return Graph.from_edges(n, sorted(edges))


# --- weight matrices ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StochasticMatrix:
    entries: np.ndarray
    lazy: bool = False

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidMatrixError(f"expected a square matrix, got shape {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, x):
        return self.entries @ x


def metropolis(g: Graph) -> StochasticMatrix:
    """Metropolis matrix: 1/max(d(i), d(j)) on edges, diagonal fills rows to 1."""
    require_connected(g)
    src, dst, w = g.arcs
    a = np.zeros((g.n, g.n))
    a[src, dst] = w
    a[np.arange(g.n), np.arange(g.n)] = 1.0 - a.sum(axis=1)
    return StochasticMatrix(a)


def lazy_metropolis(g: Graph) -> StochasticMatrix:
    """M' = I/2 + M/2."""
    m = metropolis(g).entries
    src, dst, w = g.arcs
    a = np.zeros((g.n, g.n))
    a[src, dst] = 0.5 * w
    a[np.arange(g.n), np.arange(g.n)] = 0.5 + 0.5 * np.diag(m)
    return StochasticMatrix(a, lazy=True)


def second_eigenvalue_bound(n: int) -> float:
    """Upper bound 1 - 1/(71 n^2) on the second eigenvalue of M'."""
    return 1.0 - 1.0 / (71.0 * n * n)


@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: np.ndarray
    lambda2: float
    gap_bound: float

    @property
    def margin(self) -> float:
        return self.gap_bound - self.lambda2


def spectral_report(m: StochasticMatrix | np.ndarray) -> SpectralReport:
    a = m.entries if isinstance(m, StochasticMatrix) else np.asarray(m, dtype=float)
    vals, _ = symmetric_eig(a, vectors=False)
    n = a.shape[0]
    lam2 = float(vals[1]) if n >= 2 else float("nan")
    return SpectralReport(vals, lam2, second_eigenvalue_bound(n))


# --- edge-list I/O ------------------------------------------------------------

def write_edgelist(g: Graph, path) -> None:
    lines = [f"{g.n} {g.m}"]
    lines += [f"{i + 1} {j + 1}" for i, j in g.edges]
    if g.coords is not None:
        lines += [f"{i + 1} {x!r} {y!r}" for i, (x, y) in enumerate(g.coords.tolist())]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_edgelist(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        rows = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise InvalidParameterError(f"{path}: empty edge list")
    n, m = int(rows[0][0]), int(rows[0][1])
    edge_rows = rows[1:1 + m]
    if len(edge_rows) != m or any(len(r) != 2 for r in edge_rows):
        raise InvalidParameterError(f"{path}: expected {m} edge lines of the form 'i j'")
    edges = [(int(a) - 1, int(b) - 1) for a, b in edge_rows]
    coord_rows = rows[1 + m:]
    coords = None
    if coord_rows:
        if len(coord_rows) != n or any(len(r) != 3 for r in coord_rows):
            raise InvalidParameterError(f"{path}: expected {n} coordinate lines 'i x y'")
        coords = np.zeros((n, 2))
        for r in coord_rows:
            coords[int(r[0]) - 1] = (float(r[1]), float(r[2]))
    return Graph.from_edges(n, edges, coords)

