"""Finite simple graphs, box generators and edge-distance neighborhoods."""

from __future__ import annotations

import itertools
import sys
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

# Sentinel for "no upper bound" / "unreachable". An int, so it compares with distances.
INF = sys.maxsize


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    """Immutable simple graph on vertices ``0..vertex_count-1``.

    ``edges[k]`` is the vertex pair of edge ``k`` (stored with ``u < v``);
    ``adjacency[v]`` lists ``(neighbor, edge_index)`` pairs.
    ``coords`` is set by the box generator and is ``None`` otherwise.
    """

    vertex_count: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[tuple[int, int], ...], ...] = field(repr=False)
    max_degree: int
    coords: np.ndarray | None = field(default=None, repr=False, compare=False)

    @classmethod
    def from_edges(
        cls, vertex_count: int, pairs: Iterable[Sequence[int]], coords: np.ndarray | None = None
    ) -> "Graph":
        edges: list[tuple[int, int]] = []
        seen: set[tuple[int, int]] = set()
        adj: list[list[tuple[int, int]]] = [[] for _ in range(vertex_count)]
        for pair in pairs:
            a, b = (int(x) for x in pair)
            if a == b:
                raise GraphError(f"self-loop at vertex {a}")
            if not (0 <= a < vertex_count and 0 <= b < vertex_count):
                raise GraphError(f"edge ({a}, {b}) outside 0..{vertex_count - 1}")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise GraphError(f"duplicate edge {key}")
            seen.add(key)
            idx = len(edges)
            edges.append(key)
            adj[a].append((b, idx))
            adj[b].append((a, idx))
        max_degree = max((len(nb) for nb in adj), default=0)
        return cls(
            vertex_count=vertex_count,
            edges=tuple(edges),
            adjacency=tuple(tuple(nb) for nb in adj),
            max_degree=max_degree,
            coords=coords,
        )

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @cached_property
    def edge_array(self) -> np.ndarray:
        """Edges as an ``(|E|, 2)`` int64 array."""
        arr = np.array(self.edges, dtype=np.int64)
        return arr.reshape(-1, 2)

    @cached_property
    def edge_neighbors(self) -> tuple[frozenset[int], ...]:
        """For each edge, the other edges sharing an endpoint with it."""
        out = []
        for k, (a, b) in enumerate(self.edges):
            nb = {f for _, f in self.adjacency[a]} | {f for _, f in self.adjacency[b]}
            nb.discard(k)
            out.append(frozenset(nb))
        return tuple(out)

    def check_edge(self, e: int) -> None:
        if not 0 <= e < len(self.edges):
            raise IndexError(f"edge index {e} out of range for {len(self.edges)} edges")

    def check_vertex(self, v: int) -> None:
        if not 0 <= v < self.vertex_count:
            raise IndexError(f"vertex {v} out of range for {self.vertex_count} vertices")


def build_box(dimension: int, side: int, periodic: bool = False) -> Graph:
    """Nearest-neighbor box ``{0..side-1}^dimension`` in Z^d.

    Vertices are numbered in C order of their coordinates, so vertex
    ``sum(x_k * side**(d-1-k))`` sits at ``x``.
    """
    if dimension < 1:
        raise GraphError("dimension must be >= 1")
    if side < 1:
        raise GraphError("side must be >= 1")
    if periodic and side < 3:
        raise GraphError("periodic boxes need side >= 3 to stay simple")
    shape = (side,) * dimension
    coords = np.array(list(itertools.product(range(side), repeat=dimension)), dtype=np.int64)
    coords = coords.reshape(-1, dimension)
    index = np.arange(side**dimension).reshape(shape)
    pairs = []
    for axis in range(dimension):
        if periodic:
            nxt = np.roll(index, -1, axis=axis)
            pairs.append(np.stack([index.ravel(), nxt.ravel()], axis=1))
        else:
            lo = np.take(index, range(side - 1), axis=axis)
            hi = np.take(index, range(1, side), axis=axis)
            pairs.append(np.stack([lo.ravel(), hi.ravel()], axis=1))
    all_pairs = np.concatenate(pairs) if pairs else np.empty((0, 2), dtype=np.int64)
    return Graph.from_edges(side**dimension, all_pairs.tolist(), coords=coords)


def build_from_edge_list(pairs: Sequence[Sequence[int]]) -> Graph:
    """Graph over the vertices ``0..max(label)`` mentioned in ``pairs``."""
    if not pairs:
        raise GraphError("edge list is empty")
    vertex_count = 1 + max(max(int(a), int(b)) for a, b in pairs)
    return Graph.from_edges(vertex_count, pairs)


def read_edge_list(path: str | Path) -> Graph:
    """Parse the ``u v`` per line text format; ``#`` starts a comment."""
    pairs = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"{path}:{lineno}: expected 'u v', got {line!r}")
        pairs.append((int(parts[0]), int(parts[1])))
    return build_from_edge_list(pairs)


def write_edge_list(g: Graph, path: str | Path) -> None:
    lines = [f"# {g.vertex_count} vertices, {g.edge_count} edges"]
    lines += [f"{a} {b}" for a, b in g.edges]
    Path(path).write_text("\n".join(lines) + "\n")


def vertex_distances(g: Graph, source: int) -> np.ndarray:
    """BFS graph distance from ``source``; unreachable vertices get ``INF``."""
    g.check_vertex(source)
    dist = np.full(g.vertex_count, INF, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w, _ in g.adjacency[v]:
            if dist[w] == INF:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def edge_distances(g: Graph, e: int) -> np.ndarray:
    """Line-graph distance from edge ``e`` to every edge (``INF`` if disconnected)."""
    g.check_edge(e)
    dist = np.full(g.edge_count, INF, dtype=np.int64)
    dist[e] = 0
    queue = deque([e])
    nbrs = g.edge_neighbors
    while queue:
        f = queue.popleft()
        for h in nbrs[f]:
            if dist[h] == INF:
                dist[h] = dist[f] + 1
                queue.append(h)
    return dist


def edge_distance(g: Graph, e: int, f: int) -> int:
    g.check_edge(f)
    return int(edge_distances(g, e)[f])


@dataclass(frozen=True)
class EdgeNeighborhood:
    """Edges whose line-graph distance from ``center`` lies in ``[lo, hi]``."""

    center: int
    lo: int
    hi: int
    members: frozenset[int]

    def __contains__(self, f: int) -> bool:
        return f in self.members

    def __len__(self) -> int:
        return len(self.members)


def neighborhood(g: Graph, e0: int, k: int, m: int = INF) -> EdgeNeighborhood:
    if k < 0 or k > m:
        raise GraphError(f"need 0 <= k <= m, got k={k}, m={m}")
    dist = edge_distances(g, e0)
    members = frozenset(int(f) for f in np.flatnonzero((dist >= k) & (dist <= m) & (dist != INF)))
    return EdgeNeighborhood(center=e0, lo=k, hi=m, members=members)


def box_boundary(g: Graph, center: int, radius: int) -> np.ndarray:
    """Vertices at L-infinity distance exactly ``radius`` from ``center`` (box graphs only)."""
    if g.coords is None:
        raise GraphError("box_boundary needs a graph built by build_box")
    linf = np.abs(g.coords - g.coords[center]).max(axis=1)
    return np.flatnonzero(linf == radius)


def all_pairs_distances(g: Graph) -> np.ndarray:
    """Dense matrix of graph distances (float, ``inf`` when disconnected)."""
    ea = g.edge_array
    A = csr_matrix((np.ones(len(ea)), (ea[:, 0], ea[:, 1])), shape=(g.vertex_count,) * 2)
    return shortest_path(A, directed=False, unweighted=True)
