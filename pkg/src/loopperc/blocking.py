"""Blocking edges and the per-edge open / blocking / non-blocking-open indicators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .config import CROSS, LinkConfig, restrict
from .graph import Graph, neighborhood


@dataclass(frozen=True, eq=False)
class EdgeIndicators:
    open: np.ndarray
    blocking: np.ndarray
    nb: np.ndarray

    def check(self) -> None:
        if np.any(self.blocking & ~self.open):
            raise AssertionError("blocking edge that is not open")
        if np.any(self.nb != (self.open & ~self.blocking)):
            raise AssertionError("nb differs from open and not blocking")


def is_blocking(g: Graph, c: LinkConfig, e: int) -> bool:
    """Two links on ``e``, both crosses, and no link strictly between them on an edge touching ``e``."""
    g.check_edge(e)
    where = [i for i, (f, _) in enumerate(c.links) if f == e]
    if len(where) != 2:
        return False
    i, j = where
    if c.links[i][1] != CROSS or c.links[j][1] != CROSS:
        return False
    ends = set(g.edges[e])
    return all(not ends & set(g.edges[c.links[k][0]]) for k in range(i + 1, j))


def indicators(g: Graph, c: LinkConfig) -> EdgeIndicators:
    counts = np.bincount(c.edge_indices, minlength=g.edge_count) if c.n else np.zeros(g.edge_count, np.int64)
    opened = counts > 0
    blocked = np.zeros(g.edge_count, np.bool_)
    if c.n:
        _kernels.blocking_mask(
            g.vertex_count,
            g.edge_array[:, 0].copy(),
            g.edge_array[:, 1].copy(),
            c.edge_indices,
            c.signs,
            c.n,
            g.edge_count,
            blocked,
        )
    return EdgeIndicators(open=opened, blocking=blocked, nb=opened & ~blocked)


def is_blocking_local(g: Graph, c: LinkConfig, e: int) -> bool:
    """``is_blocking`` evaluated on the links of ``e`` and its adjacent edges only."""
    return is_blocking(g, restrict(c, neighborhood(g, e, 0, 1).members), e)


@dataclass(frozen=True)
class Confinement:
    """Loop-connected pairs not confined to one nb cluster.

    ``permissive`` lists pairs where no nb cluster is within one blocking edge of
    both ends; ``strict`` additionally rejects pairs that need a hop at both ends.
    """

    permissive: tuple[tuple[int, int], ...]
    strict: tuple[tuple[int, int], ...]


def seam_labels(g: Graph, c: LinkConfig) -> np.ndarray:
    """Level-1 loop class of every vertex (equal labels iff connected by a level-1 loop)."""
    label = np.empty(g.vertex_count, np.int64)
    _kernels.loop_structure(
        g.vertex_count, g.edge_array[:, 0].copy(), g.edge_array[:, 1].copy(), c.edge_indices, c.signs, c.n, label
    )
    return label


def confinement(g: Graph, c: LinkConfig, dist: np.ndarray, min_distance: int = 2, labels=None) -> Confinement:
    """Check every loop-connected pair at distance >= ``min_distance`` (``dist`` is the all-pairs distance matrix)."""
    ind = indicators(g, c)
    nb = np.empty(g.vertex_count, np.int64)
    _kernels.components(g.vertex_count, g.edge_array[:, 0].copy(), g.edge_array[:, 1].copy(), ind.nb, nb)
    if labels is None:
        labels = seam_labels(g, c)
    V = g.vertex_count
    own = np.zeros((V, V), bool)
    own[np.arange(V), nb] = True
    reach = own.copy()
    for e in np.flatnonzero(ind.blocking):
        a, b = g.edges[e]
        reach[a, nb[b]] = True
        reach[b, nb[a]] = True
    same = (labels[:, None] == labels[None, :]) & (dist >= min_distance)
    iu = np.triu(same, 1)
    if not iu.any():
        return Confinement((), ())
    r = reach.astype(np.float32)  # BLAS products count shared clusters
    o = own.astype(np.float32)
    shared = (r @ r.T) > 0
    direct = ((o @ r.T) > 0) | ((r @ o.T) > 0)
    bad = np.argwhere(iu & ~shared)
    bad_strict = np.argwhere(iu & ~direct)
    return Confinement(
        tuple((int(v), int(w)) for v, w in bad),
        tuple((int(v), int(w)) for v, w in bad_strict),
    )
