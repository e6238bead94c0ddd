"""Clusters of link and loop percolation, reach estimators and the boundary-decay profile."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import beta as beta_dist

from . import _kernels
from .config import LinkConfig, Params
from .graph import Graph, box_boundary, build_box, vertex_distances
from .loops import LoopDecomposition
from .sampler import direct_arrays


class InvariantError(AssertionError):
    """A property that must hold on every sample was violated."""


class UnionFind:
    """Disjoint sets over ``0..size-1`` with path halving and union by size."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.size = [1] * size

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def labels(self) -> np.ndarray:
        return np.array([self.find(x) for x in range(len(self.parent))], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class ClusterStats:
    component_id: np.ndarray
    sizes: np.ndarray
    largest: int
    reached_radius: dict[int, int] = field(default_factory=dict)

    @classmethod
    def from_labels(cls, g: Graph, labels: np.ndarray, sources=()) -> "ClusterStats":
        _, ids, sizes = np.unique(labels, return_inverse=True, return_counts=True)
        reached = {}
        for s in sources:
            dist = vertex_distances(g, s)
            reached[int(s)] = int(dist[ids == ids[s]].max())
        return cls(ids.astype(np.int64), sizes, int(sizes.max(initial=0)), reached)

    def same(self, v: int, w: int) -> bool:
        return bool(self.component_id[v] == self.component_id[w])


def _edge_endpoints(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    return g.edge_array[:, 0].copy(), g.edge_array[:, 1].copy()


def open_labels(g: Graph, open_mask: np.ndarray) -> np.ndarray:
    labels = np.empty(g.vertex_count, np.int64)
    ea, eb = _edge_endpoints(g)
    _kernels.components(g.vertex_count, ea, eb, np.asarray(open_mask, np.bool_), labels)
    return labels


def clusters_from_edges(g: Graph, open_mask: np.ndarray, sources=()) -> ClusterStats:
    """Components of the subgraph of open edges."""
    open_mask = np.asarray(open_mask, bool)
    if open_mask.shape != (g.edge_count,):
        raise ValueError(f"open mask must have shape ({g.edge_count},)")
    return ClusterStats.from_labels(g, open_labels(g, open_mask), sources)


@dataclass(frozen=True, eq=False)
class LoopClusters:
    level1: ClusterStats
    overlap: ClusterStats


def clusters_from_loops(g: Graph, dec: LoopDecomposition, sources=()) -> LoopClusters:
    """The level-1 partition, and the coarser partition joining vertices sharing any recorded loop set."""
    label = np.array(dec.level1_label, dtype=np.int64)
    uf = UnionFind(g.vertex_count)
    for loop in dec.loops:
        first, *rest = sorted(loop.vertices)
        for v in rest:
            uf.union(first, v)
    return LoopClusters(
        ClusterStats.from_labels(g, label, sources),
        ClusterStats.from_labels(g, uf.labels(), sources),
    )


def clopper_pearson(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    alpha = 1 - level
    lo = 0.0 if successes == 0 else float(beta_dist.ppf(alpha / 2, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(beta_dist.ppf(1 - alpha / 2, successes + 1, trials - successes))
    return lo, hi


@dataclass(frozen=True)
class Estimate:
    estimate: float
    ci_low: float
    ci_high: float
    samples: int
    successes: int

    @classmethod
    def from_counts(cls, successes: int, samples: int) -> "Estimate":
        lo, hi = clopper_pearson(successes, samples)
        return cls(successes / samples if samples else float("nan"), lo, hi, samples, successes)


Draw = Callable[[], tuple[np.ndarray, np.ndarray]]


def direct_draw(g: Graph, p: Params, rng: np.random.Generator) -> Draw:
    """Exact theta = 1 sampler as a zero-argument callable returning (edges, signs)."""
    if p.theta != 1:
        raise ValueError("direct sampling needs theta = 1")
    return lambda: direct_arrays(g, p, rng)


def chain_draw(chain) -> Draw:
    """Draws from a :class:`~loopperc.sampler.MetropolisChain`, ``thin`` sweeps apart."""

    def draw():
        chain.burn_in()
        chain.sweep(chain.config.thin)
        c = chain.state
        return c.edge_indices, c.signs

    return draw


class _Reach:
    """Per-sample reach tests from a fixed source to a target vertex set."""

    def __init__(self, g: Graph, source: int, targets: np.ndarray):
        self.g = g
        self.source = source
        self.target = np.zeros(g.vertex_count, bool)
        self.target[targets] = True
        self.ea, self.eb = _edge_endpoints(g)
        self.seam = np.empty(g.vertex_count, np.int64)
        self.link = np.empty(g.vertex_count, np.int64)

    def __call__(self, edges: np.ndarray, signs: np.ndarray) -> tuple[bool, bool]:
        g = self.g
        n = edges.shape[0]
        _kernels.loop_structure(g.vertex_count, self.ea, self.eb, edges, signs, n, self.seam)
        opened = np.zeros(g.edge_count, np.bool_)
        opened[edges] = True
        _kernels.components(g.vertex_count, self.ea, self.eb, opened, self.link)
        s = self.source
        loop_hit = bool(np.any(self.target & (self.seam == self.seam[s])))
        link_hit = bool(np.any(self.target & (self.link == self.link[s])))
        return loop_hit, link_hit


def reach_samples(g: Graph, source: int, targets: np.ndarray, n_samples: int, draw: Draw) -> tuple[np.ndarray, np.ndarray]:
    """Paired per-sample indicators ``(loop_reach, link_reach)``.

    Raises :class:`InvariantError` if the loop class ever reaches a target its
    link cluster does not.
    """
    test = _Reach(g, source, targets)
    loop_hits = np.zeros(n_samples, bool)
    link_hits = np.zeros(n_samples, bool)
    for k in range(n_samples):
        loop_hits[k], link_hits[k] = test(*draw())
        if loop_hits[k] and not link_hits[k]:
            raise InvariantError(f"sample {k}: loop reach without link reach")
    return loop_hits, link_hits


def estimate_reach(g: Graph, source: int, radius: int, kind: str, n_samples: int, draw: Draw) -> Estimate:
    """Probability that the source's loop class (``kind='loop'``) or link cluster reaches distance ``radius``."""
    if kind not in ("loop", "link"):
        raise ValueError("kind must be 'loop' or 'link'")
    dist = vertex_distances(g, source)
    reachable = dist[dist != np.iinfo(np.int64).max]
    if radius > reachable.max():
        raise ValueError(f"radius {radius} exceeds the largest distance {reachable.max()} from {source}")
    targets = np.flatnonzero((dist >= radius) & (dist != np.iinfo(np.int64).max))
    loop_hits, link_hits = reach_samples(g, source, targets, n_samples, draw)
    hits = loop_hits if kind == "loop" else link_hits
    return Estimate.from_counts(int(hits.sum()), n_samples)


@dataclass(frozen=True)
class DecayRow:
    n: int
    loop: Estimate
    link: Estimate


@dataclass(frozen=True)
class DecayProfile:
    rows: tuple[DecayRow, ...]
    slope: float | None

    def csv_rows(self):
        yield ("n", "estimate", "ci_low", "ci_high", "samples")
        for r in self.rows:
            e = r.loop
            yield (r.n, e.estimate, e.ci_low, e.ci_high, e.samples)


def decay_profile(ns, p: Params, n_samples: int, rng: np.random.Generator, dimension: int = 2) -> DecayProfile:
    """Estimates of P(origin loop-connected to the boundary of the box of radius ``n``).

    Each ``n`` uses its own box of side ``2n + 1`` centered at the origin, with
    the boundary taken at L-infinity distance ``n``. Sampling is exact, so
    ``p.theta`` must be 1.
    """
    rows = []
    for n in ns:
        if n == 0:
            rows.append(DecayRow(0, Estimate.from_counts(n_samples, n_samples), Estimate.from_counts(n_samples, n_samples)))
            continue
        g = build_box(dimension, 2 * n + 1)
        center = (g.vertex_count - 1) // 2
        boundary = box_boundary(g, center, n)
        loop_hits, link_hits = reach_samples(g, center, boundary, n_samples, direct_draw(g, p, rng))
        rows.append(
            DecayRow(n, Estimate.from_counts(int(loop_hits.sum()), n_samples), Estimate.from_counts(int(link_hits.sum()), n_samples))
        )
    slope = None
    pts = [(r.n, r.loop.estimate) for r in rows if r.n > 0]
    if len(pts) >= 2 and all(est > 0 for _, est in pts):
        x, y = np.array(pts).T
        slope = float(np.polyfit(x, np.log(y), 1)[0])
    return DecayProfile(tuple(rows), slope)
