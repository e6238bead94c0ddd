"""Ground truth for small instances: exhaustive enumeration and an independent loop tracer."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import gammaln, logsumexp, xlogy
from scipy.stats import poisson

from . import _kernels
from .config import LinkConfig, Params
from .graph import Graph
from .loops import Loop, LoopDecomposition

MAX_SEQUENCES = 10**8
MATERIALIZE_LIMIT = 200_000


class GuardError(RuntimeError):
    """A size guard (enumeration or truncation) was tripped."""


def naive_trace(g: Graph, c: LinkConfig) -> LoopDecomposition:
    """Loops by cutting every time axis into arcs at its links and gluing arcs at the links.

    A cross glues the arc below the link on one side to the arc above it on
    the other; a double bar glues below to below and above to above. Each
    glued class is one loop. A loop containing a seam arc is a level-1 loop
    recorded by the vertices of its seam arcs; any other loop is classified
    by the lowest link it touches (1-based ``p`` gives level ``p + 1``) and
    recorded by that link's endpoints.
    """
    V = g.vertex_count
    n = c.n
    at: list[list[int]] = [[] for _ in range(V)]  # 1-based link positions per vertex
    for i, (e, _) in enumerate(c.links, 1):
        for x in g.edges[e]:
            at[x].append(i)

    # arcs are (v, j): arc j of v lies between at[v][j-1] and at[v][j]; arc 0 holds the seam
    parent: dict[tuple[int, int], tuple[int, int]] = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def join(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    for v in range(V):
        for j in range(max(len(at[v]), 1)):
            find((v, j))
    for i, (e, s) in enumerate(c.links, 1):
        a, b = g.edges[e]
        ja, jb = at[a].index(i), at[b].index(i)
        below_a, above_a = (a, ja), (a, (ja + 1) % len(at[a]))
        below_b, above_b = (b, jb), (b, (jb + 1) % len(at[b]))
        if s > 0:
            join(below_a, above_b)
            join(below_b, above_a)
        else:
            join(below_a, below_b)
            join(above_a, above_b)

    groups: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for arc in list(parent):
        groups.setdefault(find(arc), []).append(arc)

    loops = []
    for arcs in groups.values():
        support = frozenset(v for v, _ in arcs)
        touched = []
        for v, j in arcs:
            k = len(at[v])
            if k:
                touched.append(at[v][j])
                touched.append(at[v][(j - 1) % k])
        lowest = min(touched) if touched else None
        seam = frozenset(v for v, j in arcs if j == 0)
        if seam:
            loops.append(Loop(1, seam, support, None if lowest is None else lowest - 1))
        else:
            ends = frozenset(g.edges[c.links[lowest - 1][0]])
            loops.append(Loop(lowest + 1, ends, support, lowest - 1))
    loops.sort(key=lambda lp: (lp.level, min(lp.vertices)))
    return LoopDecomposition(V, n, tuple(loops))


def truncation_mass(g: Graph, p: Params, n_max: int) -> float:
    """Upper bound on the unnormalized weight of all configurations longer than ``n_max``.

    Uses ``theta^L <= theta^|V| * theta_hat^n`` (one link changes ``L`` by at
    most one) and sums the remaining Poisson series in closed form.
    """
    x = g.edge_count * p.beta * p.theta_hat
    if x == 0:
        return 0.0
    # sum_{k > n_max} x^k / k! = e^x * P(Poi(x) > n_max)
    tail = math.exp(x + poisson.logsf(n_max, x))
    return p.theta ** g.vertex_count * tail


@dataclass(frozen=True, eq=False)
class EnumerationTable:
    """Parameter-free statistics of every sequence of length ``<= n_max``."""

    graph: Graph
    n_max: int
    n: np.ndarray
    n_cross: np.ndarray
    loops: np.ndarray
    open_bits: np.ndarray
    block_bits: np.ndarray
    far_code: np.ndarray
    far_edges: tuple[int, ...]

    @property
    def size(self) -> int:
        return int(self.n.shape[0])

    def log_weights(self, p: Params) -> np.ndarray:
        n = self.n
        return (
            n * math.log(p.beta)
            - gammaln(n + 1)
            + xlogy(self.n_cross, p.u)
            + xlogy(n - self.n_cross, 1.0 - p.u)
            + self.loops * math.log(p.theta)
        )

    def codes(self) -> np.ndarray:
        """Injective codes matching :func:`config_code`, in table order."""
        E = self.graph.edge_count
        alphabet, base = 2 * E, 2 * E + 1
        out = []
        for n in range(self.n_max + 1):
            k = np.arange(alphabet**n, dtype=np.int64)
            code = np.zeros_like(k)
            for i in range(n):
                code += ((k // alphabet**i) % alphabet + 1) * base**i
            out.append(code)
        return np.concatenate(out)

    def config(self, index: int) -> LinkConfig:
        alphabet = 2 * self.graph.edge_count
        n = int(self.n[index])
        k = index - sum(alphabet**m for m in range(n))
        links = []
        for i in range(n):
            d = (k // alphabet**i) % alphabet
            links.append((d // 2, 1 if d % 2 == 0 else -1))
        return LinkConfig(tuple(links))


def sequence_count(g: Graph, n_max: int) -> int:
    alphabet = 2 * g.edge_count
    return sum(alphabet**n for n in range(n_max + 1))


@lru_cache(maxsize=16)
def enumeration_table(g: Graph, n_max: int, far_edges: tuple[int, ...] = ()) -> EnumerationTable:
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    total = sequence_count(g, n_max)
    if total > MAX_SEQUENCES:
        need = total * 27 / 2**20
        raise GuardError(
            f"{total} sequences exceed the enumeration guard of {MAX_SEQUENCES} "
            f"(about {need:.0f} MiB of tables); lower n_max or use a smaller graph"
        )
    if g.edge_count > 62:
        raise GuardError("enumeration supports at most 62 edges")
    far_base = 2 * len(far_edges) + 1
    if far_edges and n_max * math.log2(far_base) > 62:
        raise GuardError("restriction codes would overflow; lower n_max")
    far_index = np.full(g.edge_count, -1, np.int64)
    for k, e in enumerate(far_edges):
        far_index[e] = k
    ea = g.edge_array[:, 0].copy()
    eb = g.edge_array[:, 1].copy()
    parts = {k: [] for k in ("n", "n_cross", "loops", "open_bits", "block_bits", "far_code")}
    for n in range(n_max + 1):
        size = (2 * g.edge_count) ** n
        loops = np.empty(size, np.int64)
        n_cross = np.empty(size, np.int64)
        ob = np.empty(size, np.int64)
        bb = np.empty(size, np.int64)
        fc = np.empty(size, np.int64)
        _kernels.enumerate_length(g.vertex_count, ea, eb, n, far_index, far_base, loops, n_cross, ob, bb, fc)
        parts["n"].append(np.full(size, n, np.int64))
        parts["n_cross"].append(n_cross)
        parts["loops"].append(loops)
        parts["open_bits"].append(ob)
        parts["block_bits"].append(bb)
        parts["far_code"].append(fc)
    arrays = {k: np.concatenate(v) for k, v in parts.items()}
    for k in ("n", "n_cross", "loops"):
        arrays[k] = arrays[k].astype(np.int16)
    return EnumerationTable(graph=g, n_max=n_max, far_edges=tuple(far_edges), **arrays)


@dataclass(frozen=True, eq=False)
class EnumeratedDistribution:
    """Loop-model law on all sequences of length ``<= n_max``, renormalized.

    ``truncation_bound`` bounds the omitted mass relative to the retained
    mass; ``entries`` is only filled when the support is small enough.
    """

    table: EnumerationTable
    params: Params
    probabilities: np.ndarray
    truncation_bound: float
    entries: dict[LinkConfig, float] | None = field(default=None, repr=False)

    @property
    def n_max(self) -> int:
        return self.table.n_max

    def mask(self, predicate) -> np.ndarray:
        if isinstance(predicate, np.ndarray):
            return predicate.astype(bool)
        if self.entries is None:
            raise GuardError("callable predicates need a materialized distribution")
        t = self.table
        return np.array([bool(predicate(t.config(k))) for k in range(t.size)])


def enumerate_configs(g: Graph, p: Params, n_max: int, materialize_limit: int = MATERIALIZE_LIMIT) -> EnumeratedDistribution:
    table = enumeration_table(g, n_max)
    logw = table.log_weights(p)
    log_z = logsumexp(logw)
    prob = np.exp(logw - log_z)
    bound = truncation_mass(g, p, n_max) / math.exp(log_z)
    entries = None
    if table.size <= materialize_limit:
        entries = {table.config(k): float(prob[k]) for k in range(table.size)}
    return EnumeratedDistribution(table, p, prob, bound, entries)


def truncation_interval(p_joint: float, p_given: float, bound: float) -> tuple[float, float]:
    """Range of ``P(A and G) / P(G)`` consistent with up to ``bound`` omitted mass."""
    return p_joint / (p_given + bound), (p_joint + bound) / (p_given + bound)


def conditional_probability(
    dist: EnumeratedDistribution,
    event: Callable[[LinkConfig], bool] | np.ndarray,
    given: Callable[[LinkConfig], bool] | np.ndarray,
) -> tuple[float, float, float]:
    """``(estimate, low, high)`` for ``P(event | given)``; low/high account for truncation."""
    g_mask = dist.mask(given)
    a_mask = dist.mask(event) & g_mask
    p_given = float(dist.probabilities[g_mask].sum())
    p_joint = float(dist.probabilities[a_mask].sum())
    if p_given <= dist.truncation_bound:
        raise GuardError(
            f"conditioning mass {p_given:.3g} does not exceed the truncation bound "
            f"{dist.truncation_bound:.3g}; raise n_max"
        )
    lo, hi = truncation_interval(p_joint, p_given, dist.truncation_bound)
    return p_joint / p_given, lo, min(hi, 1.0)


def config_code(c: LinkConfig, g: Graph) -> int:
    """Injective integer code shared by the enumeration table and the samplers."""
    base = 2 * g.edge_count + 1
    code = 0
    for i, (e, s) in enumerate(c.links):
        code += (2 * e + (0 if s > 0 else 1) + 1) * base**i
    return code
