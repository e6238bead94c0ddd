"""Loop decomposition of a link configuration.

Each vertex carries a periodic time axis with slots ``1..n``; link ``i`` joins
the axes of its two endpoints at time ``i``. A walker with state
``(vertex, index, direction)`` follows an axis until it meets a link of its
vertex, jumps to the other endpoint, and keeps (cross) or reverses (double
bar) its direction. Level-1 loops are the ones that pass the periodic seam
between ``n`` and ``1``; they are recorded by the vertices at which they pass
it. A loop that never passes the seam is assigned to level ``m`` when its
lowest link is link ``m - 1``, and is recorded by that link's endpoints.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from functools import cached_property

from .config import LinkConfig
from .graph import Graph


@dataclass(frozen=True)
class Loop:
    level: int
    vertices: frozenset[int]
    support: frozenset[int]
    # 0-based position of the lowest link the loop touches; None if it touches none
    lowest_link: int | None


@dataclass(frozen=True)
class LoopDecomposition:
    vertex_count: int
    n_links: int
    loops: tuple[Loop, ...]

    @property
    def total_loops(self) -> int:
        return len(self.loops)

    @cached_property
    def levels(self) -> dict[int, frozenset[frozenset[int]]]:
        """Sparse map ``m -> L_m``; empty levels are absent."""
        out: dict[int, set[frozenset[int]]] = {}
        for loop in self.loops:
            out.setdefault(loop.level, set()).add(loop.vertices)
        return {m: frozenset(sets) for m, sets in sorted(out.items())}

    def level(self, m: int) -> frozenset[frozenset[int]]:
        return self.levels.get(m, frozenset())

    @cached_property
    def level1_label(self) -> tuple[int, ...]:
        """Index of the level-1 loop through each vertex's seam point."""
        label = [-1] * self.vertex_count
        k = 0
        for loop in self.loops:
            if loop.level == 1:
                for v in loop.vertices:
                    label[v] = k
                k += 1
        return tuple(label)

    def by_lowest_link(self) -> dict[int, Loop]:
        """Loops that avoid the seam, keyed by the 0-based position of their lowest link."""
        return {lp.lowest_link: lp for lp in self.loops if lp.level > 1}


def _positions(g: Graph, c: LinkConfig) -> list[list[int]]:
    pos: list[list[int]] = [[] for _ in range(g.vertex_count)]
    edges = g.edges
    for i, (e, _) in enumerate(c.links, 1):
        a, b = edges[e]
        pos[a].append(i)
        pos[b].append(i)
    return pos


class _Walker:
    """Compressed walker: jumps directly between the links of the active vertex.

    Every axis segment belongs to exactly one loop; ``seen`` marks segments
    of loops already found so that each loop is traced once.
    """

    def __init__(self, g: Graph, c: LinkConfig):
        self.n = c.n
        self.pos = _positions(g, c)
        ends = [g.edges[e] for e, _ in c.links]
        self.ends = ends
        self.signs = [s for _, s in c.links]
        self.seen = [[False] * max(len(p), 1) for p in self.pos]

    def other(self, v: int, i: int) -> int:
        a, b = self.ends[i - 1]
        return b if v == a else a

    def segment_into(self, v: int, i: int, d: int) -> int:
        # segment of v's axis traversed when arriving at link i moving in direction d
        slot = bisect_left(self.pos[v], i)
        return slot if d < 0 else (slot - 1) % len(self.pos[v])

    def next_down(self, v: int, i: int) -> int | None:
        # largest link position <= i at v
        p = self.pos[v]
        k = bisect_right(p, i)
        return p[k - 1] if k else None

    def next_up(self, v: int, i: int) -> int | None:
        p = self.pos[v]
        k = bisect_left(p, i)
        return p[k] if k < len(p) else None

    def seam_loop(self, v: int) -> Loop:
        """Walk from ``(v, n, -1)`` until the state returns; record seam passes."""
        n = self.n
        if not self.pos[v]:
            self.seen[v][0] = True
            return Loop(1, frozenset((v,)), frozenset((v,)), None)
        recorded = {v}
        support = {v}
        lowest = n + 1
        va, i, d = v, n, -1
        while True:
            p = self.next_down(va, i) if d < 0 else self.next_up(va, i)
            if p is None:
                # pass the seam: index wraps
                recorded.add(va)
                if d < 0:
                    if va == v:
                        break
                    i = n
                else:
                    i = 1
                continue
            self.seen[va][self.segment_into(va, p, d)] = True
            lowest = min(lowest, p)
            va = self.other(va, p)
            support.add(va)
            d *= self.signs[p - 1]
            i = p + d
            if i == n + 1:
                i = 1
                recorded.add(va)
            elif i == 0:
                i = n
                recorded.add(va)
                if va == v and d < 0:
                    break
        return Loop(1, frozenset(recorded), frozenset(support), lowest - 1)

    def level_loop(self, m: int, v: int) -> Loop | None:
        """Walk from ``(v, m-1, -1)``; ``None`` if the walk drops below link m-1 or hits the seam."""
        n = self.n
        start = m - 1
        w = self.other(v, start)
        if self.signs[start - 1] > 0:
            return None
        # the segment just above link m-1 at w; if seen, its loop was found before
        if self.seen[w][self.segment_into(w, start, -1)]:
            return None
        recorded = {v}
        support = {v}
        marks: list[tuple[int, int]] = [(v, self.segment_into(v, start, -1))]
        va, i, d = w, start + 1, 1
        recorded.add(va)
        support.add(va)
        while True:
            if d < 0:
                p = self.next_down(va, i)
                if p is None or p < start:
                    return None
                if p == start:
                    recorded.add(va)
                    if va == v:
                        break
            else:
                p = self.next_up(va, i)
                if p is None:
                    return None
            marks.append((va, self.segment_into(va, p, d)))
            va = self.other(va, p)
            support.add(va)
            d *= self.signs[p - 1]
            i = p + d
            if i == start - 1 or i == n + 1:
                return None
            if i == start or (i == m and d > 0):
                recorded.add(va)
                if va == v and i == start and d < 0:
                    break
        for x, s in marks:
            self.seen[x][s] = True
        return Loop(m, frozenset(recorded), frozenset(support), start - 1)


def decompose(g: Graph, c: LinkConfig) -> LoopDecomposition:
    """All loops of ``c`` with their levels, recorded vertex sets and supports."""
    walker = _Walker(g, c)
    loops: list[Loop] = []
    covered = [False] * g.vertex_count
    for v in range(g.vertex_count):
        if covered[v]:
            continue
        loop = walker.seam_loop(v)
        for x in loop.vertices:
            covered[x] = True
        loops.append(loop)
    for m in range(2, c.n + 1):
        a, b = walker.ends[m - 2]
        for v in (a, b):
            loop = walker.level_loop(m, v)
            if loop is not None:
                loops.append(loop)
                break
    return LoopDecomposition(g.vertex_count, c.n, tuple(loops))


def seam_loop_vertices(g: Graph, c: LinkConfig, v: int) -> frozenset[int]:
    """Vertices at which the loop through ``v``'s seam point passes the seam.

    This is the level-1 class of ``v``; tracing it alone costs the loop's length.
    """
    return _Walker(g, c).seam_loop(v).vertices


def connected_by_loop(dec: LoopDecomposition, v: int, w: int) -> bool:
    label = dec.level1_label
    return label[v] >= 0 and label[v] == label[w]


def loop_count(dec: LoopDecomposition) -> int:
    return dec.total_loops


def _decompose_literal(g: Graph, c: LinkConfig) -> dict[int, frozenset[frozenset[int]]]:
    """Step-by-step walk over every index, one start per vertex and level, no skipping.

    Quadratic; kept as a reference for tests. Walks close when the start
    state recurs.
    """
    n = c.n
    ends = [g.edges[e] for e, _ in c.links]
    signs = [s for _, s in c.links]
    out: dict[int, set[frozenset[int]]] = {}
    if n == 0:
        return {1: frozenset(frozenset((v,)) for v in range(g.vertex_count))}
    for v in range(g.vertex_count):
        rec = {v}
        va, i, d = v, n, -1
        while True:
            if va in ends[i - 1]:
                a, b = ends[i - 1]
                va = b if va == a else a
                d *= signs[i - 1]
            i += d
            if i == n + 1:
                i = 1
                rec.add(va)
            elif i == 0:
                i = n
                rec.add(va)
            if (va, i, d) == (v, n, -1):
                break
        out.setdefault(1, set()).add(frozenset(rec))
    for m in range(2, n + 1):
        for v in range(g.vertex_count):
            rec = {v}
            va, i, d = v, m - 1, -1
            while True:
                if va in ends[i - 1]:
                    a, b = ends[i - 1]
                    va = b if va == a else a
                    d *= signs[i - 1]
                i += d
                if i == n + 1 or i == m - 2:
                    rec = None
                    break
                if i == m - 1 or (i == m and d == 1):
                    rec.add(va)
                if (va, i, d) == (v, m - 1, -1):
                    break
            if rec is not None:
                out.setdefault(m, set()).add(frozenset(rec))
    return {m: frozenset(s) for m, s in sorted(out.items())}
