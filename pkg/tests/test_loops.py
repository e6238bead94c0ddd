import random

import numpy as np

from conftest import PATH4, REFERENCE, random_instance
from loopperc import _kernels
from loopperc.config import LinkConfig
from loopperc.graph import Graph, build_box
from loopperc.loops import _decompose_literal, connected_by_loop, decompose, seam_loop_vertices
from loopperc.oracle import naive_trace

EDGE = Graph.from_edges(2, [(0, 1)])


def test_empty_config_gives_singletons():
    g = build_box(2, 3)
    dec = decompose(g, LinkConfig())
    assert dec.total_loops == 9
    assert dec.level(1) == {frozenset({v}) for v in range(9)}
    assert not connected_by_loop(dec, 0, 1)
    assert connected_by_loop(dec, 4, 4)


def test_single_link():
    for s in (1, -1):
        dec = decompose(EDGE, LinkConfig(((0, s),)))
        assert dec.total_loops == 1 and dec.level(1) == {frozenset({0, 1})}


def test_two_crosses_give_two_seam_loops():
    dec = decompose(EDGE, LinkConfig(((0, 1), (0, 1))))
    assert dec.total_loops == 2
    assert dec.level(1) == {frozenset({0}), frozenset({1})}


def test_two_bars_give_a_confined_loop():
    dec = decompose(EDGE, LinkConfig(((0, -1), (0, -1))))
    assert dec.levels == {1: {frozenset({0, 1})}, 2: {frozenset({0, 1})}}


def test_reference_configuration():
    dec = decompose(PATH4, REFERENCE)
    assert dec.levels == {1: {frozenset({0, 1, 2, 3})}, 3: {frozenset({0, 1})}, 7: {frozenset({1, 2})}}
    low = dec.by_lowest_link()
    assert low[1].support == {0, 1, 2, 3}
    assert low[5].support == {1, 2}
    assert seam_loop_vertices(PATH4, REFERENCE, 2) == {0, 1, 2, 3}
    assert naive_trace(PATH4, REFERENCE).levels == dec.levels


def test_matches_literal_walk_and_arc_gluing(rng):
    for _ in range(400):
        g, c = random_instance(rng)
        dec = decompose(g, c)
        assert dec.levels == _decompose_literal(g, c)
        ref = naive_trace(g, c)
        assert dec.total_loops == ref.total_loops and set(dec.loops) == set(ref.loops)


def test_kernel_counts_and_seam_partition(rng):
    for _ in range(300):
        g, c = random_instance(rng)
        label = np.empty(g.vertex_count, np.int64)
        total = _kernels.loop_structure(
            g.vertex_count, g.edge_array[:, 0].copy(), g.edge_array[:, 1].copy(), c.edge_indices, c.signs, c.n, label
        )
        dec = decompose(g, c)
        assert total == dec.total_loops
        lab = dec.level1_label
        V = g.vertex_count
        assert all((label[a] == label[b]) == (lab[a] == lab[b]) for a in range(V) for b in range(V))


def test_insertion_changes_loop_count_by_at_most_one(rng):
    crosses_only = random.Random(3)
    for _ in range(300):
        g, c = random_instance(rng)
        L = decompose(g, c).total_loops
        pos = rng.randint(0, c.n)
        d = decompose(g, c.insert(pos, rng.randrange(g.edge_count), rng.choice((1, -1)))).total_loops - L
        assert abs(d) <= 1
        cc = LinkConfig(tuple((e, 1) for e, _ in c.links))
        L = decompose(g, cc).total_loops
        d = decompose(g, cc.insert(pos, crosses_only.randrange(g.edge_count), 1)).total_loops - L
        assert abs(d) == 1


def test_seam_sets_partition_vertices(rng):
    for _ in range(200):
        g, c = random_instance(rng)
        sets = decompose(g, c).level(1)
        assert sum(len(s) for s in sets) == g.vertex_count
        assert frozenset().union(*sets) == set(range(g.vertex_count))
