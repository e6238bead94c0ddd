"""numba kernels for the hot paths: loop counting, blocking, clusters, MCMC, enumeration.

Configurations are passed as parallel arrays ``link_edge``/``link_sign`` of
which the first ``n`` entries are live. Edges are given by ``edge_a``/``edge_b``.
Hot loops index a single 2-D workspace instead of slicing: array views cost
reference-count traffic that dominates at these sizes.
"""

import numpy as np
from numba import njit

# workspace rows
DEG = 0
OFFSET = 1
SLOT = 2
PARENT = 3
SIZE = 4
WS_ROWS = 5


@njit(cache=True)
def _find(w, x):
    while w[PARENT, x] != x:
        w[PARENT, x] = w[PARENT, w[PARENT, x]]
        x = w[PARENT, x]
    return x


@njit(cache=True)
def _union(w, a, b):
    ra = _find(w, a)
    rb = _find(w, b)
    if ra == rb:
        return False
    if w[SIZE, ra] < w[SIZE, rb]:
        ra, rb = rb, ra
    w[PARENT, rb] = ra
    w[SIZE, ra] += w[SIZE, rb]
    return True


@njit(cache=True)
def count_loops(vertex_count, edge_a, edge_b, link_edge, link_sign, n, w):
    """Number of loops, by gluing the arcs of the vertices' time axes.

    Arc ``j`` of vertex ``v`` ends (from below) at the ``j``-th link touching
    ``v``; arc 0 wraps around the seam. ``w`` is a workspace of shape
    ``(WS_ROWS, >= max(|V|, 2n))``. Afterwards ``_find(w, w[OFFSET, v])``
    identifies the loop through ``v``'s seam arc when ``w[DEG, v] > 0``.
    """
    for v in range(vertex_count):
        w[DEG, v] = 0
        w[SLOT, v] = 0
    for i in range(n):
        e = link_edge[i]
        w[DEG, edge_a[e]] += 1
        w[DEG, edge_b[e]] += 1
    acc = 0
    isolated = 0
    for v in range(vertex_count):
        w[OFFSET, v] = acc
        acc += w[DEG, v]
        if w[DEG, v] == 0:
            isolated += 1
    for k in range(acc):
        w[PARENT, k] = k
        w[SIZE, k] = 1
    components = acc + isolated
    for i in range(n):
        e = link_edge[i]
        a = edge_a[e]
        b = edge_b[e]
        ja = w[SLOT, a]
        jb = w[SLOT, b]
        w[SLOT, a] = ja + 1
        w[SLOT, b] = jb + 1
        below_a = w[OFFSET, a] + ja
        above_a = w[OFFSET, a] + (ja + 1) % w[DEG, a]
        below_b = w[OFFSET, b] + jb
        above_b = w[OFFSET, b] + (jb + 1) % w[DEG, b]
        if link_sign[i] > 0:
            if _union(w, below_a, above_b):
                components -= 1
            if _union(w, below_b, above_a):
                components -= 1
        else:
            if _union(w, below_a, below_b):
                components -= 1
            if _union(w, above_a, above_b):
                components -= 1
    return components


@njit(cache=True)
def loop_structure(vertex_count, edge_a, edge_b, link_edge, link_sign, n, seam_label):
    """Loop count; ``seam_label[v]`` gets an id of the loop through ``v``'s seam (equal ids, same loop)."""
    w = np.empty((WS_ROWS, max(vertex_count, 2 * n, 1)), np.int64)
    total = count_loops(vertex_count, edge_a, edge_b, link_edge, link_sign, n, w)
    n_arcs = 2 * n
    for v in range(vertex_count):
        if w[DEG, v] == 0:
            seam_label[v] = n_arcs + v
        else:
            seam_label[v] = _find(w, w[OFFSET, v])
    return total


@njit(cache=True)
def blocking_mask(vertex_count, edge_a, edge_b, link_edge, link_sign, n, n_edges, out):
    """``out[e] = True`` iff edge ``e`` is blocking.

    An edge blocks when it holds exactly two crosses and the earlier one is the
    previous link at both endpoints when the later one is placed.
    """
    count = np.zeros(n_edges, np.int64)
    all_cross = np.ones(n_edges, np.bool_)
    consecutive = np.zeros(n_edges, np.bool_)
    prev = np.full(vertex_count, -1, np.int64)
    for i in range(n):
        e = link_edge[i]
        a = edge_a[e]
        b = edge_b[e]
        count[e] += 1
        if link_sign[i] < 0:
            all_cross[e] = False
        if count[e] == 2:
            k = prev[a]
            consecutive[e] = k >= 0 and k == prev[b] and link_edge[k] == e
        prev[a] = i
        prev[b] = i
    for e in range(n_edges):
        out[e] = count[e] == 2 and all_cross[e] and consecutive[e]


@njit(cache=True)
def components(vertex_count, edge_a, edge_b, open_mask, label):
    """Connected components of the open subgraph; ``label[v]`` is a root vertex."""
    w = np.empty((WS_ROWS, max(vertex_count, 1)), np.int64)
    for v in range(vertex_count):
        w[PARENT, v] = v
        w[SIZE, v] = 1
    for e in range(edge_a.shape[0]):
        if open_mask[e]:
            _union(w, edge_a[e], edge_b[e])
    for v in range(vertex_count):
        label[v] = _find(w, v)


@njit(cache=True)
def config_code(link_edge, link_sign, n, base):
    """Injective integer code of a configuration; -1 if it would overflow int64."""
    code = 0
    power = 1
    limit = 2**62
    for i in range(n):
        sym = 2 * link_edge[i] + (0 if link_sign[i] > 0 else 1)
        if power > limit // base:
            return -1
        code += (sym + 1) * power
        power *= base
    return code


# move kinds
INSERT = 0
DELETE = 1
FLIP = 2
SWAP = 3


@njit(cache=True)
def seed_rng(seed):
    np.random.seed(seed)


@njit(cache=True)
def _grow(a, size):
    out = np.empty(size, a.dtype)
    for k in range(a.shape[0]):
        out[k] = a[k]
    return out


@njit(cache=True)
def mcmc_sweeps(
    vertex_count, edge_a, edge_b, beta, u, theta, cum, le, ls, n, loops,
    n_records, steps_per_record, codes, lengths, loop_counts, base, accepted, proposed,
):
    """Run ``n_records * steps_per_record`` Metropolis-Hastings steps, recording after each block.

    The block length must not depend on the state, or the recorded states
    are biased. ``codes``/``lengths``/``loop_counts`` may have length 0 to
    skip recording. The numba RNG must be seeded by the caller. Returns the
    (possibly reallocated) link arrays and the final ``n`` and loop count.
    """
    n_edges = edge_a.shape[0]
    log_theta = np.log(theta)
    w_ins = cum[0]
    w_del = cum[1] - cum[0]
    te = np.empty(le.shape[0], np.int64)
    ts = np.empty(le.shape[0], np.int64)
    w = np.empty((WS_ROWS, max(vertex_count, 2 * le.shape[0], 1)), np.int64)
    for r in range(n_records):
        for step in range(steps_per_record):
            x = np.random.random() * cum[3]
            if x < cum[0]:
                kind = INSERT
            elif x < cum[1]:
                kind = DELETE
            elif x < cum[2]:
                kind = FLIP
            else:
                kind = SWAP
            proposed[kind] += 1
            if kind == INSERT:
                if n + 1 > le.shape[0]:
                    size = 2 * le.shape[0] + 8
                    le = _grow(le, size)
                    ls = _grow(ls, size)
                    te = _grow(te, size)
                    ts = _grow(ts, size)
                    w = np.empty((WS_ROWS, max(vertex_count, 2 * size)), np.int64)
                pos = np.random.randint(0, n + 1)
                e = np.random.randint(0, n_edges)
                s = 1 if np.random.random() < u else -1
                for k in range(pos):
                    te[k] = le[k]
                    ts[k] = ls[k]
                te[pos] = e
                ts[pos] = s
                for k in range(pos, n):
                    te[k + 1] = le[k]
                    ts[k + 1] = ls[k]
                new_loops = count_loops(vertex_count, edge_a, edge_b, te, ts, n + 1, w)
                ratio = beta * n_edges * w_del / ((n + 1) * w_ins) * np.exp((new_loops - loops) * log_theta)
                if ratio >= 1.0 or np.random.random() < ratio:
                    le, te = te, le
                    ls, ts = ts, ls
                    n += 1
                    loops = new_loops
                    accepted[kind] += 1
            elif kind == DELETE:
                if n == 0:
                    continue
                pos = np.random.randint(0, n)
                for k in range(pos):
                    te[k] = le[k]
                    ts[k] = ls[k]
                for k in range(pos + 1, n):
                    te[k - 1] = le[k]
                    ts[k - 1] = ls[k]
                new_loops = count_loops(vertex_count, edge_a, edge_b, te, ts, n - 1, w)
                ratio = n * w_ins / (beta * n_edges * w_del) * np.exp((new_loops - loops) * log_theta)
                if ratio >= 1.0 or np.random.random() < ratio:
                    le, te = te, le
                    ls, ts = ts, ls
                    n -= 1
                    loops = new_loops
                    accepted[kind] += 1
            elif kind == FLIP:
                if n == 0:
                    continue
                pos = np.random.randint(0, n)
                old = ls[pos]
                q_old = u if old > 0 else 1.0 - u
                q_new = 1.0 - q_old
                if q_new <= 0.0:
                    continue
                ls[pos] = -old
                new_loops = count_loops(vertex_count, edge_a, edge_b, le, ls, n, w)
                ratio = q_new / q_old * np.exp((new_loops - loops) * log_theta)
                if ratio >= 1.0 or np.random.random() < ratio:
                    loops = new_loops
                    accepted[kind] += 1
                else:
                    ls[pos] = old
            else:
                if n < 2:
                    continue
                pos = np.random.randint(0, n - 1)
                e0 = le[pos]
                s0 = ls[pos]
                le[pos] = le[pos + 1]
                ls[pos] = ls[pos + 1]
                le[pos + 1] = e0
                ls[pos + 1] = s0
                new_loops = count_loops(vertex_count, edge_a, edge_b, le, ls, n, w)
                ratio = np.exp((new_loops - loops) * log_theta)
                if ratio >= 1.0 or np.random.random() < ratio:
                    loops = new_loops
                    accepted[kind] += 1
                else:
                    le[pos + 1] = le[pos]
                    ls[pos + 1] = ls[pos]
                    le[pos] = e0
                    ls[pos] = s0
        if codes.shape[0] > 0:
            codes[r] = config_code(le, ls, n, base)
            lengths[r] = n
            loop_counts[r] = loops
    return le, ls, n, loops


@njit(cache=True)
def enumerate_length(vertex_count, edge_a, edge_b, n, far_index, far_base, loops, n_cross, open_bits, block_bits, far_code):
    """Statistics of all ``(2|E|)^n`` sequences of length ``n`` in odometer order.

    Sequence ``k`` has symbol ``(k // (2|E|)^i) % (2|E|)`` at position ``i``;
    symbol ``2e`` is a cross on ``e`` and ``2e + 1`` a double bar.
    ``far_index[e]`` is ``e``'s index within a distinguished edge subset, or -1;
    ``far_code`` receives the injective code of the restriction to that subset.
    """
    n_edges = edge_a.shape[0]
    alphabet = 2 * n_edges
    total = alphabet**n
    le = np.zeros(max(n, 1), np.int64)
    ls = np.ones(max(n, 1), np.int64)
    digits = np.zeros(max(n, 1), np.int64)
    w = np.empty((WS_ROWS, max(vertex_count, 2 * n, 1)), np.int64)
    blocked = np.empty(n_edges, np.bool_)
    for k in range(total):
        if k > 0:
            i = 0
            while True:
                digits[i] += 1
                if digits[i] < alphabet:
                    break
                digits[i] = 0
                i += 1
            for j in range(i + 1):
                le[j] = digits[j] // 2
                ls[j] = 1 if digits[j] % 2 == 0 else -1
        loops[k] = count_loops(vertex_count, edge_a, edge_b, le, ls, n, w)
        blocking_mask(vertex_count, edge_a, edge_b, le, ls, n, n_edges, blocked)
        cross = 0
        ob = 0
        bb = 0
        code = 0
        power = 1
        for i in range(n):
            e = le[i]
            if ls[i] > 0:
                cross += 1
            ob |= 1 << e
            f = far_index[e]
            if f >= 0:
                code += (2 * f + (0 if ls[i] > 0 else 1) + 1) * power
                power *= far_base
        for e in range(n_edges):
            if blocked[e]:
                bb |= 1 << e
        n_cross[k] = cross
        open_bits[k] = ob
        block_bits[k] = bb
        far_code[k] = code
