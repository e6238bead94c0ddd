"""The blocking-domination bound delta, the no-percolation threshold test, the
monotone coupling of binary vectors and an exact check of the domination claim."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .config import Params
from .graph import Graph, edge_distances, INF
from .oracle import enumeration_table, truncation_interval, truncation_mass

VARIANTS = ("proof", "theorem_statement")


@dataclass(frozen=True)
class DeltaInputs:
    beta: float
    u: float
    theta: float
    K: int

    def __post_init__(self):
        Params(self.beta, self.u, self.theta)  # validates the shared ranges
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")

    @property
    def params(self) -> Params:
        return Params(self.beta, self.u, self.theta)


def delta(d: DeltaInputs, variant: str = "proof") -> float:
    """Bernoulli parameter dominated by the blocking-edge process.

    ``proof``: 1/2 (u th_c / K)^2 * b th_c^3 / (b th_c^3 + 3 * 4^(K+1)) * (b+ / (e^b+ - 1))^(2K-1)
    ``theorem_statement``: the same with u/th_c in place of u th_c and b/th_c^3 in place of b th_c^3,
    where th_c = min(theta, 1/theta) and b+ = max(theta, 1/theta) * beta.
    """
    p = d.params
    tc, K = p.theta_check, d.K
    if variant == "proof":
        amp, drive = p.u * tc, d.beta * tc**3
    elif variant == "theorem_statement":
        amp, drive = p.u / tc, d.beta / tc**3
    else:
        raise ValueError(f"variant must be one of {VARIANTS}")
    bp = p.beta_plus
    tail = bp / math.expm1(bp)
    return 0.5 * (amp / K) ** 2 * drive / (drive + 3 * 4 ** (K + 1)) * tail ** (2 * K - 1)


def f_helper(beta_plus: float, k_open: int) -> float:
    """``((e^b - 1) / b)^(2 k_open - 1)``."""
    if not beta_plus > 0:
        raise ValueError("beta_plus must be > 0")
    return (math.expm1(beta_plus) / beta_plus) ** (2 * k_open - 1)


def theorem2_condition(beta: float, u: float, K: int, p_c: float) -> bool:
    """``(1 - e^-beta)(1 - delta(beta, u, 1)) < p_c``, delta in the proof variant."""
    return -math.expm1(-beta) * (1 - delta(DeltaInputs(beta, u, 1.0, K))) < p_c


def theorem2_threshold(u: float, K: int, p_c: float) -> float:
    """The beta at which the no-percolation condition stops holding."""
    if not 0 < p_c < 1:
        raise ValueError("p_c must lie in (0, 1)")

    def gap(b):
        return -math.expm1(-b) * (1 - delta(DeltaInputs(b, u, 1.0, K))) - p_c

    lo = -math.log1p(-p_c)  # root when delta = 0; the true root lies above
    hi = 2 * lo + 1
    while gap(hi) < 0:
        hi *= 2
    return brentq(gap, lo, hi, xtol=1e-14, rtol=1e-15)


# ---------------------------------------------------------------- coupling

class CouplingError(ValueError):
    pass


CondFn = Callable[[int, tuple[int, ...]], float]


@dataclass(frozen=True)
class CouplingTable:
    """Joint law of ``(X, Y)`` on ``{0,1}^N x {0,1}^N`` with ``X >= Y`` componentwise."""

    N: int
    joint: dict[tuple[tuple[int, ...], tuple[int, ...]], float]

    def marginal(self, which: int) -> dict[tuple[int, ...], float]:
        out: dict[tuple[int, ...], float] = {}
        for pair, q in self.joint.items():
            out[pair[which]] = out.get(pair[which], 0.0) + q
        return out

    def marginal_x(self):
        return self.marginal(0)

    def marginal_y(self):
        return self.marginal(1)

    def dominance_holds(self) -> bool:
        return all(all(a >= b for a, b in zip(x, y)) for (x, y), q in self.joint.items() if q > 0)


def build_coupling(cond_x: CondFn, cond_y: CondFn, N: int, tol: float = 1e-15) -> CouplingTable:
    """Sequential monotone coupling of two binary vectors given by their conditionals.

    ``cond_x(k, prefix)`` is ``P(X_k = 1 | X_1..X_{k-1} = prefix)`` for ``k = 1..N``,
    likewise ``cond_y`` with ``Y``'s own prefix. At step ``k`` the pair is drawn
    from (1,1): q, (1,0): p - q, (0,0): 1 - p, (0,1): 0 with ``p = cond_x``,
    ``q = cond_y``. This needs ``p >= q`` at every reachable pair of prefixes.
    """
    if not 1 <= N <= 20:
        raise ValueError("N must lie in 1..20")
    level: dict[tuple[tuple[int, ...], tuple[int, ...]], float] = {((), ()): 1.0}
    for k in range(1, N + 1):
        nxt = {}
        for (a, b), mass in level.items():
            px = float(cond_x(k, a))
            py = float(cond_y(k, b))
            if not (0 <= py <= 1 and 0 <= px <= 1):
                raise CouplingError(f"conditional outside [0, 1] at step {k}: x={px}, y={py}")
            if px < py - tol:
                raise CouplingError(
                    f"P(X_{k}=1 | X={a}) = {px} < P(Y_{k}=1 | Y={b}) = {py}; no monotone coupling step"
                )
            py = min(py, px)
            for (ea, eb), m in (((1, 1), py), ((1, 0), px - py), ((0, 0), 1 - px)):
                if m > 0:
                    nxt[(a + (ea,), b + (eb,))] = mass * m
        level = nxt
    return CouplingTable(N, level)


def product_law(cond: CondFn, N: int) -> dict[tuple[int, ...], float]:
    """Law of a binary vector from its sequential conditionals, by brute force."""
    out = {}
    for x in np.ndindex(*(2,) * N):
        q = 1.0
        for k in range(1, N + 1):
            p1 = cond(k, tuple(x[: k - 1]))
            q *= p1 if x[k - 1] else 1 - p1
        out[tuple(int(v) for v in x)] = q
    return out


def up_sets(N: int) -> np.ndarray:
    """Bitmasks (over the points of ``{0,1}^N`` in index order) of all increasing subsets.

    Exhaustive over all ``2^(2^N)`` subsets, so only for ``N <= 4``.
    """
    if N > 4:
        raise ValueError("exhaustive up-set enumeration only for N <= 4")
    points = 1 << N
    masks = np.arange(1 << points, dtype=np.int64)
    ok = np.ones(masks.shape, bool)
    for x in range(points):
        for j in range(N):
            if not x >> j & 1:
                y = x | 1 << j
                has_x = (masks >> x) & 1
                has_y = (masks >> y) & 1
                ok &= ~((has_x == 1) & (has_y == 0))
    return masks[ok]


def event_probabilities(law: dict[tuple[int, ...], float], masks: np.ndarray, N: int) -> np.ndarray:
    """``P(vector in A)`` for each subset bitmask; point ``x`` has index ``sum x_j 2^j``."""
    probs = np.zeros(1 << N)
    for x, q in law.items():
        probs[sum(v << j for j, v in enumerate(x))] += q
    bits = (masks[:, None] >> np.arange(1 << N)) & 1
    return bits @ probs


# ------------------------------------------------------- exact verification

@dataclass(frozen=True)
class DominationReport:
    min_conditional: float
    min_lower: float
    delta: float
    gap: float
    truncation_bound: float
    patterns_checked: int
    verdict: str
    n_max: int
    K: int
    worst_pattern: tuple | None

    def to_dict(self) -> dict:
        return {
            "min_conditional": self.min_conditional,
            "min_lower": self.min_lower,
            "delta": self.delta,
            "gap": self.gap,
            "truncation_bound": self.truncation_bound,
            "patterns_checked": self.patterns_checked,
            "verdict": self.verdict,
            "n_max": self.n_max,
            "K": self.K,
        }


def verify_theorem1_exact(g: Graph, e0: int, p: Params, n_max: int, K: int | None = None) -> DominationReport:
    """Exact conditional blocking probabilities of ``e0`` against ``delta``.

    Works under the law conditioned on every edge carrying a link. The
    conditioning patterns are the blocking indicators of the edges at
    distance 1 or 2 from ``e0`` together with the full link sequence on the
    edges at distance >= 2. Each conditional is bracketed by the truncation
    interval; the verdict is ``verified`` when every lower end is >= delta,
    ``violated`` when some upper end is < delta, and ``inconclusive`` otherwise.
    """
    g.check_edge(e0)
    K = g.max_degree if K is None else K
    dist = edge_distances(g, e0)
    near = tuple(int(f) for f in np.flatnonzero((dist >= 1) & (dist <= 2)))
    far = tuple(int(f) for f in np.flatnonzero((dist >= 2) & (dist != INF)))
    table = enumeration_table(g, n_max, far)
    d = delta(DeltaInputs(p.beta, p.u, p.theta, K))

    logw = table.log_weights(p)
    shift = logw.max()
    w = np.exp(logw - shift)
    total = w.sum()
    bound = truncation_mass(g, p, n_max) / (total * math.exp(shift))

    full = (1 << g.edge_count) - 1
    given = table.open_bits == full
    near_mask = sum(1 << f for f in near)
    near_bits = table.block_bits[given] & near_mask
    codes = table.far_code[given]
    hit = (table.block_bits[given] >> e0) & 1
    wg = w[given] / total

    keys = np.stack([near_bits, codes], axis=1)
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.ravel()
    p_given = np.bincount(inv, weights=wg, minlength=len(uniq))
    p_joint = np.bincount(inv, weights=wg * hit, minlength=len(uniq))
    point = p_joint / p_given
    lo, hi = truncation_interval(p_joint, p_given, bound)
    hi = np.minimum(hi, 1.0)

    worst = int(np.argmin(lo))
    if np.all(lo >= d):
        verdict = "verified"
    elif np.any(hi < d):
        verdict = "violated"
    else:
        verdict = "inconclusive"
    return DominationReport(
        min_conditional=float(point.min()),
        min_lower=float(lo.min()),
        delta=d,
        gap=float(point.min() - d),
        truncation_bound=float(bound),
        patterns_checked=int(len(uniq)),
        verdict=verdict,
        n_max=n_max,
        K=K,
        worst_pattern=(int(uniq[worst, 0]), int(uniq[worst, 1])),
    )
