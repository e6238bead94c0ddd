"""Samplers for link configurations: exact at theta = 1, Metropolis-Hastings otherwise."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .config import CROSS, DOUBLE_BAR, LinkConfig, Params, log_weight
from .graph import Graph
from .loops import decompose

DEFAULT_SEED = 20240531
MOVES = ("insert", "delete", "sign_flip", "adjacent_swap")


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = DEFAULT_SEED
    burn_in: int = 1000
    thin: int = 10
    move_weights: tuple[float, float, float, float] = (0.35, 0.35, 0.15, 0.15)

    def __post_init__(self):
        w = self.move_weights
        if len(w) != 4 or any(x < 0 for x in w):
            raise ValueError("move_weights needs four nonnegative entries")
        if w[0] <= 0 or w[1] <= 0:
            raise ValueError("insert and delete weights must be positive")
        if self.burn_in < 0 or self.thin < 1:
            raise ValueError("burn_in must be >= 0 and thin >= 1")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def direct_arrays(g: Graph, p: Params, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Edge and sign arrays of one exact theta = 1 sample."""
    counts = rng.poisson(p.beta, g.edge_count)
    edges = np.repeat(np.arange(g.edge_count, dtype=np.int64), counts)
    edges = rng.permutation(edges)
    signs = np.where(rng.random(edges.shape[0]) < p.u, CROSS, DOUBLE_BAR).astype(np.int64)
    return edges, signs


def sample_direct_theta1(g: Graph, p: Params, rng: np.random.Generator) -> LinkConfig:
    """Poisson(beta) links per edge, uniformly interleaved, iid signs."""
    if p.theta != 1:
        raise ValueError("direct sampling is exact only for theta = 1; use MetropolisChain")
    return LinkConfig.from_arrays(*direct_arrays(g, p, rng))


def sample_bernoulli(g: Graph, prob: float, rng: np.random.Generator) -> np.ndarray:
    if not 0.0 <= prob <= 1.0:
        raise ValueError(f"prob must lie in [0, 1], got {prob}")
    return rng.random(g.edge_count) < prob


def _loops(g: Graph, c: LinkConfig) -> int:
    return decompose(g, c).total_loops


def mcmc_step(
    state: LinkConfig,
    g: Graph,
    p: Params,
    rng: np.random.Generator,
    move_weights: tuple[float, float, float, float] = SamplerConfig.move_weights,
) -> LinkConfig:
    """One Metropolis-Hastings move (reference implementation; chains use the compiled kernel)."""
    w = np.asarray(move_weights, float)
    kind = rng.choice(4, p=w / w.sum())
    n = state.n
    if kind == 0:
        pos = int(rng.integers(0, n + 1))
        e = int(rng.integers(0, g.edge_count))
        s = CROSS if rng.random() < p.u else DOUBLE_BAR
        new = state.insert(pos, e, s)
    elif kind == 1:
        if n == 0:
            return state
        new = state.delete(int(rng.integers(0, n)))
    elif kind == 2:
        if n == 0:
            return state
        pos = int(rng.integers(0, n))
        e, s = state[pos]
        new = LinkConfig(state.links[:pos] + ((e, -s),) + state.links[pos + 1 :])
    else:
        if n < 2:
            return state
        pos = int(rng.integers(0, n - 1))
        links = list(state.links)
        links[pos], links[pos + 1] = links[pos + 1], links[pos]
        new = LinkConfig(tuple(links))
    ratio = _acceptance(state, new, kind, g, p, w)
    if ratio >= 1 or rng.random() < ratio:
        return new
    return state


def _acceptance(x: LinkConfig, y: LinkConfig, kind: int, g: Graph, p: Params, w: np.ndarray) -> float:
    d_loops = _loops(g, y) - _loops(g, x)
    tilt = p.theta**d_loops
    if kind == 0:
        return p.beta * g.edge_count * w[1] / (y.n * w[0]) * tilt
    if kind == 1:
        return x.n * w[0] / (p.beta * g.edge_count * w[1]) * tilt
    if kind == 2:
        (pos,) = [i for i in range(x.n) if x[i] != y[i]]
        q_old = p.u if x[pos][1] == CROSS else 1 - p.u
        if q_old == 0:
            return 1.0
        return (1 - q_old) / q_old * tilt
    return tilt


def _proposals(x: LinkConfig, g: Graph, p: Params, w: np.ndarray):
    """All ``(y, kind, proposal probability)`` paths out of ``x``."""
    w = w / w.sum()
    n = x.n
    for pos in range(n + 1):
        for e in range(g.edge_count):
            for s, q in ((CROSS, p.u), (DOUBLE_BAR, 1 - p.u)):
                if q > 0:
                    yield x.insert(pos, e, s), 0, w[0] * q / ((n + 1) * g.edge_count)
    for pos in range(n):
        yield x.delete(pos), 1, w[1] / n
        e, s = x[pos]
        yield LinkConfig(x.links[:pos] + ((e, -s),) + x.links[pos + 1 :]), 2, w[2] / n
    for pos in range(n - 1):
        links = list(x.links)
        links[pos], links[pos + 1] = links[pos + 1], links[pos]
        yield LinkConfig(tuple(links)), 3, w[3] / (n - 1)


def transition_probability(
    x: LinkConfig,
    y: LinkConfig,
    g: Graph,
    p: Params,
    move_weights: tuple[float, float, float, float] = SamplerConfig.move_weights,
) -> float:
    """Exact one-step probability of moving from ``x`` to ``y != x``, summed over proposal paths."""
    w = np.asarray(move_weights, float)
    total = 0.0
    for z, kind, q in _proposals(x, g, p, w):
        if z == y:
            total += q * min(1.0, _acceptance(x, z, kind, g, p, w))
    return total


@dataclass
class ChainStats:
    proposed: np.ndarray = field(default_factory=lambda: np.zeros(4, np.int64))
    accepted: np.ndarray = field(default_factory=lambda: np.zeros(4, np.int64))

    def acceptance_rates(self) -> dict[str, float]:
        return {
            name: float(a / pr) if pr else float("nan")
            for name, a, pr in zip(MOVES, self.accepted, self.proposed)
        }


class MetropolisChain:
    """A single Metropolis-Hastings chain targeting the loop-weighted link measure.

    The chain owns its ``Generator``; each compiled block is seeded from it, so
    a chain's output depends only on ``SamplerConfig.seed``.
    """

    def __init__(self, g: Graph, p: Params, config: SamplerConfig = SamplerConfig(), initial: LinkConfig | None = None):
        self.graph = g
        self.params = p
        self.config = config
        self.rng = config.rng()
        self._ea = g.edge_array[:, 0].copy()
        self._eb = g.edge_array[:, 1].copy()
        self._cum = np.cumsum(np.asarray(config.move_weights, float))
        init = initial or LinkConfig()
        init.validate(g)
        cap = max(16, 2 * init.n)
        self._le = np.zeros(cap, np.int64)
        self._ls = np.ones(cap, np.int64)
        self._le[: init.n] = init.edge_indices
        self._ls[: init.n] = init.signs
        self._n = init.n
        self._loops = _loops(g, init)
        self.stats = ChainStats()
        self.burned = False

    @property
    def state(self) -> LinkConfig:
        return LinkConfig.from_arrays(self._le[: self._n], self._ls[: self._n])

    @property
    def loop_count(self) -> int:
        return self._loops

    @property
    def sweep_length(self) -> int:
        """Steps per sweep: ``max(|E|, ceil(beta |E|))``, fixed so that recording times are state-free."""
        E = self.graph.edge_count
        return max(E, math.ceil(self.params.beta * E))

    def _run(self, n_records: int, sweeps: int, codes, lengths, loops) -> None:
        _kernels.seed_rng(int(self.rng.integers(0, 2**63 - 1)))
        p = self.params
        self._le, self._ls, self._n, self._loops = _kernels.mcmc_sweeps(
            self.graph.vertex_count, self._ea, self._eb, p.beta, p.u, p.theta, self._cum,
            self._le, self._ls, self._n, self._loops, n_records, sweeps * self.sweep_length,
            codes, lengths, loops, 2 * self.graph.edge_count + 1,
            self.stats.accepted, self.stats.proposed,
        )

    def sweep(self, count: int = 1) -> None:
        empty = np.empty(0, np.int64)
        self._run(1, count, empty, empty, empty)

    def burn_in(self) -> None:
        if not self.burned and self.config.burn_in:
            self.sweep(self.config.burn_in)
        self.burned = True

    def record(self, n_samples: int) -> dict[str, np.ndarray]:
        """Burn in if needed, then record ``n_samples`` states ``thin`` sweeps apart.

        Returns arrays ``code`` (see :func:`loopperc.oracle.config_code`, -1 when
        too long to encode), ``n`` and ``loops``.
        """
        self.burn_in()
        codes = np.empty(n_samples, np.int64)
        lengths = np.empty(n_samples, np.int64)
        loops = np.empty(n_samples, np.int64)
        if n_samples:
            self._run(n_samples, self.config.thin, codes, lengths, loops)
        return {"code": codes, "n": lengths, "loops": loops}

    def samples(self, n_samples: int):
        """Yield ``n_samples`` configurations ``thin`` sweeps apart."""
        self.burn_in()
        for _ in range(n_samples):
            self.sweep(self.config.thin)
            yield self.state


def chain_seeds(seed: int, chains: int) -> list[int]:
    """Independent per-chain seeds derived from one master seed."""
    return [int(s.generate_state(1, np.uint64)[0] >> np.uint64(1)) for s in np.random.SeedSequence(seed).spawn(chains)]


def integrated_autocorrelation(x, window_factor: float = 5.0) -> float:
    """Integrated autocorrelation time ``1 + 2 sum rho(t)`` with the self-consistent window ``t <= c tau``."""
    x = np.asarray(x, float)
    n = x.size
    if n < 2 or x.var() == 0:
        return 1.0
    y = x - x.mean()
    f = np.fft.rfft(y, 2 * n)
    acf = np.fft.irfft(f * np.conj(f))[:n]
    acf /= acf[0]
    tau = 2 * np.cumsum(acf) - 1
    for t in range(1, n):
        if t >= window_factor * tau[t]:
            return float(tau[t])
    return float(tau[-1])


def log_target(c: LinkConfig, g: Graph, p: Params) -> float:
    return log_weight(c, p, _loops(g, c))
