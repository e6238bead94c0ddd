"""Link configurations, model parameters and the unnormalized configuration weight."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .graph import Graph

CROSS = 1
DOUBLE_BAR = -1


@dataclass(frozen=True)
class Params:
    beta: float
    u: float
    theta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if not 0.0 <= self.u <= 1.0:
            raise ValueError(f"u must lie in [0, 1], got {self.u}")
        if not self.theta > 0:
            raise ValueError(f"theta must be > 0, got {self.theta}")

    @property
    def theta_hat(self) -> float:
        return max(self.theta, 1.0 / self.theta)

    @property
    def theta_check(self) -> float:
        return min(self.theta, 1.0 / self.theta)

    @property
    def beta_plus(self) -> float:
        return self.theta_hat * self.beta


@dataclass(frozen=True)
class LinkConfig:
    """Ordered sequence of ``(edge_index, sign)`` links; sign +1 is a cross, -1 a double bar.

    Positions are 0-based in Python. The loop algorithm refers to link ``i``
    (1-based) as ``links[i - 1]``.
    """

    links: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        for e, s in self.links:
            if s not in (CROSS, DOUBLE_BAR):
                raise ValueError(f"sign must be +1 or -1, got {s}")
            if e < 0:
                raise ValueError(f"negative edge index {e}")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[int]]) -> "LinkConfig":
        return cls(tuple((int(e), int(s)) for e, s in pairs))

    @classmethod
    def from_arrays(cls, edges: np.ndarray, signs: np.ndarray) -> "LinkConfig":
        return cls(tuple(zip(map(int, edges), map(int, signs))))

    def __len__(self) -> int:
        return len(self.links)

    def __iter__(self):
        return iter(self.links)

    def __getitem__(self, i):
        return self.links[i]

    @property
    def n(self) -> int:
        return len(self.links)

    @cached_property
    def edge_indices(self) -> np.ndarray:
        return np.array([e for e, _ in self.links], dtype=np.int64)

    @cached_property
    def signs(self) -> np.ndarray:
        return np.array([s for _, s in self.links], dtype=np.int64)

    @property
    def n_cross(self) -> int:
        return sum(1 for _, s in self.links if s == CROSS)

    @property
    def n_bar(self) -> int:
        return self.n - self.n_cross

    def validate(self, g: Graph) -> None:
        for e, _ in self.links:
            g.check_edge(e)

    def insert(self, pos: int, edge: int, sign: int) -> "LinkConfig":
        return LinkConfig(self.links[:pos] + ((edge, sign),) + self.links[pos:])

    def delete(self, pos: int) -> "LinkConfig":
        return LinkConfig(self.links[:pos] + self.links[pos + 1 :])

    def to_json(self) -> str:
        return json.dumps({"links": [list(link) for link in self.links]})

    @classmethod
    def from_json(cls, text: str) -> "LinkConfig":
        return cls.from_pairs(json.loads(text)["links"])


def edge_counts(c: LinkConfig, g: Graph) -> np.ndarray:
    """Number of links on each edge."""
    return np.bincount(c.edge_indices, minlength=g.edge_count)


def restrict(c: LinkConfig, subset: Iterable[int]) -> LinkConfig:
    """Subsequence of links lying on ``subset``, order preserved."""
    keep = set(subset)
    return LinkConfig(tuple(link for link in c.links if link[0] in keep))


def _xlogy(k: int, x: float) -> float:
    # k * log(x) with the convention 0 * log(0) = 0
    if k == 0:
        return 0.0
    return k * math.log(x) if x > 0 else -math.inf


def log_weight(c: LinkConfig, p: Params, loop_count: int) -> float:
    """Log of ``beta^n / n! * u^n_cross * (1-u)^n_bar * theta^L`` (unnormalized).

    ``loop_count`` must be the total number of loops of ``c``. Returns
    ``-inf`` when a link sign has probability zero (u in {0, 1}).
    """
    n = c.n
    n_cross = c.n_cross
    return (
        n * math.log(p.beta)
        - math.lgamma(n + 1)
        + _xlogy(n_cross, p.u)
        + _xlogy(n - n_cross, 1.0 - p.u)
        + loop_count * math.log(p.theta)
    )


def log_weight_odds(c: LinkConfig, p: Params, loop_count: int) -> float:
    """Equivalent weight using ``(u/(1-u))^(sum(s)/2)``; only valid for 0 < u < 1.

    Differs from :func:`log_weight` by ``n/2 * log(u(1-u))``, which depends on
    ``n`` only and so is absorbed into the normalization at fixed ``n``.
    """
    if not 0.0 < p.u < 1.0:
        raise ValueError("odds form needs 0 < u < 1")
    n = c.n
    half_sum = 0.5 * int(c.signs.sum()) if n else 0.0
    return (
        n * math.log(p.beta)
        - math.lgamma(n + 1)
        + half_sum * math.log(p.u / (1.0 - p.u))
        + loop_count * math.log(p.theta)
    )
