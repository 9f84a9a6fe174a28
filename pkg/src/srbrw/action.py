"""The action functional: Gaussian spreading cost plus the collision penalty."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ModelParams, OccupationProfile, TreeProfile

# Distances within this relative tolerance of eps count as exactly eps, so
# eps-spaced grid configurations stay penalty-free despite rounding.
EPS_RTOL = 1e-9


@dataclass(frozen=True)
class CostBreakdown:
    """Per-generation costs of a configuration.

    Attributes
    ----------
    spr_per_gen : tuple of float
        ``W_n`` for ``n = 0 .. N-1`` (cost of the step from ``n`` to ``n + 1``).
    interaction_per_gen : tuple of int
        Ordered colliding pairs ``I_n`` for ``n = 1 .. N``.
    beta : float
        Penalty per ordered colliding pair.
    """

    spr_per_gen: tuple
    interaction_per_gen: tuple
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "spr_per_gen", tuple(float(w) for w in self.spr_per_gen))
        object.__setattr__(self, "interaction_per_gen", tuple(int(i) for i in self.interaction_per_gen))

    @property
    def S_spr(self) -> float:
        return math.fsum(self.spr_per_gen)

    @property
    def J(self) -> int:
        return sum(self.interaction_per_gen)

    @property
    def S_total(self) -> float:
        return self.S_spr + self.beta * self.J

    @property
    def N(self) -> int:
        return len(self.interaction_per_gen)

    def as_dict(self) -> dict:
        return {
            "S_spr": self.S_spr,
            "J": self.J,
            "S_total": self.S_total,
            "spr_per_gen": list(self.spr_per_gen),
            "interaction_per_gen": list(self.interaction_per_gen),
        }


def spreading_increment_cost(profile: TreeProfile, n: int) -> float:
    """``W_n``: half the summed squared displacements from generation ``n`` to ``n + 1``."""
    if not 0 <= n < profile.depth:
        raise ValueError(f"n must lie in [0, {profile.depth - 1}]")
    a = profile.increments(n + 1)
    return 0.5 * math.fsum(a * a)


def interaction_count(positions, eps: float, rtol: float = EPS_RTOL) -> int:
    """Number of ordered pairs ``i != j`` with ``|x_i - x_j| < eps``.

    Sort-then-window, ``O(m log m)``. Pairs at distance ``eps`` (to relative
    precision ``rtol``) do not interact.
    """
    x = np.sort(np.asarray(positions, dtype=float).ravel())
    if x.size < 2:
        return 0
    reach = np.searchsorted(x, x + eps * (1.0 - rtol), side="left")
    unordered = int(np.sum(reach - np.arange(1, x.size + 1), dtype=np.int64))
    return 2 * unordered


def occupation_interaction(counts) -> int:
    """``sum_l a_l (a_l - 1)`` for counts on sites exactly eps apart."""
    c = np.asarray(counts, dtype=np.int64)
    if c.size == 0:
        return 0
    if int(c.max()) < (1 << 30) and int(c.sum()) < (1 << 31):
        return int(np.dot(c, c - 1))
    return sum(int(a) * (int(a) - 1) for a in c)


def interaction_from_occupation(occ: OccupationProfile) -> int:
    return occupation_interaction(occ.counts)


def total_action(profile: TreeProfile, params: ModelParams, rtol: float = EPS_RTOL) -> CostBreakdown:
    """Spreading cost, collision counts and total action of a tree profile."""
    if profile.depth != params.N:
        raise ValueError(f"profile depth {profile.depth} != N = {params.N}")
    spr = [spreading_increment_cost(profile, n) for n in range(params.N)]
    inter = [interaction_count(profile.generation(n), params.eps, rtol) for n in range(1, params.N + 1)]
    return CostBreakdown(spr, inter, params.beta)


def combine(parts: Sequence[CostBreakdown]) -> CostBreakdown:
    """Concatenate consecutive generation ranges into one breakdown."""
    beta = parts[0].beta
    spr, inter = [], []
    for p in parts:
        spr.extend(p.spr_per_gen)
        inter.extend(p.interaction_per_gen)
    return CostBreakdown(spr, inter, beta)
