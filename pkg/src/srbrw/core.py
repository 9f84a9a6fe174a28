"""Tree indexing and the two configuration representations.

Nodes of the truncated binary tree are addressed by ``(depth, index)`` where
``index`` encodes the multi-index ``z_1 ... z_n`` with ``z_1`` as the most
significant bit. The descendants of ``(n, j)`` at depth ``m`` therefore form
the contiguous block ``j << (m - n) ... ((j + 1) << (m - n)) - 1``.

Occupation profiles live on the global grid ``eps * (k + 1/2)``, ``k`` in Z.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ModelAssumptionError, NoParent, OffGrid

# Sites of the eps-grid sit at eps * (k + GRID_SHIFT).
GRID_SHIFT = 0.5

MAX_PROFILE_DEPTH = 40


def site_position(k, eps: float):
    """Position of grid site ``k`` (scalar or array)."""
    return eps * (np.asarray(k, dtype=float) + GRID_SHIFT)


@dataclass(frozen=True)
class ModelParams:
    """Tree depth ``N``, inverse temperature ``beta`` and repulsion range ``eps``.

    Construction refuses parameters with ``beta <= eps**2 / 2``, the regime
    in which minimisers need not have smooth occupation profiles.
    """

    N: int
    beta: float
    eps: float
    strict: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ModelAssumptionError(f"N must be an integer >= 1, got {self.N}")
        if not self.eps > 0:
            raise ModelAssumptionError(f"eps must be positive, got {self.eps}")
        if not self.beta >= 0:
            raise ModelAssumptionError(f"beta must be non-negative, got {self.beta}")
        if self.strict and not self.beta > self.eps ** 2 / 2:
            raise ModelAssumptionError(
                f"requires beta > eps^2/2 (beta={self.beta}, eps={self.eps})"
            )

    @classmethod
    def relaxed(cls, N: int, beta: float, eps: float) -> "ModelParams":
        """Parameters without the standing assumption; only the samplers accept these."""
        return cls(N, beta, eps, strict=False)

    def split(self, K: int) -> tuple[int, int]:
        """Return ``(M, K)`` with ``M = N - K`` the end of the Dirichlet phase."""
        return self.N - K, K


@dataclass(frozen=True, order=True)
class NodeId:
    depth: int
    index: int

    def __post_init__(self):
        if self.depth < 0 or not 0 <= self.index < (1 << self.depth):
            raise ValueError(f"invalid node ({self.depth}, {self.index})")

    def children(self) -> tuple["NodeId", "NodeId"]:
        return (
            NodeId(self.depth + 1, self.index << 1),
            NodeId(self.depth + 1, (self.index << 1) + 1),
        )

    def bits(self) -> tuple[int, ...]:
        """The multi-index ``(z_1, ..., z_depth)``."""
        n = self.depth
        return tuple((self.index >> (n - 1 - i)) & 1 for i in range(n))

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "NodeId":
        index = 0
        for b in bits:
            index = (index << 1) | int(b)
        return cls(len(bits), index)


def node_parent(node: NodeId) -> NodeId:
    if node.depth == 0:
        raise NoParent("the root has no parent")
    return NodeId(node.depth - 1, node.index >> 1)


def descendant_slice(n: int, index: int, m: int) -> slice:
    """Indices at depth ``m >= n`` of the descendants of node ``(n, index)``."""
    shift = m - n
    return slice(index << shift, (index + 1) << shift)


class TreeProfile:
    """Positions ``h`` on the truncated tree, one array of ``2**n`` reals per generation."""

    def __init__(self, values: Sequence[np.ndarray]):
        vals = [np.asarray(v, dtype=float) for v in values]
        if not vals:
            raise ValueError("a profile needs at least the root generation")
        for n, v in enumerate(vals):
            if v.shape != (1 << n,):
                raise ValueError(f"generation {n} must have {1 << n} entries, got {v.shape}")
        if len(vals) - 1 > MAX_PROFILE_DEPTH:
            raise ValueError(f"profile depth capped at {MAX_PROFILE_DEPTH}")
        for v in vals:
            v.setflags(write=False)
        self._values = tuple(vals)

    @property
    def depth(self) -> int:
        return len(self._values) - 1

    @property
    def values(self) -> tuple[np.ndarray, ...]:
        return self._values

    def generation(self, n: int) -> np.ndarray:
        return self._values[n]

    def __getitem__(self, node: NodeId) -> float:
        return float(self._values[node.depth][node.index])

    def increments(self, n: int) -> np.ndarray:
        """``a(z^(n)) = h(z^(n)) - h(z^(n-1))`` for all nodes at depth ``n >= 1``."""
        if n < 1:
            raise ValueError("increments are defined for depth >= 1")
        return self._values[n] - np.repeat(self._values[n - 1], 2)

    @classmethod
    def from_increments(cls, increments: Sequence[np.ndarray], root: float = 0.0) -> "TreeProfile":
        vals = [np.array([root], dtype=float)]
        for a in increments:
            vals.append(np.repeat(vals[-1], 2) + np.asarray(a, dtype=float))
        return cls(vals)

    @classmethod
    def from_generation_multisets(cls, multisets: Sequence[Sequence[float]], root: float = 0.0) -> "TreeProfile":
        """Build a profile from position multisets, one per generation ``1, 2, ...``.

        Children are attached to parents by monotone matching (the ``2i`` and
        ``2i+1`` sorted children go to the ``i``-th sorted parent), which is the
        cheapest attachment for the quadratic spreading cost.
        """
        return cls.extend_by_multisets(cls([np.array([root], dtype=float)]), multisets)

    @classmethod
    def extend_by_multisets(cls, base: "TreeProfile", multisets: Sequence[Sequence[float]]) -> "TreeProfile":
        """Append generations given as position multisets below ``base``."""
        vals = list(base.values)
        for ms in multisets:
            n = len(vals)
            ms = np.sort(np.asarray(ms, dtype=float))
            if ms.shape != (1 << n,):
                raise ValueError(f"generation {n} needs {1 << n} positions")
            parent_order = np.argsort(vals[-1], kind="stable")
            gen = np.empty(1 << n)
            gen[2 * parent_order] = ms[0::2]
            gen[2 * parent_order + 1] = ms[1::2]
            vals.append(gen)
        return cls(vals)

    def reflected(self) -> "TreeProfile":
        return TreeProfile([-v for v in self._values])

    def __repr__(self):
        return f"TreeProfile(depth={self.depth})"


@dataclass(frozen=True)
class OccupationProfile:
    """Integer occupation counts on consecutive grid sites for one generation.

    ``counts[i]`` particles sit at site ``offset + i``, i.e. at position
    ``eps * (offset + i + 1/2)``.
    """

    offset: int
    counts: np.ndarray = field(repr=False)
    generation: int

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("counts must be a non-empty 1-d array")
        if (c < 0).any():
            raise ValueError("counts must be non-negative")
        if c[0] < 1 or c[-1] < 1:
            raise ValueError("first and last counts must be >= 1 (no padding)")
        if int(c.sum()) != 1 << self.generation:
            raise ValueError(
                f"generation {self.generation} must hold {1 << self.generation} particles, got {int(c.sum())}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def L(self) -> int:
        """Range in sites."""
        return int(self.counts.size)

    @property
    def sites(self) -> np.ndarray:
        return self.offset + np.arange(self.counts.size)

    def positions(self, eps: float) -> np.ndarray:
        """Sorted particle positions (one entry per particle)."""
        return np.repeat(site_position(self.sites, eps), self.counts)

    def is_smooth(self) -> bool:
        return is_smooth(self.counts)

    def __eq__(self, other):
        if not isinstance(other, OccupationProfile):
            return NotImplemented
        return (
            self.offset == other.offset
            and self.generation == other.generation
            and np.array_equal(self.counts, other.counts)
        )

    def __hash__(self):
        return hash((self.offset, self.generation, self.counts.tobytes()))


def is_smooth(counts) -> bool:
    """Neighbouring sites differ by at most one particle, empty sites outside included."""
    c = np.concatenate(([0], np.asarray(counts, dtype=np.int64), [0]))
    return bool(np.all(np.abs(np.diff(c)) <= 1))


def bin_to_grid(positions, eps: float, tol: float = 0.25):
    """Nearest grid site for each position and the distance to it (in units of eps)."""
    x = np.asarray(positions, dtype=float) / eps - GRID_SHIFT
    k = np.rint(x).astype(np.int64)
    return k, np.abs(x - k)


def occupation_from_positions(positions, eps: float, generation: int) -> OccupationProfile:
    k, dist = bin_to_grid(positions, eps)
    if (dist > 0.25).any():
        i = int(np.argmax(dist))
        raise OffGrid(
            f"position {positions[i]!r} is {dist[i]:.3g} eps from the nearest grid site"
        )
    lo = int(k.min())
    counts = np.bincount(k - lo)
    return OccupationProfile(lo, counts, generation)


def occupation_of_generation(profile: TreeProfile, n: int, params: ModelParams) -> OccupationProfile:
    """Bin generation ``n`` of ``profile`` onto the eps-grid.

    Raises
    ------
    OffGrid
        If any particle is farther than ``eps / 4`` from every grid site.
    """
    return occupation_from_positions(profile.generation(n), params.eps, n)
