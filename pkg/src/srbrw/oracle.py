"""Exhaustive minimisation of the action on a small lattice.

Positions are restricted to ``x = eps (i / q + 1/2)``, ``|x| <= (w + 1/2) eps``;
for ``q = 1`` this is exactly the eps-grid. Two points interact when their
lattice indices differ by less than ``q``.

Only the multiset of positions of each generation matters: the cheapest way
to attach ``2m`` children to ``m`` parents under quadratic cost pairs the
sorted children ``2i, 2i + 1`` with the ``i``-th sorted parent. The search is
therefore a chain over generation multisets. The last generation is never
enumerated; it is minimised by a dynamic programme over its sorted entries,
batched over all parent multisets, whose state is the last position and the
counts at the ``q`` most recent lattice positions.
"""
from __future__ import annotations

import itertools
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .action import interaction_count
from .core import ModelParams, TreeProfile, is_smooth, occupation_from_positions
from .errors import BudgetExceeded, OffGrid

log = logging.getLogger(__name__)

MAX_ORACLE_DEPTH = 4
DEFAULT_BUDGET = 60_000_000


@dataclass(frozen=True)
class OracleConfig:
    """Lattice and budget for :func:`oracle_minimum`.

    Attributes
    ----------
    params : ModelParams
    window : int
        Half-width ``w`` in units of eps.
    refine : int
        Lattice refinement ``q``; the spacing is ``eps / q``.
    budget : int
        Cap on the size of any enumerated multiset family or cost table.
    """

    params: ModelParams
    window: int = 3
    refine: int = 1
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if not 1 <= self.params.N <= MAX_ORACLE_DEPTH:
            raise ValueError(f"oracle supports 1 <= N <= {MAX_ORACLE_DEPTH}")
        if self.window < 1 or self.refine < 1:
            raise ValueError("window and refine must be >= 1")

    @property
    def index_range(self) -> tuple[int, int]:
        q, w = self.refine, self.window
        return -q * (w + 1), q * w

    @property
    def n_points(self) -> int:
        lo, hi = self.index_range
        return hi - lo + 1

    def positions(self, idx) -> np.ndarray:
        """Lattice indices to positions (in units of eps, then scaled)."""
        return self.params.eps * (np.asarray(idx, dtype=float) / self.refine + 0.5)


@dataclass
class OracleResult:
    config: OracleConfig
    value: float
    argmin: list  # each entry: list of sorted position arrays, generations 1..N
    n_argmin_truncated: bool
    state_sizes: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def profiles(self) -> list[TreeProfile]:
        return [TreeProfile.from_generation_multisets(gens) for gens in self.argmin]

    @property
    def touches_window(self) -> bool:
        """Whether some minimiser reaches the edge of the lattice window."""
        lim = (self.config.window + 0.5) * self.config.params.eps
        return any(np.abs(g).max() >= lim - 1e-12 for gens in self.argmin for g in gens)


def _multisets(n_points: int, size: int, budget: int, label: str) -> np.ndarray:
    count = math.comb(n_points + size - 1, size)
    if count * size > budget:
        raise BudgetExceeded(f"{label}: {count} multisets of size {size}", size=count)
    if count == 0:
        return np.zeros((0, size), dtype=np.int64)
    flat = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations_with_replacement(range(n_points), size)),
        dtype=np.int64,
        count=count * size,
    )
    return flat.reshape(count, size)


def _pair_counts(rows: np.ndarray, q: int) -> np.ndarray:
    """Ordered interacting pairs for each sorted row of lattice offsets."""
    s = rows.shape[1]
    if s < 2:
        return np.zeros(rows.shape[0], dtype=np.int64)
    out = np.zeros(rows.shape[0], dtype=np.int64)
    for a in range(s - 1):
        out += np.sum(rows[:, a + 1:] - rows[:, a:a + 1] < q, axis=1)
    return 2 * out


def _transport_table(parents: np.ndarray, children: np.ndarray) -> np.ndarray:
    """``W`` for every (parent multiset, child multiset) pair via sorted matching."""
    pair_sum = children[:, 0::2] + children[:, 1::2]
    return 0.5 * (
        np.sum(children ** 2, axis=1)[None, :]
        + 2 * np.sum(parents ** 2, axis=1)[:, None]
        - 2 * parents @ pair_sum.T
    )


class _LastGenerationDP:
    """Minimise ``W(parent, child) + beta I(child)`` over sorted children, batched over parents.

    States after ``k`` children: ``(last index, counts at last-q+1 .. last)``.
    """

    def __init__(self, parent_pos: np.ndarray, n_points: int, coords: np.ndarray, q: int,
                 beta: float, eps: float, budget: int):
        self.parents = parent_pos  # (A, s) positions
        self.coords = coords  # position of each lattice offset
        self.n_points = n_points
        self.q = q
        self.beta_pair = 2.0 * beta  # one new unordered pair = two ordered pairs
        self.n_children = 2 * parent_pos.shape[1]
        self.budget = budget
        self.max_states = 0

    def _add(self, key, x):
        last, window = key
        q = self.q
        if x == last:
            new_pairs = sum(window)
            window = window[:-1] + (window[-1] + 1,)
        else:
            gap = x - last
            kept = window[gap:] if gap < q else ()
            new_pairs = sum(kept)
            window = kept + (0,) * (q - 1 - len(kept)) + (1,)
        return (x, window), new_pairs

    def run(self, keep_paths: bool = False):
        """Return the per-parent minimum (and the DP layers when ``keep_paths``)."""
        A = self.parents.shape[0]
        layers = []
        # first child
        par0 = self.parents[:, 0]
        frontier = {}
        for x in range(self.n_points):
            key = (x, (0,) * (self.q - 1) + (1,))
            frontier[key] = 0.5 * (self.coords[x] - par0) ** 2
        layers.append(frontier)
        for k in range(1, self.n_children):
            par = self.parents[:, k // 2]
            step_cost = [0.5 * (self.coords[x] - par) ** 2 for x in range(self.n_points)]
            nxt = {}
            for key, val in frontier.items():
                for x in range(key[0], self.n_points):
                    nkey, pairs = self._add(key, x)
                    cand = val + step_cost[x] + self.beta_pair * pairs
                    cur = nxt.get(nkey)
                    nxt[nkey] = cand if cur is None else np.minimum(cur, cand)
            frontier = nxt
            self.max_states = max(self.max_states, len(frontier))
            if len(frontier) * A > self.budget:
                raise BudgetExceeded(
                    f"last-generation DP: {len(frontier)} states x {A} parents", size=len(frontier) * A
                )
            layers.append(frontier)
        best = np.full(A, np.inf)
        for val in frontier.values():
            best = np.minimum(best, val)
        return (best, layers) if keep_paths else (best, None)

    def backtrack(self, layers, target: float, tol: float, limit: int) -> list[tuple[int, ...]]:
        """All optimal sorted child index sequences for a single parent (``A == 1``)."""
        results: list[tuple[int, ...]] = []

        def rec(k, key, remaining, seq):
            if len(results) >= limit:
                return
            if k == 0:
                results.append(tuple(reversed(seq)))
                return
            par = self.parents[0, k // 2]
            x = key[0]
            for pkey, pval in layers[k - 1].items():
                if pkey[0] > x:
                    continue
                nkey, pairs = self._add(pkey, x)
                if nkey != key:
                    continue
                step = 0.5 * (self.coords[x] - par) ** 2 + self.beta_pair * pairs
                if abs(float(pval[0]) + step - remaining) <= tol:
                    rec(k - 1, pkey, float(pval[0]), seq + [pkey[0]])

        last = layers[-1]
        for key, val in last.items():
            if abs(float(val[0]) - target) <= tol:
                rec(len(layers) - 1, key, float(val[0]), [key[0]])
        return results


def oracle_minimum(config: OracleConfig, max_argmin: int = 64) -> OracleResult:
    """Exact minimum of the action over lattice configurations, with all minimisers.

    Raises
    ------
    BudgetExceeded
        When a multiset family or DP table would exceed ``config.budget``.
    """
    t0 = time.perf_counter()
    p = config.params
    N, beta, eps, q = p.N, p.beta, p.eps, config.refine
    P = config.n_points
    coords = config.positions(np.arange(P) + config.index_range[0])
    sizes: dict = {}

    # enumerate generations 1 .. N-1
    fams, inter = [], []
    for n in range(1, N):
        rows = _multisets(P, 1 << n, config.budget, f"generation {n}")
        fams.append(rows)
        inter.append(beta * _pair_counts(rows, q))
        sizes[f"generation_{n}"] = rows.shape[0]

    # last generation, batched over its parents
    parents = coords[fams[-1]] if fams else np.zeros((1, 1))
    dp = _LastGenerationDP(parents, P, coords, q, beta, eps, config.budget)
    tail, _ = dp.run()
    sizes["last_generation_states"] = dp.max_states
    value_to_go = tail + (inter[-1] if fams else 0.0)

    # backward chain over enumerated generations
    togo = [None] * len(fams)
    if fams:
        togo[-1] = value_to_go
        for j in range(len(fams) - 2, -1, -1):
            A, B = fams[j].shape[0], fams[j + 1].shape[0]
            if A * B > config.budget:
                raise BudgetExceeded(f"transport table {A} x {B}", size=A * B)
            table = _transport_table(coords[fams[j]], coords[fams[j + 1]])
            togo[j] = inter[j] + np.min(table + togo[j + 1][None, :], axis=1)
        first = 0.5 * np.sum(coords[fams[0]] ** 2, axis=1) + togo[0]
        value = float(first.min())
    else:
        value = float(tail[0])

    tol = 1e-9 * max(1.0, abs(value))

    # forward: collect minimising chains of enumerated generations
    chains: list[list[int]] = []
    if fams:
        chains = [[int(i)] for i in np.flatnonzero(first <= value + tol)]
        for j in range(1, len(fams)):
            ext = []
            for ch in chains:
                prev = coords[fams[j - 1][ch[-1]]][None, :]
                row = _transport_table(prev, coords[fams[j]])[0] + togo[j]
                need = togo[j - 1][ch[-1]] - inter[j - 1][ch[-1]]
                for i in np.flatnonzero(np.abs(row - need) <= tol):
                    ext.append(ch + [int(i)])
            chains = ext[:max_argmin]

    argmin, truncated = [], False
    for ch in chains or [[]]:
        if fams:
            par = coords[fams[-1][ch[-1]]][None, :]
            target = float(tail[ch[-1]])
        else:
            par = np.zeros((1, 1))
            target = value
        single = _LastGenerationDP(par, P, coords, q, beta, eps, config.budget)
        _, layers = single.run(keep_paths=True)
        finals = single.backtrack(layers, target, tol, max_argmin)
        for fin in finals:
            gens = [coords[fams[j][ch[j]]] for j in range(len(ch))] + [coords[np.array(fin)]]
            argmin.append(gens)
            if len(argmin) >= max_argmin:
                truncated = True
                break
        if truncated:
            break
    elapsed = time.perf_counter() - t0
    log.info("oracle N=%d q=%d w=%d: value %.6g in %.2fs", N, q, config.window, value, elapsed)
    return OracleResult(config, value, argmin, truncated, sizes, elapsed)


@dataclass(frozen=True)
class StructuralReport:
    grid_supported: bool
    smooth: bool
    range_monotone: bool

    @property
    def all_hold(self) -> bool:
        return self.grid_supported and self.smooth and self.range_monotone


def verify_structural_claims(gens, eps: float) -> StructuralReport:
    """Check a minimiser: final generation on the eps-grid and smooth; ranges shrink backwards."""
    final = np.asarray(gens[-1])
    try:
        occ = occupation_from_positions(final, eps, len(gens))
        k = np.rint(final / eps - 0.5)
        on_grid = bool(np.allclose(final / eps - 0.5, k, atol=1e-9))
        smooth = on_grid and is_smooth(occ.counts)
    except OffGrid:
        on_grid, smooth = False, False
    spans = [float(np.ptp(g)) for g in gens]
    monotone = all(spans[i] <= spans[i + 1] + 1e-12 for i in range(len(spans) - 1))
    return StructuralReport(on_grid, smooth, monotone)


def action_of_generations(gens, params: ModelParams) -> float:
    """Action of a configuration given by its generation multisets (sorted matching)."""
    prof = TreeProfile.from_generation_multisets(gens)
    spr = 0.0
    for n in range(1, prof.depth + 1):
        spr += 0.5 * float(np.sum(prof.increments(n) ** 2))
    inter = sum(interaction_count(prof.generation(n), params.eps) for n in range(1, prof.depth + 1))
    return spr + params.beta * inter


def brute_force_minimum(config: OracleConfig) -> float:
    """Minimum over every assignment of lattice points to every node (tiny cases only).

    Unlike :func:`oracle_minimum` this makes no use of the multiset reduction;
    it exists to cross-check it.
    """
    p = config.params
    P = config.n_points
    n_nodes = (1 << (p.N + 1)) - 2
    if P ** n_nodes > config.budget:
        raise BudgetExceeded(f"{P}^{n_nodes} labellings", size=P ** n_nodes)
    coords = config.positions(np.arange(P) + config.index_range[0])
    labels = np.array(list(itertools.product(range(P), repeat=n_nodes)), dtype=np.int64)
    x = coords[labels]
    parent = np.zeros((labels.shape[0], 1))
    total = np.zeros(labels.shape[0])
    start = 0
    eps_q = config.refine
    for n in range(1, p.N + 1):
        gen = x[:, start:start + (1 << n)]
        total += 0.5 * np.sum((gen - np.repeat(parent, 2, axis=1)) ** 2, axis=1)
        idx = labels[:, start:start + (1 << n)]
        diff = np.abs(idx[:, :, None] - idx[:, None, :]) < eps_q
        total += p.beta * (diff.sum(axis=(1, 2)) - (1 << n))
        parent = gen
        start += 1 << n
    return float(total.min())
