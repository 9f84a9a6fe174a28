"""Random-walk Metropolis on tree configurations and Monte Carlo partition estimates.

The target is the tilted law ``exp(-S)`` on increments, ``S = S_spr + beta J``.
A move picks a non-root node uniformly, perturbs its increment by a centred
Gaussian and rigidly shifts its whole subtree. The proposal is symmetric, so
a move is accepted with probability ``min(1, exp(-dS))``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .action import EPS_RTOL, CostBreakdown, interaction_count, total_action
from .core import ModelParams, TreeProfile, is_smooth, occupation_from_positions
from .errors import OffGrid

MAX_SAMPLER_DEPTH = 8
_BLOCK = 4096


def acceptance_probability(dS: float) -> float:
    return 1.0 if dS <= 0 else math.exp(-dS)


class ChainState:
    """Mutable configuration with cached per-generation costs."""

    def __init__(self, profile: TreeProfile, params: ModelParams):
        self.params = params
        self.N = params.N
        self.h = [np.array(v, dtype=float) for v in profile.values]
        self.a = [None] + [profile.increments(n).copy() for n in range(1, self.N + 1)]
        self.inter = [0] + [interaction_count(self.h[n], params.eps) for n in range(1, self.N + 1)]
        self.spr = 0.5 * math.fsum(float(np.dot(a, a)) for a in self.a[1:])
        self.n_nodes = (1 << (self.N + 1)) - 2

    @property
    def J(self) -> int:
        return sum(self.inter)

    @property
    def S(self) -> float:
        return self.spr + self.params.beta * self.J

    def node_of(self, k: int) -> tuple[int, int]:
        """Map ``k`` in ``[0, 2^(N+1) - 2)`` to a non-root node ``(depth, index)``."""
        n = (k + 2).bit_length() - 1
        return n, k + 2 - (1 << n)

    def propose(self, n: int, j: int, delta: float):
        """Cost change and new per-generation data for shifting the subtree of ``(n, j)``."""
        a_old = self.a[n][j]
        d_spr = 0.5 * ((a_old + delta) ** 2 - a_old ** 2)
        new_gens = []
        d_inter = 0
        for m in range(n, self.N + 1):
            sl = slice(j << (m - n), (j + 1) << (m - n))
            g = self.h[m].copy()
            g[sl] += delta
            c = interaction_count(g, self.params.eps)
            d_inter += c - self.inter[m]
            new_gens.append((g, c))
        return d_spr, d_inter, new_gens

    def apply(self, n: int, j: int, delta: float, d_spr: float, new_gens) -> None:
        self.a[n][j] += delta
        self.spr += d_spr
        for off, (g, c) in enumerate(new_gens):
            self.h[n + off] = g
            self.inter[n + off] = c

    def profile(self) -> TreeProfile:
        return TreeProfile(self.h)

    def costs(self) -> CostBreakdown:
        return total_action(self.profile(), self.params)


def metropolis_step(state: ChainState, k: int, delta: float, u: float) -> bool:
    """One Metropolis update at non-root node number ``k`` with uniform draw ``u``."""
    n, j = state.node_of(k)
    d_spr, d_inter, new_gens = state.propose(n, j, delta)
    dS = d_spr + state.params.beta * d_inter
    if u < acceptance_probability(dS):
        state.apply(n, j, delta, d_spr, new_gens)
        return True
    return False


@dataclass
class ChainResult:
    params: ModelParams
    n_steps: int
    accepted: int
    S_trace: np.ndarray
    final_samples: np.ndarray  # (n_recorded, 2^N) sorted final-generation positions
    state: ChainState

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / max(self.n_steps, 1)


def default_initial_profile(params: ModelParams) -> TreeProfile:
    """Dirichlet solution with the standard boundary at depth ``N`` (collision-free start)."""
    from .dirichlet import solve_recursive, standard_boundary

    return solve_recursive(standard_boundary(params.N, params.eps)).profile


def run_chain(
    params: ModelParams,
    n_steps: int,
    seed: int = 0,
    step_size: float = 0.5,
    thin: int = 100,
    init: TreeProfile | None = None,
) -> ChainResult:
    """Run random-walk Metropolis for ``n_steps`` single-node updates.

    Randomness comes from one ``numpy.random.Generator`` seeded with ``seed``;
    equal seeds give identical chains.
    """
    if not 1 <= params.N <= MAX_SAMPLER_DEPTH:
        raise ValueError(f"sampler capped at N={MAX_SAMPLER_DEPTH}")
    if n_steps < 0 or thin < 1:
        raise ValueError("n_steps must be >= 0 and thin >= 1")
    rng = np.random.default_rng(seed)
    state = ChainState(init if init is not None else default_initial_profile(params), params)
    S_trace, samples = [], []
    accepted = 0
    done = 0
    while done < n_steps:
        b = min(_BLOCK, n_steps - done)
        ks = rng.integers(0, state.n_nodes, size=b)
        deltas = rng.normal(0.0, step_size, size=b)
        us = rng.random(size=b)
        for i in range(b):
            accepted += metropolis_step(state, int(ks[i]), float(deltas[i]), float(us[i]))
            if (done + i + 1) % thin == 0:
                S_trace.append(state.S)
                samples.append(np.sort(state.h[-1]))
        done += b
    width = 1 << params.N
    return ChainResult(
        params,
        n_steps,
        accepted,
        np.asarray(S_trace),
        np.asarray(samples).reshape(-1, width),
        state,
    )


# --- exact kernel on a small lattice -----------------------------------------

def lattice_transition_matrix(params: ModelParams, points) -> tuple[np.ndarray, np.ndarray]:
    """Metropolis kernel on configurations whose increments take values in ``points``.

    A move picks a non-root node uniformly and steps its increment to a
    neighbouring lattice value (each direction with probability 1/2; moves
    off the lattice are rejected). Acceptance uses :func:`acceptance_probability`
    with the exact action.

    Returns
    -------
    P : ndarray
        Row-stochastic transition matrix.
    pi : ndarray
        Normalised ``exp(-S)`` over the same states.
    """
    pts = np.asarray(points, dtype=float)
    N = params.N
    n_nodes = (1 << (N + 1)) - 2
    states = list(itertools.product(range(pts.size), repeat=n_nodes))
    index = {s: i for i, s in enumerate(states)}

    def action(s):
        incs, pos = [], 0
        for n in range(1, N + 1):
            incs.append(pts[list(s[pos:pos + (1 << n)])])
            pos += 1 << n
        return total_action(TreeProfile.from_increments(incs), params).S_total

    S = np.array([action(s) for s in states])
    P = np.zeros((len(states), len(states)))
    for i, s in enumerate(states):
        for node in range(n_nodes):
            for step in (-1, 1):
                v = s[node] + step
                if not 0 <= v < pts.size:
                    continue
                t = s[:node] + (v,) + s[node + 1:]
                jdx = index[t]
                P[i, jdx] += acceptance_probability(S[jdx] - S[i]) / (2 * n_nodes)
        P[i, i] = 1.0 - P[i].sum()
    w = np.exp(-(S - S.min()))
    return P, w / w.sum()


def detailed_balance_residual(P: np.ndarray, pi: np.ndarray) -> float:
    flow = pi[:, None] * P
    return float(np.max(np.abs(flow - flow.T)))


# --- partition function -------------------------------------------------------

@dataclass(frozen=True)
class PartitionEstimate:
    Z_hat: float
    std_err: float
    n_samples: int


def _batch_interaction(x: np.ndarray, eps: float) -> np.ndarray:
    """Ordered collision counts for each row of ``x``."""
    B, m = x.shape
    if m < 2:
        return np.zeros(B, dtype=np.int64)
    xs = np.sort(x, axis=1)
    span = float(np.ptp(xs)) + 4 * eps
    flat = (xs + span * np.arange(B)[:, None]).ravel()
    reach = np.searchsorted(flat, flat + eps * (1.0 - EPS_RTOL), side="left")
    per = (reach - np.arange(1, flat.size + 1)).reshape(B, m)
    return 2 * per.sum(axis=1)


def sample_collision_counts(N: int, eps: float, n_samples: int, rng: np.random.Generator,
                            batch: int = 65536) -> np.ndarray:
    """Collision local time ``J`` of independent untilted branching random walks."""
    out = np.empty(n_samples, dtype=np.int64)
    done = 0
    while done < n_samples:
        b = min(batch, n_samples - done)
        h = np.zeros((b, 1))
        J = np.zeros(b, dtype=np.int64)
        for _ in range(N):
            h = np.repeat(h, 2, axis=1) + rng.standard_normal((b, h.shape[1] * 2))
            J += _batch_interaction(h, eps)
        out[done:done + b] = J
        done += b
    return out


def estimate_partition(params: ModelParams, n_samples: int, seed: int = 0) -> PartitionEstimate:
    """Plain Monte Carlo ``Z = E[exp(-beta J)]`` under the branching random walk.

    The standard error is the sample standard deviation over ``sqrt(n)``; it is
    zero when every sample has the same weight (for instance ``beta = 0``).
    """
    if n_samples < 2:
        raise ValueError("need at least two samples")
    rng = np.random.default_rng(seed)
    J = sample_collision_counts(params.N, params.eps, n_samples, rng)
    w = np.exp(-params.beta * J)
    return PartitionEstimate(float(w.mean()), float(w.std(ddof=1) / math.sqrt(n_samples)), n_samples)


def merge_estimates(estimates) -> PartitionEstimate:
    """Inverse-variance weighted combination; zero-variance estimates dominate."""
    ests = list(estimates)
    if not ests:
        raise ValueError("nothing to merge")
    n = sum(e.n_samples for e in ests)
    exact = [e for e in ests if e.std_err == 0]
    if exact:
        return PartitionEstimate(float(np.mean([e.Z_hat for e in exact])), 0.0, n)
    w = np.array([1.0 / e.std_err ** 2 for e in ests])
    z = np.array([e.Z_hat for e in ests])
    return PartitionEstimate(float(np.dot(w, z) / w.sum()), float(1.0 / math.sqrt(w.sum())), n)


def partition_function_one_generation(beta: float, eps: float) -> float:
    """Exact ``Z`` for ``N = 1``: ``1 - (1 - e^(-2 beta)) erf(eps / 2)``."""
    return 1.0 - (1.0 - math.exp(-2 * beta)) * float(erf(eps / 2))


# --- empirical shape ----------------------------------------------------------

@dataclass(frozen=True)
class EmpiricalProfile:
    mean_range: float
    histogram: np.ndarray
    bin_edges: np.ndarray
    smooth_fraction: float
    on_grid_fraction: float


def empirical_profile(samples: np.ndarray, eps: float, n_bins: int | None = None) -> EmpiricalProfile:
    """Summaries of recorded final generations.

    ``mean_range`` is the average spread ``(max - min) / eps + 1`` in sites;
    ``smooth_fraction`` counts samples that lie within ``eps / 4`` of the grid
    and have a smooth occupation profile there.
    """
    samples = np.atleast_2d(samples)
    if samples.size == 0:
        raise ValueError("no samples")
    ranges = np.ptp(samples, axis=1) / eps + 1
    lo, hi = float(samples.min()), float(samples.max())
    bins = n_bins or max(1, int(math.ceil((hi - lo) / eps)) + 1)
    hist, edges = np.histogram(samples.ravel(), bins=bins, range=(lo - eps / 2, hi + eps / 2))
    gen = int(round(math.log2(samples.shape[1])))
    on_grid = smooth = 0
    for row in samples:
        try:
            occ = occupation_from_positions(row, eps, gen)
        except OffGrid:
            continue
        on_grid += 1
        smooth += is_smooth(occ.counts)
    k = samples.shape[0]
    return EmpiricalProfile(float(ranges.mean()), hist / k, edges, smooth / k, on_grid / k)
