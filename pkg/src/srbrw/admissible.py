"""Admissible staircase configurations and the optimal trajectory.

An admissible occupation vector of generation ``n`` ramps ``1, 2, ..., r``,
holds ``r`` for ``d`` further sites and ramps back down, with
``r (r + 1) + d r = 2**n``. The optimal trajectory follows the standard
Dirichlet solution up to generation ``M = N - K``, where every particle has
its own grid site, and then doubles and smooths the staircase once per
generation until ``r = 2**K`` at generation ``N``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .action import CostBreakdown, interaction_count, occupation_interaction
from .core import ModelParams, OccupationProfile, TreeProfile, is_smooth, occupation_of_generation
from .dirichlet import DirichletSolution, solve_recursive, standard_boundary
from .errors import Infeasible, NotRepresentable, ShapeMismatch, DegenerateRegime

# Largest Dirichlet depth for which full position profiles are built.
DIRICHLET_PROFILE_CAP = 22


def staircase_counts(r: int, d: int) -> np.ndarray:
    ramp = np.arange(1, r + 1, dtype=np.int64)
    return np.concatenate([ramp, np.full(d, r, dtype=np.int64), ramp[::-1]])


@dataclass(frozen=True)
class AdmissibleShape:
    """Occupation vector of generation ``n`` placed with its left end at grid site ``offset``.

    Shapes produced by :func:`build_admissible` and staircase evolution are
    exact (``exact=True``): ramp width ``r``, plateau width ``d`` and
    ``r (r + 1) + d r = 2**n``. :func:`restricted_minimiser` may return an
    inexact shape whose plateau mixes heights ``r`` and ``r + 1``.
    """

    r: int
    d: int
    n: int
    counts: np.ndarray = field(repr=False)
    offset: int = 0
    lambda_star: Optional[float] = None
    exact: bool = True

    @property
    def L(self) -> int:
        return int(self.counts.size)

    def occupation(self) -> OccupationProfile:
        return OccupationProfile(self.offset, self.counts, self.n)

    def placed(self, offset: int) -> "AdmissibleShape":
        return AdmissibleShape(self.r, self.d, self.n, self.counts, offset, self.lambda_star, self.exact)

    def interaction(self) -> int:
        return occupation_interaction(self.counts)

    def is_smooth(self) -> bool:
        return is_smooth(self.counts)

    def __eq__(self, other):
        if not isinstance(other, AdmissibleShape):
            return NotImplemented
        return (self.r, self.d, self.n, self.offset) == (other.r, other.d, other.n, other.offset) and np.array_equal(
            self.counts, other.counts
        )

    def __hash__(self):
        return hash((self.r, self.d, self.n, self.offset))


def build_admissible(r: int, n: int, offset: int = 0) -> AdmissibleShape:
    """The staircase ``H_{r,d,n}`` with ``d = 2**n / r - (r + 1)``.

    Raises
    ------
    NotRepresentable
        If ``r`` does not divide ``2**n`` or ``d`` would be negative.
    """
    if r < 1:
        raise NotRepresentable("r must be >= 1")
    total = 1 << n
    if total % r:
        raise NotRepresentable(f"2^{n}/{r} is not an integer")
    d = total // r - (r + 1)
    if d < 0:
        raise NotRepresentable(f"r={r} too wide for generation {n} (d={d})")
    return AdmissibleShape(r, d, n, staircase_counts(r, d), offset)


def is_admissible(counts, n: int) -> Optional[tuple[int, int]]:
    """``(r, d)`` if ``counts`` is exactly some ``H_{r,d,n}``, else ``None``."""
    c = np.asarray(counts, dtype=np.int64)
    r = int(c.max()) if c.size else 0
    if r < 1 or (1 << n) % r:
        return None
    d = (1 << n) // r - (r + 1)
    if d < 0 or c.size != 2 * r + d:
        return None
    return (r, d) if np.array_equal(c, staircase_counts(r, d)) else None


def grid_minimiser(n: int, K: int, eps: float = 1.0) -> OccupationProfile:
    """Minimiser of the generation-``n`` interaction on ``2**K`` grid sites: uniform filling.

    The sites are centred about 0 (for ``K = 0`` the single site is site 0).
    """
    if n < K:
        raise ValueError("need n >= K")
    width = 1 << K
    offset = -(width // 2)
    return OccupationProfile(offset, np.full(width, 1 << (n - K), dtype=np.int64), n)


def _site_caps(L: int) -> np.ndarray:
    ell = np.arange(1, L + 1)
    return np.minimum(ell, L + 1 - ell)


def restricted_minimiser(L: int, n: int, offset: int = 0) -> AdmissibleShape:
    """Minimise ``sum a(a - 1)`` over smooth vectors on ``L`` sites holding ``2**n`` particles.

    The Lagrange multiplier is ``lambda* = L - sqrt((L + 1)^2 - 2^(n+2))`` and
    the continuous minimiser caps the pyramid ``min(l, L + 1 - l)`` at
    ``(lambda* + 1) / 2``. When that level is an integer ``r`` the result is
    exactly ``H_{r, L - 2r, n}``. Otherwise the integer minimiser fills the
    pyramid to the floor of the level and places the remaining particles one
    per site on the plateau, nearest the centre first.

    Raises
    ------
    Infeasible
        If ``(L + 1)^2 < 2^(n+2)`` (no smooth vector on ``L`` sites holds
        ``2**n`` particles) or ``2**n < L``.
    """
    total = 1 << n
    disc = (L + 1) ** 2 - 4 * total
    if L < 1 or disc < 0:
        raise Infeasible(f"{total} particles do not fit smoothly on {L} sites")
    if total < L:
        raise Infeasible(f"{total} particles cannot occupy all {L} sites")
    root = math.isqrt(disc)
    exact_root = root * root == disc
    lam = L - (root if exact_root else math.sqrt(disc))
    caps = _site_caps(L)
    if exact_root and (L + 1 - root) % 2 == 0:
        r = (L + 1 - root) // 2
        counts = np.minimum(caps, r).astype(np.int64)
        return AdmissibleShape(r, L - 2 * r, n, counts, offset, float(lam), True)
    level = (lam + 1) / 2
    t = int(math.floor(level))
    # guard against rounding in the floor of an irrational level
    while int(np.minimum(caps, t + 1).sum()) <= total:
        t += 1
    while int(np.minimum(caps, t).sum()) > total:
        t -= 1
    counts = np.minimum(caps, t).astype(np.int64)
    extra = total - int(counts.sum())
    eligible = np.flatnonzero(caps >= t + 1)
    centre = (L - 1) / 2
    order = eligible[np.lexsort((eligible, np.abs(eligible - centre)))]
    counts[order[:extra]] += 1
    return AdmissibleShape(t, L - 2 * t, n, counts, offset, float(lam), False)


def continuous_restricted_profile(L: int, n: int) -> np.ndarray:
    """The relaxed profile ``min((lambda* + 1) / 2, min(l, L + 1 - l))``."""
    disc = (L + 1) ** 2 - (1 << (n + 2))
    if disc < 0:
        raise Infeasible(f"{1 << n} particles do not fit smoothly on {L} sites")
    lam = L - math.sqrt(disc)
    return np.minimum((lam + 1) / 2, _site_caps(L).astype(float))


# --- one-dimensional transport ---------------------------------------------

def _transport_runs(src_counts, dst_counts):
    """Runs of the monotone matching as arrays ``(i, j, m)``: ``m`` particles go from index ``i`` to ``j``.

    The runs are the pieces between consecutive points of the union of both
    cumulative-count sequences.
    """
    src = np.asarray(src_counts, dtype=np.int64)
    dst = np.asarray(dst_counts, dtype=np.int64)
    cs, cd = np.cumsum(src), np.cumsum(dst)
    if cs[-1] != cd[-1]:
        raise ValueError("transport needs equal total mass")
    cuts = np.union1d(cs, cd)
    starts = np.concatenate(([0], cuts[:-1]))
    m = cuts - starts
    i = np.searchsorted(cs, starts, side="right")
    j = np.searchsorted(cd, starts, side="right")
    keep = m > 0
    return i[keep], j[keep], m[keep]


def _weighted_square_sum(weights, disp) -> int:
    """``sum w d^2`` as an exact integer."""
    if disp.size == 0:
        return 0
    d_max = int(np.abs(disp).max())
    if int(weights.sum()) * d_max * d_max < (1 << 62):
        return int(np.sum(weights * disp * disp))
    return sum(int(w) * int(d) ** 2 for w, d in zip(weights, disp))


def monotone_transport(src_offset: int, src_counts, dst_offset: int, dst_counts):
    """Quantile (monotone) matching between two equal-mass occupation vectors.

    Returns ``(moves, cost)`` where ``moves`` is an integer array with rows
    ``(from_site, to_site, count)``, one per non-trivial displacement, and ``cost`` is the summed
    squared site displacement. Monotone matching is optimal for convex
    movement costs on the line.
    """
    i, j, m = _transport_runs(src_counts, dst_counts)
    a, b = src_offset + i, dst_offset + j
    moved = a != b
    moves = np.stack([a[moved], b[moved], m[moved]], axis=1)
    return moves, _weighted_square_sum(m[moved], b[moved] - a[moved])


@dataclass(frozen=True)
class StaircaseStep:
    shape: AdmissibleShape
    moves: np.ndarray = field(repr=False)
    squared_displacement: int

    def spreading_cost(self, eps: float) -> float:
        return 0.5 * eps ** 2 * self.squared_displacement


def evolve_forward(shape: AdmissibleShape) -> StaircaseStep:
    """Branch every particle of ``H_{r,d,n-1}`` and smooth to ``H_{2r, d-r, n}``.

    The doubled occupation is carried onto the wider staircase by monotone
    transport; among target placements the cheapest is used, ties broken
    towards the most centred and then the leftmost placement. The range grows
    by ``r`` sites, i.e. half the new ramp width.

    Raises
    ------
    ShapeMismatch
        If ``shape`` is not an exact staircase or has no successor (``d < r``).
    """
    rd = is_admissible(shape.counts, shape.n)
    if rd is None or rd != (shape.r, shape.d):
        raise ShapeMismatch(f"input is not an exact H_(r,d,{shape.n}) staircase")
    r, d = rd
    r_new, d_new = 2 * r, d - r
    if d_new < 0:
        raise ShapeMismatch(f"H_({r},{d},{shape.n}) has no staircase successor (d < r)")
    doubled = 2 * shape.counts
    target = staircase_counts(r_new, d_new)
    L_src = shape.L
    L_dst = target.size
    # Shifting the target by t moves every destination by t, so the cost is
    # the quadratic c0 + 2 t c1 + m t^2 in the placement t.
    i, j, m = _transport_runs(doubled, target)
    disp = j - i
    c0 = _weighted_square_sum(m, disp)
    c1 = int(np.sum(m * disp))
    mass = int(m.sum())
    best = None
    for t0 in range(shape.offset - (L_dst - L_src), shape.offset + 1):
        t = t0 - shape.offset
        cost = c0 + 2 * t * c1 + mass * t * t
        shift = abs((2 * t0 + L_dst) - (2 * shape.offset + L_src))
        key = (cost, shift, t0)
        if best is None or key < best:
            best = key
    cost, _, t0 = best
    a, b = shape.offset + i, t0 + j
    moved = a != b
    moves = np.stack([a[moved], b[moved], m[moved]], axis=1)
    new = AdmissibleShape(r_new, d_new, shape.n + 1, target, t0)
    return StaircaseStep(new, moves, cost)


# --- trajectories ------------------------------------------------------------

def trajectory_feasible(N: int, K: int) -> bool:
    """``H_{2^K, d, N}`` exists (``d >= 0``), which makes every intermediate staircase exist."""
    r = 1 << K
    return 0 <= K < N and r * (r + 1) <= (1 << N)


def feasible_K(N: int) -> list[int]:
    return [K for K in range(0, N) if trajectory_feasible(N, K)]


@dataclass(frozen=True)
class StaircaseEvolution:
    """Generations ``M .. N`` of the trajectory (occupations only)."""

    N: int
    K: int
    shapes: tuple
    steps: tuple

    @property
    def M(self) -> int:
        return self.N - self.K

    def occupation(self, n: int) -> OccupationProfile:
        return self.shapes[n - self.M].occupation()

    def interactions(self) -> list[int]:
        """``I_n`` for ``n = M .. N``."""
        return [s.interaction() for s in self.shapes]

    def ranges(self) -> list[int]:
        return [s.L for s in self.shapes]

    def squared_displacements(self) -> list[int]:
        return [s.squared_displacement for s in self.steps]


def staircase_evolution(N: int, K: int) -> StaircaseEvolution:
    if not trajectory_feasible(N, K):
        raise NotRepresentable(f"no admissible trajectory with N={N}, K={K}")
    M = N - K
    width = 1 << M
    shape = build_admissible(1, M, offset=-(width // 2))
    shapes = [shape]
    steps = []
    for _ in range(K):
        step = evolve_forward(shape)
        steps.append(step)
        shape = step.shape
        shapes.append(shape)
    return StaircaseEvolution(N, K, tuple(shapes), tuple(steps))


@dataclass(frozen=True)
class TrajectoryReport:
    """The trajectory ``h*_r`` with ``r = 2**K``: Dirichlet phase then staircase phase."""

    params: ModelParams
    K: int
    dirichlet_part: Optional[DirichletSolution]
    staircase: StaircaseEvolution
    costs: CostBreakdown

    @property
    def M(self) -> int:
        return self.params.N - self.K

    @property
    def r(self) -> int:
        return 1 << self.K

    @property
    def d(self) -> int:
        return self.staircase.shapes[-1].d

    @property
    def occupations(self) -> dict:
        return {n: self.staircase.occupation(n) for n in range(self.M, self.params.N + 1)}

    @property
    def transport_moves(self) -> list:
        return [s.moves for s in self.staircase.steps]

    @property
    def transport_cost(self) -> float:
        eps = self.params.eps
        return math.fsum(s.spreading_cost(eps) for s in self.staircase.steps)

    def profile(self) -> TreeProfile:
        """Full position profile; children attach to parents by monotone matching."""
        if self.dirichlet_part is None:
            raise ValueError("trajectory was built without its Dirichlet profile")
        base = self.dirichlet_part.profile
        eps = self.params.eps
        later = [self.staircase.occupation(n).positions(eps) for n in range(self.M + 1, self.params.N + 1)]
        return TreeProfile.extend_by_multisets(base, later)


def build_trajectory(params: ModelParams, K: int, with_profile: bool = True) -> TrajectoryReport:
    """Construct ``h*_r`` for ``r = 2**K`` and its full cost breakdown.

    Generations ``0 .. M`` (``M = N - K``) are the standard Dirichlet solution,
    whose last generation is one particle per grid site; generations
    ``M .. N`` follow :func:`evolve_forward`. The spreading cost of the
    staircase phase is the monotone-transport cost of each step.

    With ``with_profile=False`` the Dirichlet phase is not materialised:
    its spreading cost is then unavailable (reported as nan) and its
    collision counts are taken as zero, which the spacing property of the
    standard solution guarantees.
    """
    N, eps = params.N, params.eps
    stair = staircase_evolution(N, K)
    M = N - K
    sol = None
    if with_profile:
        if M > DIRICHLET_PROFILE_CAP:
            raise ValueError(f"Dirichlet profile depth {M} exceeds cap {DIRICHLET_PROFILE_CAP}")
        sol = solve_recursive(standard_boundary(M, eps))
        stitched = occupation_of_generation(sol.profile, M, params)
        if stitched != stair.occupation(M):
            raise AssertionError("Dirichlet boundary and staircase start disagree")
        spr = [0.5 * float(np.dot(a, a)) for a in sol.increments[1:]]
        inter = [interaction_count(sol.profile.generation(n), eps) for n in range(1, M + 1)]
    else:
        spr = [math.nan] * M
        inter = [0] * M
    spr += [s.spreading_cost(eps) for s in stair.steps]
    inter += stair.interactions()[1:]
    return TrajectoryReport(params, K, sol, stair, CostBreakdown(spr, inter, params.beta))


def predicted_r_star(params: ModelParams) -> float:
    return (3 * params.eps ** 2 / params.beta) ** (1 / 3) * 2.0 ** ((params.N - 4) / 3)


def predicted_K(params: ModelParams) -> float:
    """``(N - 4)/3 + log2(3 eps^2 / beta)/3`` (real-valued)."""
    return (params.N - 4) / 3 + math.log2(3 * params.eps ** 2 / params.beta) / 3


def optimal_K(params: ModelParams) -> tuple[int, float]:
    """Dyadic exponent minimising the analytic total cost, and the continuous ``r*``.

    Raises
    ------
    DegenerateRegime
        If ``r* < 1``.
    """
    from .asymptotics import total_cost_model

    r_star = predicted_r_star(params)
    if r_star < 1:
        raise DegenerateRegime(f"r* = {r_star:.3g} < 1: penalty too weak for N={params.N}")
    best = None
    for K in feasible_K(params.N):
        val = total_cost_model(float(1 << K), params)
        if best is None or val < best[0]:
            best = (val, K)
    if best is None:
        raise DegenerateRegime(f"no feasible staircase for N={params.N}")
    return best[1], r_star
