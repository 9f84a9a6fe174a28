"""Discrete Dirichlet problem on the binary tree with pinned root and leaves.

The interior condition is ``h(z0) + h(z1) + h(parent(z)) = 3 h(z)``; its
solution is the minimiser of the quadratic spreading cost with the leaves
pinned. Three independent routes are provided:

* :func:`solve_recursive` -- subtree sums bottom-up, increments top-down
  through ``Sigma(z^(n)) = 2^(M-n) h(z^(n-1)) + (2^(M-n+1) - 1) a(z^(n))``.
  This is the reference solver.
* :func:`solve_closed_form` -- the explicit ancestor-sum formula with
  ``b_n = 1 / (2^(M-n+1) - 1)``.
* :func:`solve_quadratic_min` -- conjugate gradients on the tree Laplacian.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg, spsolve

from .core import NodeId, TreeProfile

MAX_DEPTH = 40


@dataclass(frozen=True)
class DirichletBoundary:
    M: int
    u: np.ndarray

    def __post_init__(self):
        if self.M < 1 or self.M > MAX_DEPTH:
            raise ValueError(f"M must lie in [1, {MAX_DEPTH}]")
        u = np.array(self.u, dtype=float)
        if u.shape != (1 << self.M,):
            raise ValueError(f"boundary needs {1 << self.M} leaf values")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)


@dataclass(frozen=True)
class DirichletSolution:
    """Solution ``h`` with its increments ``a``, subtree sums and ``b_n``.

    ``increments[n]`` and ``subtree_sums[n]`` are indexed by depth; entry 0
    of ``increments`` is the (zero) root increment. ``b[n]`` is ``b_n`` for
    ``n = 1 .. M`` (``b[0]`` is unused and set to nan).
    """

    boundary: DirichletBoundary
    profile: TreeProfile
    increments: tuple
    subtree_sums: tuple
    b: np.ndarray

    @property
    def M(self) -> int:
        return self.boundary.M


def standard_boundary(M: int, eps: float) -> DirichletBoundary:
    """One particle per site, symmetric about 0, on the grid ``eps * (k + 1/2)``.

    Leaf ``z`` gets ``eps * (sum_{l>=2} 2^(M-l) z_l + 1/2)`` when ``z_1 = 1``
    and the negative of that when ``z_1 = 0``.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    idx = np.arange(1 << M)
    top = idx >> (M - 1)
    rest = idx & ((1 << (M - 1)) - 1)
    u = eps * (rest + 0.5)
    u = np.where(top == 1, u, -u)
    return DirichletBoundary(M, u)


def linear_boundary(M: int, eps: float) -> DirichletBoundary:
    """Lexicographically increasing leaves, ``eps * (index - 2^(M-1) + 1/2)``.

    Same leaf multiset as :func:`standard_boundary`; the two differ by a tree
    automorphism, so their solutions have equal costs.
    """
    idx = np.arange(1 << M)
    return DirichletBoundary(M, eps * (idx - (1 << (M - 1)) + 0.5))


def subtree_sums(boundary: DirichletBoundary) -> list[np.ndarray]:
    """``Sigma(z^(n))``: sum of the boundary over the leaves below each node."""
    M = boundary.M
    sums = [None] * (M + 1)
    sums[M] = boundary.u.copy()
    for n in range(M - 1, -1, -1):
        s = sums[n + 1]
        sums[n] = s[0::2] + s[1::2]
    return sums


def b_coefficients(M: int) -> np.ndarray:
    b = np.full(M + 1, np.nan)
    for n in range(1, M + 1):
        b[n] = 1.0 / ((1 << (M - n + 1)) - 1)
    return b


def _finish(boundary, h, sums) -> DirichletSolution:
    M = boundary.M
    h[M] = boundary.u.copy()
    profile = TreeProfile(h)
    incs = [np.zeros(1)] + [profile.increments(n) for n in range(1, M + 1)]
    for s in sums:
        s.setflags(write=False)
    for a in incs:
        a.setflags(write=False)
    return DirichletSolution(boundary, profile, tuple(incs), tuple(sums), b_coefficients(M))


def solve_recursive(boundary: DirichletBoundary) -> DirichletSolution:
    M = boundary.M
    sums = subtree_sums(boundary)
    h = [np.zeros(1)]
    for n in range(1, M + 1):
        hp = np.repeat(h[-1], 2)
        a = (sums[n] - (1 << (M - n)) * hp) / ((1 << (M - n + 1)) - 1)
        h.append(hp + a)
    return _finish(boundary, h, sums)


def solve_closed_form(boundary: DirichletBoundary) -> DirichletSolution:
    """Evaluate ``h(z^(n)) = b_n S(z^(n)) + sum_l b_{n-l+1} b_{n-l} / b_{n+1} S(z^(n-l))``."""
    M = boundary.M
    sums = subtree_sums(boundary)
    b = b_coefficients(M)
    h = [np.zeros(1)]
    for n in range(1, M + 1):
        inv_bnext = (1 << (M - n)) - 1  # 1 / b_{n+1}; zero at n = M
        idx = np.arange(1 << n)
        val = b[n] * sums[n]
        for ell in range(1, n):
            coef = b[n - ell + 1] * b[n - ell] * inv_bnext
            val = val + coef * sums[n - ell][idx >> ell]
        h.append(val)
    return _finish(boundary, h, sums)


def closed_form_increments(boundary: DirichletBoundary) -> list[np.ndarray]:
    """Increments from the explicit formula, as a check on ``h`` differences."""
    M = boundary.M
    sums = subtree_sums(boundary)
    b = b_coefficients(M)
    out = [np.zeros(1)]
    for n in range(1, M + 1):
        inv_bnext = (1 << (M - n)) - 1
        inv_bn = (1 << (M - n + 1)) - 1
        idx = np.arange(1 << n)
        val = b[n] * sums[n]
        for ell in range(1, n):
            bracket = b[n - ell + 1] * inv_bnext - b[n - ell + 1] * inv_bn
            val = val + b[n - ell] * sums[n - ell][idx >> ell] * bracket
        out.append(val)
    return out


def solve_quadratic_min(boundary: DirichletBoundary, method: str = "direct", rtol: float = 1e-13) -> DirichletSolution:
    """Minimise the spreading cost with pinned root and leaves as a sparse linear system.

    The normal equations are the tree Laplacian ``3 h(z) - h(z0) - h(z1) -
    h(parent) = 0``. ``method="direct"`` uses a sparse LU factorisation (a
    tree admits an elimination order without fill-in); ``method="cg"`` uses
    conjugate gradients, whose accuracy degrades with depth because the
    condition number grows like ``4^M``.
    """
    if method not in ("direct", "cg"):
        raise ValueError(f"unknown method {method!r}")
    M = boundary.M
    if M == 1:
        return _finish(boundary, [np.zeros(1), boundary.u.copy()], subtree_sums(boundary))
    # unknowns: depths 1..M-1, node (n, j) -> 2^n - 2 + j
    n_unknown = (1 << M) - 2
    rows, cols, vals = [], [], []
    rhs = np.zeros(n_unknown)
    for n in range(1, M):
        base = (1 << n) - 2
        j = np.arange(1 << n)
        me = base + j
        rows.append(me); cols.append(me); vals.append(np.full(j.size, 3.0))
        if n > 1:
            par = (1 << (n - 1)) - 2 + (j >> 1)
            rows.append(me); cols.append(par); vals.append(np.full(j.size, -1.0))
        for c in (0, 1):
            child = (j << 1) + c
            if n + 1 < M:
                rows.append(me); cols.append((1 << (n + 1)) - 2 + child); vals.append(np.full(j.size, -1.0))
            else:
                rhs[me] += boundary.u[child]
    A = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_unknown, n_unknown),
    )
    if method == "direct":
        x = spsolve(A.tocsc(), rhs)
    else:
        x, info = cg(A, rhs, rtol=rtol, atol=0.0, maxiter=10 * n_unknown)
        if info != 0:
            raise RuntimeError(f"conjugate gradients did not converge (info={info})")
    h = [np.zeros(1)]
    for n in range(1, M):
        base = (1 << n) - 2
        h.append(x[base : base + (1 << n)])
    h.append(boundary.u.copy())
    return _finish(boundary, h, subtree_sums(boundary))


def harmonicity_residual(sol: DirichletSolution) -> float:
    """max over interior nodes of ``|3 h(z) - h(z0) - h(z1) - h(parent)|``."""
    M = sol.M
    worst = 0.0
    for n in range(1, M):
        h = sol.profile.generation(n)
        hc = sol.profile.generation(n + 1)
        hp = np.repeat(sol.profile.generation(n - 1), 2)
        r = np.abs(3 * h - hc[0::2] - hc[1::2] - hp)
        worst = max(worst, float(r.max()))
    return worst


def mirror_index(n: int, index, boundary_kind: str = "standard"):
    """Index of the node whose value is the negative of ``index`` at depth ``n``.

    The standard boundary is odd under flipping ``z_1`` only; the linear one
    under flipping every bit.
    """
    if n == 0:
        return index
    if boundary_kind == "standard":
        return np.bitwise_xor(index, 1 << (n - 1))
    if boundary_kind == "linear":
        return (1 << n) - 1 - np.asarray(index)
    raise ValueError(f"unknown boundary kind {boundary_kind!r}")


def generation_gaps(sol: DirichletSolution) -> np.ndarray:
    """Minimum distance between distinct particles of each generation (inf at depth 0)."""
    gaps = np.full(sol.M + 1, np.inf)
    for n in range(1, sol.M + 1):
        x = np.sort(sol.profile.generation(n))
        gaps[n] = float(np.min(np.diff(x)))
    return gaps


def spacing_check(sol: DirichletSolution, eps: float) -> float:
    """Minimum inter-particle gap over all generations, in length units.

    For the standard boundary this is at least ``eps``; interior generations
    keep a gap of at least ``4 eps / 3``.
    """
    return float(generation_gaps(sol)[1:].min())


def dirichlet_spreading_cost(sol: DirichletSolution) -> float:
    return 0.5 * math.fsum(float(np.dot(a, a)) for a in sol.increments[1:])


def spreading_bounds(M: int, eps: float) -> tuple[float, float]:
    """Lower and upper bounds on the spreading cost of the standard solution."""
    q = 1.0 - 2.0 ** (-M)
    lower = eps ** 2 * 2.0 ** (2 * M - 6) / q ** 2
    upper = eps ** 2 * (2.0 ** (M - 1) + 0.5) ** 2 / q
    return lower, upper


def spreading_leading_order(M: int, eps: float) -> float:
    return eps ** 2 * 2.0 ** (2 * M - 3)


def approx_increment_sum(M: int, eps: float) -> float:
    """Exact value of half the summed squared approximate increments.

    Each generation contributes ``sum_z (2 - n + 2 sum_k z_k)^2 = n 2^n``, so
    ``(1/2) sum a_bar^2 = eps^2 2^(2M-5) (2 - (M + 2) 2^-M)``, which tends to
    ``eps^2 2^(2M-4)``.
    """
    return eps ** 2 * 2.0 ** (2 * M - 5) * (2 - (M + 2) * 2.0 ** (-M))


def approx_increment_sum_printed(M: int, eps: float) -> float:
    """The form ``eps^2 2^(2M-4) (2 - 2^(-M-1) (3M + 4))``, kept for comparison.

    It omits the factor 1/2 and evaluates the per-generation sum as
    ``2^n (3n/2 - 1)`` instead of ``n 2^n``; asymptotically it is twice
    :func:`approx_increment_sum`.
    """
    return eps ** 2 * 2.0 ** (2 * M - 4) * (2 - 2.0 ** (-M - 1) * (3 * M + 4))


# --- explicit formulas for the standard boundary ---------------------------

def _c(M, n, ell):
    return 1.0 / ((1 - 2.0 ** (-M + n - ell)) * (1 - 2.0 ** (-M + n - ell - 1)))


def alpha_identity(M: int, n: int, k: int) -> tuple[float, float]:
    """Both sides of ``1/(1-2^(-M+n-1)) - sum_{l=1}^{n-k} 2^-l c_l = 2^(k-n)/(1-2^(-M+k-1))``."""
    lhs = 1.0 / (1 - 2.0 ** (-M + n - 1)) - math.fsum(
        2.0 ** (-ell) * _c(M, n, ell) for ell in range(1, n - k + 1)
    )
    rhs = 2.0 ** (k - n) / (1 - 2.0 ** (-M + k - 1))
    return lhs, rhs


def b_ratio_difference(M: int, n: int, ell: int) -> dict:
    """``b_{n-l+1}/b_{n+1} - b_{n-l+1}/b_n`` next to its two candidate closed forms.

    The printed closed form ``2^-l / (1 - 2^(-M+n-l))`` lacks a minus sign;
    ``corrected`` carries it.
    """
    b = b_coefficients(M)
    inv_bnext = (1 << (M - n)) - 1
    inv_bn = (1 << (M - n + 1)) - 1
    direct = b[n - ell + 1] * inv_bnext - b[n - ell + 1] * inv_bn
    printed = 2.0 ** (-ell) / (1 - 2.0 ** (-M + n - ell))
    return {"direct": float(direct), "printed": printed, "corrected": -printed}


def explicit_standard_profile(M: int, n: int, z: NodeId, eps: float) -> float:
    """Exact closed-form value ``h(z^(n))`` of the standard-boundary solution."""
    if not 0 <= n <= M:
        raise ValueError("need 0 <= n <= M")
    if z.depth != n:
        raise ValueError("node depth must equal n")
    if n == 0:
        return 0.0
    bits = z.bits()
    sign = 1.0 if bits[0] == 1 else -1.0
    zk = {k: bits[k - 1] for k in range(2, n + 1)}
    g1 = 1.0 / (1 - 2.0 ** (-M + n - 1))
    g0 = 1 - 2.0 ** (-M + n)
    const = 0.5 * eps * 2.0 ** (M - n - 1) * (
        g1 + g0 * math.fsum(_c(M, n, ell) for ell in range(1, n))
    )
    s_all = math.fsum(2.0 ** (-k) * zk[k] for k in range(2, n + 1))
    s_inner = math.fsum(2.0 ** (-k) * zk[k] for k in range(2, n))
    s_corr = math.fsum(zk[k] * g0 / (1 - 2.0 ** (-M + k - 1)) for k in range(2, n))
    var = 0.5 * eps * 2.0 ** M * (g1 * s_all + g0 * g1 * s_inner - 2.0 ** (-n) * s_corr)
    return sign * (const + var)


def approx_increments(M: int, n: int, eps: float) -> np.ndarray:
    """``eps 2^(M-n-2) (2 - n + 2 sum_{k>=2} z_k)``, odd in ``z_1``, for all nodes at depth ``n``."""
    idx = np.arange(1 << n)
    ones = np.array([bin(i & ((1 << (n - 1)) - 1)).count("1") for i in idx]) if n > 1 else np.zeros(1 << n, int)
    val = eps * 2.0 ** (M - n - 2) * (2 - n + 2 * ones)
    top = idx >> (n - 1)
    return np.where(top == 1, val, -val)


def approx_profile(M: int, n: int, eps: float) -> np.ndarray:
    """Large-``M`` form ``eps 2^(M-1) (n 2^(-n-1) + 2 sum_k (2^-k - 2^(-n-1)) z_k)``."""
    idx = np.arange(1 << n)
    val = np.full(idx.size, n * 2.0 ** (-n - 1))
    for k in range(2, n + 1):
        zk = (idx >> (n - k)) & 1
        val = val + 2 * (2.0 ** (-k) - 2.0 ** (-n - 1)) * zk
    val = eps * 2.0 ** (M - 1) * val
    top = idx >> (n - 1)
    return np.where(top == 1, val, -val)


def rightmost_asymptotic(M: int, n: int, eps: float, printed: bool = False) -> float:
    """Leading-order position of the right-most particle at depth ``n``.

    The default is ``eps 2^(M-1) (1 - (n + 2) 2^(-n-1))``, which is what the
    large-``M`` profile gives on the all-ones path (and reduces to
    ``eps 2^(M-3)`` at ``n = 1``). ``printed=True`` returns the form
    ``eps 2^(M-1) (1 - n 2^(-n-1))`` (``eps 2^(M-3)`` at ``n = 1``) for comparison.
    """
    if printed:
        if n == 1:
            return eps * 2.0 ** (M - 3)
        return eps * 2.0 ** (M - 1) * (1 - n * 2.0 ** (-n - 1))
    return eps * 2.0 ** (M - 1) * (1 - (n + 2) * 2.0 ** (-n - 1))
