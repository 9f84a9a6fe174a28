# %% [markdown]
# # The Dirichlet phase
#
# Before particles start to share sites, the cheapest way to spread
# ``2^M`` particles to one-per-site is the discrete harmonic extension of
# the final positions into the tree. This script solves it three ways and
# looks at the numbers that matter later: spacing, spreading cost, and the
# position of the outermost particle.

# %%
import numpy as np

from srbrw import dirichlet as d
from srbrw.core import NodeId

eps = 1.0
M = 12
b = d.standard_boundary(M, eps)
rec = d.solve_recursive(b)
closed = d.solve_closed_form(b)
direct = d.solve_quadratic_min(b)

for name, other in (("closed form", closed), ("sparse solve", direct)):
    diff = max(np.max(np.abs(x - y)) for x, y in zip(rec.profile.values, other.profile.values))
    print(f"recursion vs {name}: max |diff| = {diff:.2e}")
print("harmonicity residual:", d.harmonicity_residual(rec))

# %% [markdown]
# Every generation keeps its particles at least ``eps`` apart, and
# strictly inside the tree the gap is ``4 eps / 3``.

# %%
gaps = d.generation_gaps(rec)
print("min gap per generation:", np.round(gaps[1:], 6))

# %% [markdown]
# The spreading cost grows like ``eps^2 2^(2M-4)``. Dividing by
# ``eps^2 2^(2M-3)`` gives 1/2, not 1.

# %%
for m in (4, 8, 12, 16, 20):
    c = d.dirichlet_spreading_cost(d.solve_recursive(d.standard_boundary(m, eps)))
    lo, hi = d.spreading_bounds(m, eps)
    print(f"M={m:2d}  S={c:.6g}  S/2^(2M-4)={c / 2.0 ** (2 * m - 4):.6f}  within bounds: {lo <= c <= hi}")

# %% [markdown]
# Outermost particle at depth ``n``: the exact closed form at ``M = 40``
# against the leading-order expression ``eps 2^(M-1) (1 - (n + 2) 2^(-n-1))``.

# %%
for n in range(1, 7):
    h = d.explicit_standard_profile(40, n, NodeId(n, (1 << n) - 1), eps)
    print(n, h / d.rightmost_asymptotic(40, n, eps))
