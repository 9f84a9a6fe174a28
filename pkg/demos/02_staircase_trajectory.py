# %% [markdown]
# # The staircase phase
#
# After generation ``M = N - K`` every grid site holds one particle. From
# then on particles pile up: each generation doubles the occupation and
# smooths it into the staircase ``H_{2r, d - r, n + 1}``. The range only
# grows by half the new ramp width per step.

# %%
from srbrw import admissible as adm
from srbrw.core import ModelParams

N, K = 15, 5
ev = adm.staircase_evolution(N, K)
for sh, nxt in zip(ev.shapes, ev.shapes[1:] + (None,)):
    print(f"n={sh.n:2d} r={sh.r:3d} d={sh.d:6d} L={sh.L:6d} offset={sh.offset:6d} I_n={sh.interaction()}")

# %% [markdown]
# Each step is a one-dimensional optimal transport problem: the doubled
# occupation is moved monotonically onto the wider staircase. The first step
# is special, since widening an all-twos block by one site forces half of
# the particles to move by one site.

# %%
print("squared displacement per step:", ev.squared_displacements())

# %% [markdown]
# The whole trajectory, Dirichlet phase included, with its costs.

# %%
p = ModelParams(N, 1.0, 1.0)
tr = adm.build_trajectory(p, K)
c = tr.costs
print(f"S_spr={c.S_spr:.6g}  J={c.J}  S_total={c.S_total:.6g}")
print("final occupation (first 12 sites):", tr.occupations[N].counts[:12])

# %% [markdown]
# The restricted minimiser: given a range ``L`` and ``2^n`` particles, the
# least-interacting smooth occupation is a staircase whenever the Lagrange
# level is an integer.

# %%
for L, n in ((5, 3), (7, 4), (6, 3), (12, 5)):
    sh = adm.restricted_minimiser(L, n)
    print(L, n, sh.counts, "lambda*=%.4f" % sh.lambda_star, "exact" if sh.exact else "water-filled")
