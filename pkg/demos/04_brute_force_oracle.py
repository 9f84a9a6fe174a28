# %% [markdown]
# # Brute force at depth three
#
# On a lattice of spacing ``eps / q`` the action can be minimised exactly
# for small trees. Comparing with the constructed candidates tells us how
# much is lost by restricting to staircases.

# %%
from srbrw import admissible as adm
from srbrw import asymptotics as asy
from srbrw.core import ModelParams
from srbrw.errors import BudgetExceeded
from srbrw.oracle import OracleConfig, oracle_minimum, verify_structural_claims

p = ModelParams(3, 1.0, 1.0)
cands = {f"K={K}": adm.build_trajectory(p, K).costs.S_total for K in adm.feasible_K(3)}
cands["frozen"] = asy.hstarstar_cost(p).S_total
print(cands)

# %%
for q in (1, 2):
    res = oracle_minimum(OracleConfig(p, window=4, refine=q))
    print(f"q={q}: min {res.value:.4f} ({res.elapsed:.2f}s), {len(res.argmin)} minimiser(s), sizes {res.state_sizes}")
    for gens in res.argmin[:2]:
        print("   final generation:", gens[-1], verify_structural_claims(gens, p.eps))

# %% [markdown]
# Refining further blows up the last-generation state space; the budget
# guard stops the search before it runs out of memory.

# %%
try:
    oracle_minimum(OracleConfig(p, window=4, refine=3))
except BudgetExceeded as exc:
    print("refine=3 refused:", exc)

# %% [markdown]
# The minimiser has no collisions at all, so raising ``beta`` leaves both
# the value and the configuration unchanged.

# %%
p5 = ModelParams(3, 5.0, 1.0)
res = oracle_minimum(OracleConfig(p5, window=4, refine=2))
print(res.value, res.argmin[0][-1])
