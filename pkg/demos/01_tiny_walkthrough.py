# %% [markdown]
# # One instance by hand
#
# Three items, three elements u, v, w worth 10, 20 and 30.  Item 0 covers
# u and v, item 1 covers v and w, item 2 covers w.  The objective is the
# value covered; the budget counts covered elements.

# %%
from submax import (SolverConfig, SubsetMask, coverage_constraint, coverage_objective,
                    lower_bound_at, nemhauser_upper_bound, solve_em, solve_exact,
                    solve_greedy, solve_sem, tiny)

inst = tiny()
g, f = coverage_objective(inst), coverage_constraint(inst)
S = lambda *items: SubsetMask.of(3, items)
print("g({0}) =", g(S(0)), "  g(all) =", g(S(0, 1, 2)), "  f({0,1}) =", f(S(0, 1)))

# %% [markdown]
# ## Modular bounds at an anchor
#
# The lower bound telescopes g along a chain that lists the anchor first.
# It matches g at the anchor and never exceeds it elsewhere.

# %%
mb = lower_bound_at(g, S(0))
print("chain weights from {0}:", mb.weights)
print("bound at {1,2}:", mb(S(1, 2)), "<= g({1,2}) =", g(S(1, 2)))
print("upper bound of f({1}) from anchor {0}:", nemhauser_upper_bound(f, S(0), S(), S(1)))

# %% [markdown]
# ## Solvers at b = 2 and b = 3

# %%
for b in (2, 3):
    cfg = SolverConfig(b)
    for solve in (solve_em, solve_sem, solve_greedy, solve_exact):
        r = solve(g, f, cfg)
        print(f"b={b} {r.solver:6s} solution={sorted(r.solution)} g={r.g_value:g} f={r.f_value:g}")

# %% [markdown]
# EM walks {} -> {0} -> {0,1}.  SEM fixes the parameter of the constraint's
# bound to the empty set, so from {0} it prices item 1 at its full
# singleton cost and stays put.

# %%
for row in solve_em(g, f, SolverConfig(3)).trace:
    print(row.t, sorted(row.X_t), "theta =", sorted(row.theta_hat), "g =", row.g_value)
