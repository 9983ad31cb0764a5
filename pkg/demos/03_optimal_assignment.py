# %% [markdown]
# # Optimal pilot assignment versus coherence interval
#
# A pilot assignment vector p counts how many pilots are reused at each tree
# depth.  Longer pilots cut contamination but leave fewer symbols for data.

# %%
from fractions import Fraction

from pilotreuse import (
    breakpoints,
    brute_force_optimal,
    closed_form_sum_opt,
    enumerate_valid,
    optimal_assignment,
    to_transition,
)
from pilotreuse.csvio import sweep_rows

# %%
# All 23 valid vectors for 81 cells and one user per cell.
for p in enumerate_valid(81, 1):
    print(p, "transitions", to_transition(p))

# %%
# With a linear rate table the closed form can be checked by hand.
linear = tuple(Fraction(1 + 6 * i) for i in range(4))
print("Delta_1, Delta_2 =", breakpoints(linear, 81, 1)[1], breakpoints(linear, 81, 1)[2])
print(closed_form_sum_opt(7, 81, 1), brute_force_optimal("sum", 7, linear, 81, 1))

# %%
# Any table with C0/(C1-C0) = 2, C1/(C2-C1) = 19/6 and C2/(C3-C2) = 10/3 puts the
# switching points at 7, 24, 28, 32, 71, 75, ..., 103.
rates = (Fraction(2), Fraction(3), Fraction(75, 19), Fraction(195, 38))
grid = range(1, 121)
for start, end, p, npil in sweep_rows(grid, [optimal_assignment(n, rates, 81, 1) for n in grid]):
    print(f"{start:4d} .. {end if end else '':>4}  {p}  N_pil={npil}")

# %%
# Two users per cell.
for start, end, p, npil in sweep_rows(range(2, 61), [optimal_assignment(n, rates, 81, 2) for n in range(2, 61)]):
    print(f"{start:4d} .. {end if end else '':>4}  {p}  N_pil={npil}")
