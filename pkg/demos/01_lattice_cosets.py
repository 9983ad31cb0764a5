# %% [markdown]
# # Hierarchical cosets on a wrap-around hexagonal network
#
# An 81-cell torus is split three ways at every level.  Cells that end up in
# the same coset may share a pilot; the deeper the coset, the farther apart
# its members are.

# %%
import numpy as np

from pilotreuse import build_lattice

lattice = build_lattice(m=4, cell_radius_m=1600.0)
print(lattice.n_cells, "cells on a", lattice.side, "x", lattice.side, "rhombus")

# %%
# Depth-1 labels drawn on the rhombus: the familiar reuse-3 colouring.
labels = lattice.coset_labels[:, 1].reshape(lattice.side, lattice.side)
for b in reversed(range(lattice.side)):
    print(" " * b + " ".join(str(labels[a, b]) for a in range(lattice.side)))

# %%
# Coset sizes and the nearest co-pilot distance at each depth.  Every level
# multiplies the spacing by sqrt(3).
for depth in range(lattice.max_depth + 1):
    size = len(lattice.copilot_cells((0, 0), depth))
    spacing = lattice.min_copilot_spacing(depth)
    print(f"depth {depth}: {size:2d} cells per coset, nearest co-pilot {spacing:8.1f} m")

# %%
# Distances wrap: cell (8, 0) is the left neighbour of (0, 0).
d = lattice.torus_distance(lattice.center((0, 0)), lattice.center((8, 0)))
print(f"{d:.1f} m, one spacing = {lattice.cell_spacing_m:.1f} m")
print("torus diameter", round(lattice.torus_diameter(), 1), "m")

# %%
# Labels refine: the depth-2 label integer-divided by 3 gives the depth-1 label.
print(np.array_equal(lattice.coset_labels[:, 2] // 3, lattice.coset_labels[:, 1]))
