"""Toroidal hexagonal cell lattice with hierarchical index-3 coset labels.

Cells sit on the hexagonal lattice spanned by ``e1 = (1, 0)`` and
``e2 = (1/2, sqrt(3)/2)`` (scaled by the center-to-center spacing).  The
network is the rhombus ``0 <= a, b < side`` wrapped into a torus, with
``side = 3**(m/2)`` so that ``L = 3**m`` cells.

The depth-1 partition is the classic reuse-3 coloring ``(a - b) mod 3``.
Each coset is again a hexagonal lattice (basis ``(1, 1)``, ``(2, -1)``,
rotated by 30 degrees and scaled by sqrt(3)), so the same rule is applied
recursively in the coset's own coordinates.  Labels are hierarchical:
``label_d = 3 * label_{d-1} + digit_d``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .exceptions import ConfigurationError, DomainError

SQRT3 = math.sqrt(3.0)

# Lattice basis in units of the cell spacing; columns are e1 and e2.
_BASIS = np.array([[1.0, 0.5], [0.0, SQRT3 / 2.0]])
_BASIS_INV = np.linalg.inv(_BASIS)


class AxialCoord(NamedTuple):
    a: int
    b: int


class CosetId(NamedTuple):
    depth: int
    label: int


def _coset_digits(a: int, b: int, depth: int) -> list[int]:
    """Base-3 digits locating cell ``(a, b)`` in the depth-``depth`` coset tree."""
    digits = []
    for _ in range(depth):
        digit = (a - b) % 3
        digits.append(digit)
        a -= digit  # representative of the digit's coset is (digit, 0)
        # (a, b) = u*(1, 1) + v*(2, -1) in the sublattice basis
        a, b = (a + 2 * b) // 3, (a - b) // 3
    return digits


def coset_label(a: int, b: int, depth: int) -> int:
    """Hierarchical depth-``depth`` coset label of the lattice point ``(a, b)``.

    Defined on all of Z^2.  Shifting by any vector of the depth-``depth``
    sublattice leaves the label unchanged, in particular a shift by
    ``3**ceil(depth/2)`` along either coordinate.
    """
    label = 0
    for digit in _coset_digits(a, b, depth):
        label = 3 * label + digit
    return label


@dataclass(frozen=True)
class TorusLattice:
    """Wrap-around hexagonal network of ``3**m`` cells.

    Use :func:`build_lattice` rather than instantiating directly.
    """

    m: int
    cell_radius_m: float
    cells: tuple[AxialCoord, ...] = field(repr=False)
    coset_labels: np.ndarray = field(repr=False)  # shape (L, m), column d = depth-d label

    @property
    def side(self) -> int:
        return 3 ** (self.m // 2)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def cell_spacing_m(self) -> float:
        return SQRT3 * self.cell_radius_m

    @property
    def max_depth(self) -> int:
        """Deepest depth at which a coset still holds more than one cell."""
        return self.m - 1

    def index(self, cell: AxialCoord | tuple[int, int]) -> int:
        a, b = cell
        return (a % self.side) * self.side + (b % self.side)

    def centers(self) -> np.ndarray:
        """Cell centers in meters, shape ``(L, 2)``, ordered by cell index."""
        ab = np.array(self.cells, dtype=float)
        return (ab @ _BASIS.T) * self.cell_spacing_m

    def center(self, cell: AxialCoord | tuple[int, int]) -> np.ndarray:
        return self.centers()[self.index(cell)]

    def coset_id(self, cell: AxialCoord | tuple[int, int], depth: int) -> CosetId:
        self._check_depth(depth)
        return CosetId(depth, int(self.coset_labels[self.index(cell), depth]))

    def copilot_cells(self, cell: AxialCoord | tuple[int, int], depth: int) -> set[AxialCoord]:
        """All cells sharing the depth-``depth`` coset of ``cell`` (itself included)."""
        self._check_depth(depth)
        column = self.coset_labels[:, depth]
        members = np.flatnonzero(column == column[self.index(cell)])
        return {self.cells[i] for i in members}

    def copilot_indices(self, cell_index: int, depth: int) -> np.ndarray:
        self._check_depth(depth)
        column = self.coset_labels[:, depth]
        return np.flatnonzero(column == column[cell_index])

    def torus_distance(self, p, q) -> np.ndarray | float:
        """Shortest Euclidean distance between points on the torus.

        Accepts single points or broadcastable arrays of shape ``(..., 2)``
        in meters.  The difference vector is first reduced modulo the torus
        in lattice coordinates, then the nine neighbouring wrap images are
        compared.
        """
        diff = np.asarray(p, dtype=float) - np.asarray(q, dtype=float)
        period = self.side
        coords = diff @ _BASIS_INV.T / self.cell_spacing_m
        coords = coords - period * np.floor(coords / period + 0.5)
        best = None
        for i in (-1, 0, 1):
            for j in (-1, 0, 1):
                shifted = (coords + (i * period, j * period)) @ _BASIS.T
                dist = np.hypot(shifted[..., 0], shifted[..., 1])
                best = dist if best is None else np.minimum(best, dist)
        best = best * self.cell_spacing_m
        return float(best) if np.ndim(best) == 0 else best

    def min_copilot_spacing(self, depth: int) -> float:
        """Nearest center-to-center distance inside one depth-``depth`` coset.

        Computed exhaustively over all distinct same-coset cell pairs.
        """
        self._check_depth(depth)
        centers = self.centers()
        labels = self.coset_labels[:, depth]
        same = labels[:, None] == labels[None, :]
        np.fill_diagonal(same, False)
        dist = self.torus_distance(centers[:, None, :], centers[None, :, :])
        return float(dist[same].min())

    def torus_diameter(self) -> float:
        """Largest torus distance from a cell center to any point of the network."""
        centers = self.centers()
        angles = np.deg2rad(30.0 + 60.0 * np.arange(6))
        vertices = self.cell_radius_m * np.column_stack([np.cos(angles), np.sin(angles)])
        points = np.concatenate([centers, (centers[:, None, :] + vertices[None]).reshape(-1, 2)])
        return float(np.max(self.torus_distance(points, centers[0])))

    def to_csv(self, path) -> None:
        """Write ``cell_index,a,b,label_d1,...`` rows (depth 0 is always 0 and omitted)."""
        depths = range(1, self.m)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["cell_index", "a", "b"] + [f"label_d{d}" for d in depths])
            for idx, (a, b) in enumerate(self.cells):
                writer.writerow([idx, a, b] + [int(self.coset_labels[idx, d]) for d in depths])

    def _check_depth(self, depth: int) -> None:
        if not 0 <= depth <= self.max_depth:
            raise DomainError(
                f"depth {depth} outside [0, {self.max_depth}]; "
                "single-cell leaves would leave users without pilot contamination"
            )


def build_lattice(m: int = 4, cell_radius_m: float = 1600.0) -> TorusLattice:
    """Build the ``3**m``-cell torus with coset labels for depths ``0..m-1``.

    Parameters
    ----------
    m : int
        Lattice exponent; must be even (square rhombic torus) and in ``[2, 8]``.
    cell_radius_m : float
        Hexagon center-to-vertex radius in meters.
    """
    if not isinstance(m, (int, np.integer)) or m % 2 or not 2 <= m <= 8:
        raise ConfigurationError(
            f"lattice exponent m={m!r} must be an even integer in [2, 8]; "
            "odd exponents break the torus wrap of the coset chain"
        )
    if not cell_radius_m > 0:
        raise ConfigurationError(f"cell radius must be positive, got {cell_radius_m!r}")
    m = int(m)
    side = 3 ** (m // 2)
    cells = tuple(AxialCoord(a, b) for a in range(side) for b in range(side))
    labels = np.zeros((len(cells), m), dtype=np.int64)
    for idx, (a, b) in enumerate(cells):
        for d in range(1, m):
            labels[idx, d] = coset_label(a, b, d)
    return TorusLattice(m=m, cell_radius_m=float(cell_radius_m), cells=cells, coset_labels=labels)
