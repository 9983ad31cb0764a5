"""Hierarchical pilot assignment vectors and their optimizers.

A pilot assignment vector ``p`` has one entry per tree depth ``0..n-1``
(``n = log3 L``): ``p[i]`` is the number of orthogonal pilots whose reuse
set is a depth-``i`` coset of ``L / 3**i`` cells.  A vector is valid when
``0 <= p[i] <= K * 3**i`` and ``sum(p[i] / 3**i) == K``.

The transition vector ``t`` counts the 3-way splits performed at each depth
starting from full reuse ``(K, 0, ..., 0)``; every split adds two pilots.

Rates may be given as floats or as exact numbers (``int`` /
:class:`fractions.Fraction`); exact inputs yield exact breakpoints and
objective values.
"""

from __future__ import annotations

import bisect
import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np

from .exceptions import ConfigurationError, DomainError, ValidationError
from .lattice import TorusLattice

MAX_ENUMERATION_LEVELS = 4


def levels_for(cells: int) -> int:
    """``log3(cells)``, rejecting anything that is not a power of three."""
    n, x = 0, int(cells)
    if x != cells or x < 3:
        raise ConfigurationError(f"number of cells must be a power of 3 (>= 3), got {cells!r}")
    while x % 3 == 0:
        x //= 3
        n += 1
    if x != 1:
        raise ConfigurationError(f"number of cells must be a power of 3, got {cells!r}")
    return n


def _check_k(k) -> int:
    if int(k) != k or k < 1:
        raise ConfigurationError(f"users per cell must be a positive integer, got {k!r}")
    return int(k)


@dataclass(frozen=True)
class PilotVector:
    entries: tuple[int, ...]
    k: int = 1

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(int(e) for e in self.entries))

    @property
    def cells(self) -> int:
        return 3 ** len(self.entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def __str__(self):
        return "(" + ",".join(str(e) for e in self.entries) + ")"

    @classmethod
    def parse(cls, text: str, k: int = 1) -> "PilotVector":
        """Parse the ``(0,2,3,0)`` text form."""
        match = re.fullmatch(r"\s*\(?\s*(-?\d+(?:\s*,\s*-?\d+)*)\s*\)?\s*", text)
        if not match:
            raise ValidationError(f"cannot parse pilot vector from {text!r}")
        return cls(tuple(int(x) for x in match.group(1).split(",")), k)


@dataclass(frozen=True)
class TransitionVector:
    entries: tuple[int, ...]
    k: int = 1

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(int(e) for e in self.entries))

    def __str__(self):
        return "(" + ",".join(str(e) for e in self.entries) + ")"


@dataclass(frozen=True)
class BreakpointTable:
    """Breakpoints ``Delta_1..Delta_N`` in units of ``N_coh / K``."""

    deltas: tuple
    k: int
    cells: int

    def __len__(self):
        return len(self.deltas)

    def __getitem__(self, n):
        """1-based access; ``table[0]`` is the initial point 0."""
        return 0 if n == 0 else self.deltas[n - 1]

    def length_for(self, n_coh) -> int:
        """Optimal pilot length for ``n_coh`` (half-open intervals, ties go long)."""
        n = bisect.bisect_right(self.deltas, Fraction(n_coh) / self.k if _is_exact(self.deltas) else n_coh / self.k)
        return 2 * n + self.k


# --------------------------------------------------------------------------
# rate helpers


def _is_exact(values) -> bool:
    return all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in values)


def as_rates(rates) -> tuple:
    """Normalise a rate table (sequence or ``DepthRateTable``) to a tuple.

    Integers and fractions become :class:`Fraction`; anything else float.
    """
    values = tuple(getattr(rates, "rates", rates))
    if _is_exact(values):
        return tuple(Fraction(v) for v in values)
    return tuple(float(v) for v in values)


def _weight(count: int, depth: int, exact: bool):
    return Fraction(count, 3 ** depth) if exact else count / 3 ** depth


# --------------------------------------------------------------------------
# validity and lengths


def is_valid(p: PilotVector) -> bool:
    n = len(p.entries)
    if n < 1 or p.k < 1:
        return False
    if any(not 0 <= e <= p.k * 3 ** i for i, e in enumerate(p.entries)):
        return False
    # sum p_i 3^-i == K, scaled by 3^(n-1) to stay in integers
    return sum(e * 3 ** (n - 1 - i) for i, e in enumerate(p.entries)) == p.k * 3 ** (n - 1)


def _require_valid(p: PilotVector) -> None:
    if not is_valid(p):
        raise ValidationError(f"{p} is not a valid pilot assignment vector for K={p.k}")


def pilot_length(p: PilotVector) -> int:
    return sum(p.entries)


def max_length(cells: int, k: int) -> int:
    return cells * k // 3


def valid_lengths(cells: int, k: int) -> list[int]:
    """All achievable pilot lengths: ``K, K+2, ..., L*K/3``."""
    levels_for(cells)
    k = _check_k(k)
    return list(range(k, max_length(cells, k) + 1, 2))


def _check_length(n_p0: int, cells: int, k: int) -> None:
    top = max_length(cells, k)
    if int(n_p0) != n_p0 or not k <= n_p0 <= top or (n_p0 - k) % 2:
        raise DomainError(f"pilot length {n_p0!r} is not achievable for L={cells}, K={k}")


# --------------------------------------------------------------------------
# transition vectors


def to_transition(p: PilotVector) -> TransitionVector:
    _require_valid(p)
    t = [p.k - p.entries[0]]
    for i in range(1, len(p.entries) - 1):
        t.append(3 * t[-1] - p.entries[i])
    return TransitionVector(tuple(t), p.k)


def from_transition(t: TransitionVector) -> PilotVector:
    e = t.entries
    if any(x < 0 for x in e) or (e and e[0] > t.k) or any(e[i] > 3 * e[i - 1] for i in range(1, len(e))):
        raise ValidationError(f"{t} is not a transition vector for K={t.k}")
    p = [t.k - e[0]] if e else [t.k]
    p += [3 * e[i - 1] - e[i] for i in range(1, len(e))]
    if e:
        p.append(3 * e[-1])
    return PilotVector(tuple(p), t.k)


# --------------------------------------------------------------------------
# closed forms


def chi(n_p0: int, k: int = 1) -> int:
    """First depth carrying a non-zero entry of the sum-rate optimum at length ``n_p0``."""
    k = _check_k(k)
    if int(n_p0) != n_p0 or n_p0 < k or (n_p0 - k) % 2:
        raise DomainError(f"pilot length {n_p0!r} is not achievable for K={k}")
    splits = (n_p0 - k) // 2
    total, depth = k, 0
    while total <= splits:
        depth += 1
        total += k * 3 ** depth
    return depth


def closed_form_sum_opt(n_p0: int, cells: int, k: int = 1) -> PilotVector:
    """Sum-rate maximising vector of pilot length ``n_p0``.

    Splits are spent greedily at the shallowest depths: every depth below
    ``chi`` is split completely, depth ``chi`` partially.  Optimal whenever
    ``C_{i+1} - C_i`` is constant, and more generally whenever
    ``(C_{i+1} - C_i) / 3**i`` decreases with ``i``.
    """
    n = levels_for(cells)
    k = _check_k(k)
    _check_length(n_p0, cells, k)
    splits = (n_p0 - k) // 2
    c = chi(n_p0, k)
    below = sum(k * 3 ** s for s in range(c))  # splits used up by depths < chi
    p = [0] * n
    p[c] = below + k * 3 ** c - splits
    if c + 1 < n:
        p[c + 1] = 3 * (splits - below)
    return PilotVector(tuple(p), k)


def corollary_step(p_opt: PilotVector) -> PilotVector:
    """Closed-form optimum at the next pilot length, derived from the current one.

    Moves one leaf from the left-most non-zero depth into three leaves one
    level deeper.
    """
    _require_valid(p_opt)
    length = pilot_length(p_opt)
    if length >= max_length(p_opt.cells, p_opt.k):
        raise DomainError(f"{p_opt} already has the maximum pilot length")
    if p_opt != closed_form_sum_opt(length, p_opt.cells, p_opt.k):
        raise ValidationError(f"{p_opt} is not the sum-rate optimum for its length")
    c = chi(length, p_opt.k)
    e = list(p_opt.entries)
    e[c] -= 1
    e[c + 1] += 3
    return PilotVector(tuple(e), p_opt.k)


def breakpoints(rates, cells: int, k: int = 1) -> BreakpointTable:
    """Values of ``N_coh / K`` where the optimal pilot length steps up by two.

    ``Delta_n`` is the crossing of the net-rate curves of the closed-form
    optima at lengths ``2n + K - 2`` and ``2n + K``.
    """
    c = as_rates(rates)
    n_levels = levels_for(cells)
    k = _check_k(k)
    if len(c) != n_levels:
        raise ConfigurationError(f"rate table has {len(c)} depths, expected {n_levels} for L={cells}")
    if any(b <= a for a, b in zip(c, c[1:])):
        raise DomainError("per-depth rates must be strictly increasing")
    count = (max_length(cells, k) - k) // 2
    deltas = []
    for n in range(1, count + 1):
        eta = chi(2 * n + k - 2, k)
        below = sum(k * 3 ** i for i in range(eta))
        xi = 3 ** eta * c[eta] / (c[eta + 1] - c[eta])
        deltas.append((2 * (2 * n - 1 - below + k * xi) + k) / k)
    return BreakpointTable(tuple(deltas), k, cells)


# --------------------------------------------------------------------------
# objectives (re-exported by netrate)


def c_sum(p: PilotVector, rates):
    """Per-cell sum rate ``sum_i p_i 3**-i C_i``."""
    c = as_rates(rates)
    if len(c) != len(p.entries):
        raise ConfigurationError(f"rate table has {len(c)} depths but {p} has {len(p.entries)}")
    exact = isinstance(c[0], Fraction)
    return sum(_weight(e, i, exact) * c[i] for i, e in enumerate(p.entries))


def c_net(p: PilotVector, n_coh, rates):
    """Per-cell net sum rate after discounting pilot symbols; may be negative."""
    if not n_coh > 0:
        raise DomainError("coherence interval must be positive")
    value = c_sum(p, rates)
    exact = isinstance(value, Fraction) and isinstance(n_coh, (int, Fraction))
    frac = Fraction(n_coh - pilot_length(p), n_coh) if exact else (n_coh - pilot_length(p)) / n_coh
    return frac * value


# --------------------------------------------------------------------------
# enumeration oracle


def enumerate_valid(cells: int, k: int = 1, length: Optional[int] = None) -> list[PilotVector]:
    """Every valid vector exactly once, in lexicographic order.

    Restricted to ``L <= 81``; larger networks should use the closed forms.
    """
    n = levels_for(cells)
    k = _check_k(k)
    if n > MAX_ENUMERATION_LEVELS:
        raise ConfigurationError(
            f"exhaustive enumeration is limited to L <= {3 ** MAX_ENUMERATION_LEVELS}; "
            "use closed_form_sum_opt / optimal_assignment for larger networks"
        )
    out = [from_transition(TransitionVector(t, k)) for t in _transitions(n - 1, k)]
    if length is not None:
        out = [p for p in out if pilot_length(p) == length]
    return sorted(out, key=lambda p: p.entries)


def _transitions(depths: int, k: int):
    def rec(prefix, bound):
        if len(prefix) == depths:
            yield tuple(prefix)
            return
        for t in range(bound + 1):
            yield from rec(prefix + [t], 3 * t)
    yield from rec([], k)


@lru_cache(maxsize=64)
def _score_arrays(cells: int, k: int):
    vectors = enumerate_valid(cells, k)
    n = levels_for(cells)
    weights = np.array([[e / 3 ** i for i, e in enumerate(p.entries)] for p in vectors])
    lengths = np.array([pilot_length(p) for p in vectors], dtype=float)
    assert weights.shape == (len(vectors), n)
    return tuple(vectors), weights, lengths


def net_argmax_grid(n_coh_grid, rates, cells: int, k: int = 1) -> list[PilotVector]:
    """Vectorised brute-force net-rate argmax for many coherence intervals (float rates)."""
    vectors, weights, lengths = _score_arrays(cells, k)
    c = np.asarray(as_rates(rates), dtype=float)
    sums = weights @ c
    grid = np.asarray(list(n_coh_grid), dtype=float)
    best = []
    for start in range(0, len(grid), 256):
        g = grid[start:start + 256, None]
        best.extend(np.argmax((g - lengths[None, :]) / g * sums[None, :], axis=1))
    return [vectors[i] for i in best]


def brute_force_optimal(objective: str, value, rates, cells: int, k: int = 1) -> PilotVector:
    """Exhaustive argmax of ``C_sum`` (``objective="sum"``, value = pilot length)
    or ``C_net`` (``objective="net"``, value = ``N_coh``).

    Ties go to the lexicographically smallest vector.
    """
    if objective == "sum":
        _check_length(value, cells, k)
        candidates = enumerate_valid(cells, k, length=value)
        score = lambda p: c_sum(p, rates)  # noqa: E731
    elif objective == "net":
        candidates = enumerate_valid(cells, k)
        score = lambda p: c_net(p, value, rates)  # noqa: E731
    else:
        raise ConfigurationError(f"objective must be 'sum' or 'net', got {objective!r}")
    best, best_score = None, None
    for p in candidates:  # already lexicographically sorted
        s = score(p)
        if best_score is None or s > best_score:
            best, best_score = p, s
    return best


class AssignmentMismatchWarning(UserWarning):
    """Closed-form and exhaustive optima disagree (e.g. a strongly non-linear rate table)."""


def optimal_assignment(n_coh, rates, cells: int, k: int = 1, verify: bool = False) -> PilotVector:
    """Net-rate optimal vector from the breakpoint closed form.

    With ``verify=True`` the answer is checked against
    :func:`brute_force_optimal` and an :class:`AssignmentMismatchWarning` is
    issued if the exhaustive optimum achieves a strictly larger net rate.
    """
    k = _check_k(k)
    if n_coh < k:
        raise DomainError(f"coherence interval {n_coh} shorter than minimum pilot length {k}")
    table = breakpoints(rates, cells, k)
    p = closed_form_sum_opt(table.length_for(n_coh), cells, k)
    if verify:
        oracle = brute_force_optimal("net", n_coh, rates, cells, k)
        got, best = c_net(p, n_coh, rates), c_net(oracle, n_coh, rates)
        if best > got and not np.isclose(float(best), float(got), rtol=1e-12, atol=0):
            warnings.warn(
                f"closed form gives {p} (C_net={float(got):.6g}) but exhaustive search finds "
                f"{oracle} (C_net={float(best):.6g}) at N_coh={n_coh}",
                AssignmentMismatchWarning,
                stacklevel=2,
            )
    return p


# --------------------------------------------------------------------------
# realization on a lattice


@dataclass(frozen=True)
class PilotRealization:
    """Concrete pilot map: ``cell_pilots[c, s]`` is the pilot id of slot ``s`` in cell ``c``."""

    cell_pilots: np.ndarray
    pilot_cosets: tuple[tuple[int, int], ...]  # pilot id -> (depth, coset label)

    @property
    def n_pilots(self) -> int:
        return len(self.pilot_cosets)

    def validate(self, lattice: TorusLattice) -> None:
        pilots = self.cell_pilots
        if pilots.shape[0] != lattice.n_cells:
            raise ValidationError("realization does not cover every cell")
        for row in pilots:
            if len(set(row.tolist())) != len(row):
                raise ValidationError("a cell uses the same pilot twice")
        for pid, (depth, label) in enumerate(self.pilot_cosets):
            users = np.flatnonzero((pilots == pid).any(axis=1))
            expected = np.flatnonzero(lattice.coset_labels[:, depth] == label)
            if not np.array_equal(users, expected):
                raise ValidationError(f"pilot {pid} is not used exactly by coset {(depth, label)}")
            if int((pilots == pid).sum()) != len(expected):
                raise ValidationError(f"pilot {pid} used more than once in a cell")


def realize(p: PilotVector, lattice: TorusLattice) -> PilotRealization:
    """Turn ``p`` into a per-cell pilot map by growing the partition tree.

    Each of the ``K`` root tokens stands for one pilot slot of every cell.
    At depth ``i`` the first ``p_i`` tokens (ordered by coset label, then
    slot) become leaves, i.e. pilots; the rest split into their three child
    cosets.
    """
    _require_valid(p)
    if len(p.entries) != lattice.m:
        raise ConfigurationError(f"{p} needs a lattice with 3**{len(p.entries)} cells")
    tokens = [(0, slot) for slot in range(p.k)]  # (coset label, root slot)
    pilot_cosets: list[tuple[int, int]] = []
    pilot_slot: list[int] = []
    for depth, leaves in enumerate(p.entries):
        tokens.sort()
        for label, slot in tokens[:leaves]:
            pilot_cosets.append((depth, label))
            pilot_slot.append(slot)
        tokens = [(3 * label + digit, slot) for label, slot in tokens[leaves:] for digit in range(3)]
    assert not tokens

    cell_pilots = np.full((lattice.n_cells, p.k), -1, dtype=np.int64)
    for pid, ((depth, label), slot) in enumerate(zip(pilot_cosets, pilot_slot)):
        cell_pilots[lattice.coset_labels[:, depth] == label, slot] = pid
    return PilotRealization(cell_pilots, tuple(pilot_cosets))


def closed_form_chain(cells: int, k: int = 1) -> Iterable[PilotVector]:
    """Closed-form optima for every valid length, generated by repeated :func:`corollary_step`."""
    p = PilotVector((k,) + (0,) * (levels_for(cells) - 1), k)
    yield p
    while pilot_length(p) < max_length(cells, k):
        p = corollary_step(p)
        yield p

