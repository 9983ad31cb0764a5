"""Net-rate objectives, baseline schemes and comparison curves."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .assignment import PilotVector, c_net, c_sum, net_argmax_grid, pilot_length
from .channel import (
    _TAG_RANDOM_ASSIGNMENT,
    FadingParams,
    block_generator,
    run_blocks,
    sample_offsets,
    shadow_draw,
)
from .exceptions import ConfigurationError, DomainError
from .lattice import TorusLattice

__all__ = [
    "c_sum",
    "c_net",
    "crossover_threshold",
    "net_rate_per_user",
    "RandomAssignmentEstimate",
    "random_assignment_estimate",
    "random_assignment_net_rate",
    "MonteCarloConfig",
    "NetRateCurve",
    "build_curve",
    "SCHEMES",
    "SEMANTICS",
]

SCHEMES = ("optimal", "full_reuse", "random")
# value semantics -> x-axis semantics
SEMANTICS = {
    "c_net": "ncoh",
    "c_net_per_user": "ncoh_per_user",
    "c_net_per_ncoh": "ncoh_per_user",
}


def crossover_threshold(sir_linear: float, gamma: float) -> float:
    """``N_coh / K`` above which reuse-3 beats full reuse for a single worst-case interferer."""
    if not sir_linear > 0 or not gamma > 0:
        raise DomainError("SIR and decay exponent must be positive")
    return 3.0 + math.log2(sir_linear) / gamma


def net_rate_per_user(p: PilotVector, n_coh: float, rates) -> float:
    """``C_net / K`` in floating point, using weights ``p_i / (K 3**i)``.

    For a one-hot ``p = K 3**i e_i`` the weight is exactly 1, so the value
    depends on ``N_coh / K`` only, bit for bit.
    """
    if not n_coh > 0:
        raise DomainError("coherence interval must be positive")
    c = tuple(float(v) for v in getattr(rates, "rates", rates))
    if len(c) != len(p.entries):
        raise ConfigurationError(f"rate table has {len(c)} depths but {p} has {len(p.entries)}")
    per_user = sum((e / (p.k * 3 ** i)) * c[i] for i, e in enumerate(p.entries))
    return (n_coh - pilot_length(p)) / n_coh * per_user


# --------------------------------------------------------------------------
# random pilot assignment baseline


@dataclass(frozen=True)
class RandomAssignmentEstimate:
    n_pilots: int
    k: int
    sum_rate: float  # mean per-cell sum of user rates, before the pilot overhead
    stderr: float
    cap_fraction: float  # share of users with no co-pilot interferer (rate capped)
    trials: int
    seed: int

    def net_rate(self, n_coh: float) -> float:
        return (1.0 - self.n_pilots / n_coh) * self.sum_rate


def _random_block(lattice, params, n_pil, k, seed, block, n):
    rng = block_generator(seed, _TAG_RANDOM_ASSIGNMENT, n_pil, k, block)
    centers = lattice.centers()
    others = lattice.n_cells - 1
    # By symmetry the reference cell's users hold pilots 0..K-1.  Each other
    # cell picks a uniform K-subset of the n_pil pilots; only its overlap with
    # the reference pilots matters: hypergeometric size, uniform positions.
    hits = rng.hypergeometric(k, n_pil - k, k, size=(n, others)) if n_pil > k else np.full((n, others), k)
    rank = np.argsort(np.argsort(rng.random((n, others, k)), axis=2), axis=2)
    collide = rank < hits[..., None]  # (trial, cell, reference slot)

    own = sample_offsets(rng, n * k, params.cell_radius_m, params.hole_radius_m).reshape(n, k, 2)
    z_own = shadow_draw(rng, params.shadow_sigma_db, (n, k))
    trial, cell, slot = np.nonzero(collide)  # positions are only needed for actual collisions
    pts = sample_offsets(rng, len(trial), params.cell_radius_m, params.hole_radius_m) + centers[1 + cell]
    z_int = shadow_draw(rng, params.shadow_sigma_db, len(trial))

    beta_own = z_own / np.hypot(own[..., 0], own[..., 1]) ** params.gamma
    beta_int = z_int / lattice.torus_distance(pts, centers[0]) ** params.gamma
    interference = np.bincount(trial * k + slot, weights=beta_int ** 2, minlength=n * k).reshape(n, k)
    capped = interference == 0.0
    floor = lattice.torus_diameter() ** (-2.0 * params.gamma)
    rates = np.log2(1.0 + beta_own ** 2 / np.where(capped, floor, interference))
    return rates.sum(axis=1), int(capped.sum())


def random_assignment_estimate(n_pil: int, k: int, lattice: TorusLattice, params: FadingParams,
                               trials: int = 10_000, seed: int = 0, workers: int = 1) -> RandomAssignmentEstimate:
    """Monte Carlo per-cell sum rate when every cell draws its ``K`` pilots at random.

    Each cell assigns its users ``K`` distinct pilots chosen uniformly from
    ``n_pil``; a user's interferers are the same-pilot users of all other
    cells.  A user with no interferer anywhere has its rate capped at the
    value it would get from one unshadowed interferer at the torus diameter.
    """
    if n_pil < k:
        raise DomainError(f"{n_pil} pilots cannot keep {k} users per cell orthogonal")
    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials}")

    def work(block, n):
        return _random_block(lattice, params, n_pil, k, seed, block, n)

    parts = run_blocks(work, trials, workers)
    sums = np.concatenate([p[0] for p in parts])
    capped = sum(p[1] for p in parts)
    stderr = float(sums.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return RandomAssignmentEstimate(int(n_pil), int(k), float(sums.mean()), stderr,
                                    capped / (trials * k), int(trials), int(seed))


def random_assignment_net_rate(n_pil: int, n_coh: float, k: int, lattice: TorusLattice,
                               params: FadingParams, trials: int = 10_000, seed: int = 0,
                               workers: int = 1) -> float:
    return random_assignment_estimate(n_pil, k, lattice, params, trials, seed, workers).net_rate(n_coh)


# --------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class MonteCarloConfig:
    trials: int = 10_000
    seed: int = 0
    workers: int = 1


@dataclass(frozen=True)
class NetRateCurve:
    scheme: str
    k: int
    semantics: str
    x: tuple[float, ...]
    values: tuple[float, ...]
    npil: tuple[int, ...]

    @property
    def x_semantics(self) -> str:
        return SEMANTICS[self.semantics]

    def points(self):
        return list(zip(self.x, self.values))

    def argmax_x(self) -> float:
        return self.x[int(np.argmax(self.values))]


def _scale(net: float, n_coh: float, k: int, semantics: str) -> float:
    if semantics == "c_net":
        return net
    if semantics == "c_net_per_user":
        return net / k
    return net / n_coh


def ncoh_grid(k: int, ncoh_max: Optional[int] = None) -> list[int]:
    """Default abscissae: ``N_coh = K, 2K, ..., 200K``."""
    top = 200 * k if ncoh_max is None else int(ncoh_max)
    return list(range(k, top + 1, k))


def build_curve(scheme: str, semantics: str, grid: Sequence[float], k: int, rates,
                lattice: Optional[TorusLattice] = None, params: Optional[FadingParams] = None,
                mc: Optional[MonteCarloConfig] = None) -> NetRateCurve:
    """Evaluate one scheme over a grid of coherence intervals.

    ``optimal`` takes the exhaustive net-rate argmax at each point,
    ``full_reuse`` the vector ``(K, 0, ..., 0)``, and ``random`` the Monte
    Carlo baseline using as many pilots as the optimal scheme.  The per-user
    semantics use ``C_sum / K`` computed with weights ``p_i / (K 3**i)`` so
    that one-hot vectors give results that are bit-identical across ``K``.
    """
    if scheme not in SCHEMES:
        raise ConfigurationError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
    if semantics not in SEMANTICS:
        raise ConfigurationError(f"unknown semantics {semantics!r}; choose from {tuple(SEMANTICS)}")
    grid = [float(g) for g in grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigurationError("coherence grid must be strictly increasing")
    c = tuple(float(v) for v in getattr(rates, "rates", rates))
    cells = 3 ** len(c)

    if scheme == "full_reuse":
        full = PilotVector((k,) + (0,) * (len(c) - 1), k)
        vectors = [full] * len(grid)
    else:
        vectors = net_argmax_grid(grid, c, cells, k)

    values, npil = [], []
    estimates: dict[int, object] = {}
    for n_coh, p in zip(grid, vectors):
        length = pilot_length(p)
        if scheme == "random":
            if lattice is None or params is None:
                raise ConfigurationError("the random scheme needs a lattice and fading parameters")
            mc = mc or MonteCarloConfig()
            if length not in estimates:
                estimates[length] = random_assignment_estimate(length, k, lattice, params,
                                                               mc.trials, mc.seed, mc.workers)
            net = estimates[length].net_rate(n_coh)
            value = _scale(net, n_coh, k, semantics)
        elif semantics == "c_net_per_user":
            value = net_rate_per_user(p, n_coh, c)
        else:
            value = _scale(c_net(p, n_coh, c), n_coh, k, semantics)
        values.append(float(value))
        npil.append(length)
    x = grid if semantics == "c_net" else [g / k for g in grid]
    return NetRateCurve(scheme, int(k), semantics, tuple(x), tuple(values), tuple(npil))

