"""Slow-fading channel model and Monte Carlo estimation of per-depth user rates.

Only the large-antenna limit of the downlink rate is needed, so fast fading
never enters: a user's rate is ``log2(1 + beta_own**2 / sum(beta_l**2))``
with ``beta = z / r**gamma`` and log-normal ``z``.

Random streams are derived from the master seed through
:class:`numpy.random.SeedSequence` with a ``(tag, depth, block)`` spawn key,
one stream per fixed-size block of trials.  Blocks are the unit of parallel
work, so results do not depend on how many workers run them.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .exceptions import ConfigurationError, DomainError
from .lattice import SQRT3, TorusLattice

BLOCK_TRIALS = 4096

# Spawn-key tags keep unrelated experiments on disjoint streams.
_TAG_DEPTH_RATES = 0
_TAG_RANDOM_ASSIGNMENT = 1

Sampler = Callable[[np.random.Generator, int], np.ndarray]


@dataclass(frozen=True)
class FadingParams:
    gamma: float = 3.8
    shadow_sigma_db: float = 8.0
    cell_radius_m: float = 1600.0
    hole_radius_m: float = 100.0

    def __post_init__(self):
        if not self.gamma > 2:
            raise ConfigurationError(f"decay exponent must exceed 2, got {self.gamma}")
        if not self.shadow_sigma_db >= 0:
            raise ConfigurationError(f"shadow sigma must be >= 0 dB, got {self.shadow_sigma_db}")
        if not self.cell_radius_m > 0:
            raise ConfigurationError(f"cell radius must be positive, got {self.cell_radius_m}")
        inradius = SQRT3 / 2 * self.cell_radius_m
        if not 0 <= self.hole_radius_m < inradius:
            raise ConfigurationError(
                f"hole radius {self.hole_radius_m} must lie in [0, {inradius:.3f}) (cell inradius)"
            )


@dataclass(frozen=True)
class DepthRateTable:
    """Estimated asymptotic rate ``C_d`` (bits/s/Hz) for each tree depth ``d``."""

    rates: tuple[float, ...]
    stderr: tuple[float, ...]
    trials: int
    seed: int
    params: FadingParams

    def __len__(self):
        return len(self.rates)

    def __getitem__(self, depth):
        return self.rates[depth]

    def __iter__(self):
        return iter(self.rates)


def block_generator(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the substream addressed by ``key``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def _in_hexagon(x: np.ndarray, y: np.ndarray, radius: float) -> np.ndarray:
    # Vertices at 30 + 60k degrees: flat sides face the six neighbours along e1.
    ax, ay = np.abs(x), np.abs(y)
    return (ax <= SQRT3 / 2 * radius) & (ax / SQRT3 + ay <= radius)


def sample_offsets(rng: np.random.Generator, n: int, cell_radius_m: float, hole_radius_m: float) -> np.ndarray:
    """``n`` points uniform over the hexagon minus the central hole, relative to the center."""
    out = np.empty((n, 2))
    filled = 0
    while filled < n:
        need = n - filled
        cand = rng.uniform(-cell_radius_m, cell_radius_m, size=(int(need * 1.7) + 16, 2))
        x, y = cand[:, 0], cand[:, 1]
        keep = _in_hexagon(x, y, cell_radius_m) & (np.hypot(x, y) >= hole_radius_m)
        accepted = cand[keep][:need]
        out[filled:filled + len(accepted)] = accepted
        filled += len(accepted)
    return out


def draw_position(lattice: TorusLattice, cell, rng: np.random.Generator, hole_radius_m: float = 100.0) -> np.ndarray:
    """One user position (meters) uniform in ``cell`` outside the hole around its base station."""
    offset = sample_offsets(rng, 1, lattice.cell_radius_m, hole_radius_m)[0]
    return lattice.center(cell) + offset


def slow_fade(distance_m, z, params):
    """``z / r**gamma``; ``params`` is a :class:`FadingParams` or a bare exponent."""
    gamma = getattr(params, "gamma", params)
    distance_m = np.asarray(distance_m, dtype=float)
    if np.any(distance_m <= 0):
        raise DomainError("slow fading needs a strictly positive distance")
    out = np.asarray(z, dtype=float) / distance_m ** gamma
    return float(out) if out.ndim == 0 else out


def shadow_draw(rng: np.random.Generator, shadow_sigma_db: float, size=None):
    """Log-normal shadowing factor ``10**(X/10)`` with ``X ~ N(0, sigma_dB**2)``."""
    return 10.0 ** (rng.normal(0.0, shadow_sigma_db, size=size) / 10.0)


def asymptotic_rate(beta_own, beta_interferers) -> float:
    """Large-antenna rate ``log2(1 + beta_own**2 / sum(beta_l**2))``."""
    interferers = np.asarray(beta_interferers, dtype=float)
    if interferers.size == 0:
        raise DomainError("at least one co-pilot interferer is required (rate would be infinite)")
    if not beta_own > 0:
        raise DomainError("own-link slow fading must be positive")
    return float(np.log2(1.0 + beta_own ** 2 / np.sum(interferers ** 2)))


def _block_sizes(trials: int) -> list[int]:
    full, rest = divmod(trials, BLOCK_TRIALS)
    return [BLOCK_TRIALS] * full + ([rest] if rest else [])


def run_blocks(fn, trials: int, workers: int = 1) -> list:
    """Apply ``fn(block_index, block_size)`` over all blocks, results in block order."""
    sizes = _block_sizes(trials)
    if workers <= 1 or len(sizes) == 1:
        return [fn(i, n) for i, n in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(len(sizes)), sizes))


def _depth_block_rates(lattice, params, depth, seed, block, n,
                       desired_sampler: Optional[Sampler], interferer_sampler: Optional[Sampler]):
    rng = block_generator(seed, _TAG_DEPTH_RATES, depth, block)
    centers = lattice.centers()
    copilots = lattice.copilot_indices(0, depth)
    copilots = copilots[copilots != 0]
    n_int = len(copilots)

    def offsets(sampler, count):
        if sampler is not None:
            return np.asarray(sampler(rng, count), dtype=float).reshape(count, 2)
        return sample_offsets(rng, count, params.cell_radius_m, params.hole_radius_m)

    own = offsets(desired_sampler, n)
    z_own = shadow_draw(rng, params.shadow_sigma_db, n)
    pts = offsets(interferer_sampler, n * n_int).reshape(n, n_int, 2) + centers[copilots]
    z_int = shadow_draw(rng, params.shadow_sigma_db, (n, n_int))

    beta_own = z_own / np.hypot(own[:, 0], own[:, 1]) ** params.gamma
    beta_int = z_int / lattice.torus_distance(pts, centers[0]) ** params.gamma
    return np.log2(1.0 + beta_own ** 2 / np.sum(beta_int ** 2, axis=1))


def estimate_depth_rates(lattice: TorusLattice, params: FadingParams, trials: int = 100_000,
                         seed: int = 0, workers: int = 1, *,
                         desired_sampler: Optional[Sampler] = None,
                         interferer_sampler: Optional[Sampler] = None) -> DepthRateTable:
    """Monte Carlo estimate of ``C_d`` for ``d = 0..m-1``.

    In every trial the desired user is dropped in the reference cell (index
    0, base station at its center) and one interferer is dropped in each
    other cell of the reference cell's depth-``d`` coset; every link gets its
    own shadowing draw.  ``C_d`` is the sample mean of the per-trial rate.

    ``desired_sampler`` / ``interferer_sampler`` replace the uniform user
    placement; each is called as ``sampler(rng, n)`` and must return ``n``
    offsets from the cell center.
    """
    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials}")
    if not math.isclose(params.cell_radius_m, lattice.cell_radius_m):
        raise ConfigurationError("fading parameters and lattice disagree on the cell radius")
    means, errs = [], []
    for depth in range(lattice.max_depth + 1):
        def work(block, n, depth=depth):
            return _depth_block_rates(lattice, params, depth, seed, block, n,
                                      desired_sampler, interferer_sampler)
        samples = np.concatenate(run_blocks(work, trials, workers))
        means.append(float(samples.mean()))
        errs.append(float(samples.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0)
    return DepthRateTable(tuple(means), tuple(errs), int(trials), int(seed), params)


def linearity_residual(rates) -> float:
    """Largest ``|residual| / C_d`` of a least-squares line through ``C_d`` versus ``d``."""
    y = np.asarray(list(rates), dtype=float)
    d = np.arange(len(y))
    slope, intercept = np.polyfit(d, y, 1)
    return float(np.max(np.abs(y - (slope * d + intercept)) / np.abs(y)))
