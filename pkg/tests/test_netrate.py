import math

import numpy as np
import pytest
from reference import TABLE_COMPATIBLE, vec

from pilotreuse import (
    ConfigurationError,
    DomainError,
    FadingParams,
    build_curve,
    build_lattice,
    c_net,
    crossover_threshold,
    enumerate_valid,
    estimate_depth_rates,
    net_rate_per_user,
    optimal_assignment,
    random_assignment_net_rate,
)
from pilotreuse.channel import BLOCK_TRIALS
from pilotreuse.netrate import MonteCarloConfig, ncoh_grid, random_assignment_estimate


@pytest.fixture(scope="module")
def lat81():
    return build_lattice(4, 1600.0)


@pytest.fixture(scope="module")
def sim(lat81):
    return estimate_depth_rates(lat81, FadingParams(), trials=20_000, seed=77)


def test_crossover_examples():
    assert crossover_threshold(1.0, 3.8) == 3.0
    assert crossover_threshold(2 ** 3.8, 3.8) == pytest.approx(4.0)
    assert crossover_threshold(10 ** 0.37, 3.8) == pytest.approx(3.32, abs=0.005)
    with pytest.raises(DomainError):
        crossover_threshold(0.0, 3.8)


def test_random_single_pilot_is_full_reuse(lat81, sim):
    est = random_assignment_estimate(1, 1, lat81, FadingParams(), trials=20_000, seed=3)
    assert est.cap_fraction == 0.0
    tol = 4 * math.hypot(est.stderr, sim.stderr[0])
    assert est.sum_rate == pytest.approx(sim.rates[0], abs=tol)
    assert est.net_rate(10) == pytest.approx(0.9 * est.sum_rate)
    got = random_assignment_net_rate(1, 10, 1, lat81, FadingParams(), trials=20_000, seed=3)
    assert got == est.net_rate(10)


def test_random_beats_full_reuse_eventually(lat81, sim):
    n_coh = 150
    full = c_net(vec((1, 0, 0, 0)), n_coh, sim.rates)
    rand = random_assignment_net_rate(27, n_coh, 1, lat81, FadingParams(), trials=5000, seed=1)
    assert rand > full


def test_random_below_optimal(lat81, sim):
    rates = sim.rates
    grid = [10, 20, 40, 80, 150]
    optimal = build_curve("optimal", "c_net", grid, 1, rates)
    random = build_curve("random", "c_net", grid, 1, rates, lat81, FadingParams(), MonteCarloConfig(5000, 2))
    assert random.npil == optimal.npil
    assert all(r < o for r, o in zip(random.values, optimal.values))


def test_random_k2_uses_distinct_pilots(lat81):
    est = random_assignment_estimate(2, 2, lat81, FadingParams(), trials=500, seed=0)
    # with exactly K pilots every cell collides on both slots, like full reuse
    assert est.cap_fraction == 0.0
    with pytest.raises(DomainError):
        random_assignment_estimate(1, 2, lat81, FadingParams(), trials=10)
    with pytest.raises(ConfigurationError):
        random_assignment_estimate(3, 2, lat81, FadingParams(), trials=0)


def test_random_worker_determinism(lat81):
    trials = BLOCK_TRIALS + 100
    a = random_assignment_estimate(9, 1, lat81, FadingParams(), trials=trials, seed=8, workers=1)
    b = random_assignment_estimate(9, 1, lat81, FadingParams(), trials=trials, seed=8, workers=4)
    assert a == b


def test_random_cap_fraction(lat81):
    # with 27 pilots a user has no co-pilot in any of 80 cells with prob (26/27)**80
    est = random_assignment_estimate(27, 1, lat81, FadingParams(), trials=20_000, seed=4)
    p = (26 / 27) ** 80
    assert est.cap_fraction == pytest.approx(p, abs=4 * math.sqrt(p * (1 - p) / 20_000))


@pytest.mark.parametrize("k", [1, 2, 14])
def test_full_reuse_per_ncoh_peak(k, sim):
    curve = build_curve("full_reuse", "c_net_per_ncoh", ncoh_grid(k), k, sim.rates)
    assert curve.argmax_x() == 2
    assert curve.x_semantics == "ncoh_per_user"
    # closed form: (N - K) / N**2 * K C_0 = (x - 1) / x**2 * C_0 with x = N_coh / K
    x = np.array(curve.x)
    assert np.allclose(curve.values, (x - 1) / x ** 2 * sim.rates[0], rtol=1e-12)


def test_one_hot_per_user_invariance(sim):
    xs = range(1, 201)
    for depth in range(4):
        values = []
        for k in (1, 2, 14):
            entries = [0, 0, 0, 0]
            entries[depth] = k * 3 ** depth
            p = vec(entries, k)
            values.append([net_rate_per_user(p, k * x, sim.rates) for x in xs])
        assert values[0] == values[1] == values[2]


def test_full_reuse_curve_per_user_invariance(sim):
    curves = [build_curve("full_reuse", "c_net_per_user", ncoh_grid(k), k, sim.rates) for k in (1, 2, 14)]
    assert curves[0].x == curves[1].x == curves[2].x
    assert curves[0].values == curves[1].values == curves[2].values


def test_dominance(sim):
    grid = ncoh_grid(1)
    optimal = build_curve("optimal", "c_net", grid, 1, sim.rates)
    full = build_curve("full_reuse", "c_net", grid, 1, sim.rates)
    every = enumerate_valid(81, 1)
    for n_coh, o, f in zip(grid, optimal.values, full.values):
        assert o >= f
        assert o >= max(float(c_net(p, n_coh, sim.rates)) for p in every) - 1e-12


def test_curve_scaling(sim):
    grid = ncoh_grid(2)
    base = build_curve("optimal", "c_net", grid, 2, sim.rates)
    scaled = build_curve("optimal", "c_net", grid, 2, [2.5 * c for c in sim.rates])
    assert base.npil == scaled.npil
    assert np.allclose(scaled.values, 2.5 * np.array(base.values), rtol=1e-12)


def test_curve_semantics(sim):
    grid = [2, 4, 6]
    net = build_curve("optimal", "c_net", grid, 2, sim.rates)
    per_user = build_curve("optimal", "c_net_per_user", grid, 2, sim.rates)
    per_ncoh = build_curve("optimal", "c_net_per_ncoh", grid, 2, sim.rates)
    assert net.x == (2.0, 4.0, 6.0) and per_user.x == (1.0, 2.0, 3.0)
    assert np.allclose(per_user.values, np.array(net.values) / 2)
    assert np.allclose(per_ncoh.values, np.array(net.values) / np.array(grid))


def test_curve_errors(sim):
    with pytest.raises(ConfigurationError):
        build_curve("greedy", "c_net", [1, 2], 1, sim.rates)
    with pytest.raises(ConfigurationError):
        build_curve("optimal", "bits", [1, 2], 1, sim.rates)
    with pytest.raises(ConfigurationError):
        build_curve("optimal", "c_net", [2, 1], 1, sim.rates)
    with pytest.raises(ConfigurationError):
        build_curve("random", "c_net", [1, 2], 1, sim.rates)


def test_optimal_curve_matches_closed_form():
    # exact ties sit on integer N_coh here, so compare values rather than vectors
    grid = ncoh_grid(1)
    curve = build_curve("optimal", "c_net", grid, 1, [float(c) for c in TABLE_COMPATIBLE])
    for n_coh, value in zip(grid, curve.values):
        p = optimal_assignment(n_coh, TABLE_COMPATIBLE, 81, 1)
        assert value == pytest.approx(float(c_net(p, n_coh, TABLE_COMPATIBLE)), rel=1e-12, abs=1e-12)


def test_ncoh_grid():
    assert ncoh_grid(1)[:3] == [1, 2, 3] and ncoh_grid(1)[-1] == 200
    assert ncoh_grid(14)[-1] == 2800 and len(ncoh_grid(14)) == 200
    assert ncoh_grid(2, 10) == [2, 4, 6, 8, 10]
