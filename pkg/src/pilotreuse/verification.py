"""Property suites checking the closed forms against exhaustive enumeration.

:func:`run_verification` returns a JSON-serialisable report; the ``verify``
CLI subcommand prints it and exits non-zero when any property fails.
"""

from __future__ import annotations

import time
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .assignment import (
    PilotVector,
    breakpoints,
    brute_force_optimal,
    c_net,
    c_sum,
    closed_form_sum_opt,
    enumerate_valid,
    closed_form_chain,
    net_argmax_grid,
    optimal_assignment,
    pilot_length,
    realize,
    to_transition,
    from_transition,
    valid_lengths,
)
from .exceptions import DomainError
from .lattice import build_lattice


def random_linear_tables(rng: np.random.Generator, count: int, depths: int, exact: bool = True) -> list[tuple]:
    """Strictly increasing tables ``C_i = c0 + d*i`` with random ``c0, d > 0``."""
    tables = []
    for _ in range(count):
        c0 = int(rng.integers(1, 200))
        d = int(rng.integers(1, 200))
        den = int(rng.integers(1, 20))
        if exact:
            tables.append(tuple(Fraction(c0 + d * i, den) for i in range(depths)))
        else:
            tables.append(tuple((c0 + d * i) / den for i in range(depths)))
    return tables


def crossing(lo_len: int, hi_len: int, s_lo: float, s_hi: float) -> float:
    """``N_coh`` where ``(N-lo)/N*s_lo == (N-hi)/N*s_hi``, found by bracketing root search."""
    f = lambda n: (n - lo_len) / n * s_lo - (n - hi_len) / n * s_hi  # noqa: E731
    hi = float(hi_len) * 2
    while f(hi) > 0:
        hi *= 2
    return brentq(f, float(hi_len), hi, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=500)


# --------------------------------------------------------------------------
# individual properties; each returns (passed, detail)


def check_valid_lengths(cells, k):
    lengths = sorted({pilot_length(p) for p in enumerate_valid(cells, k)})
    return lengths == valid_lengths(cells, k), f"lengths={lengths}"


def check_transition_bounds(cells, k):
    for p in enumerate_valid(cells, k):
        t = to_transition(p).entries
        if any(not 0 <= x <= k * 3 ** i for i, x in enumerate(t)):
            return False, f"{p}: t={t} violates 0 <= t_i <= K 3^i"
        if 2 * sum(t) != pilot_length(p) - k:
            return False, f"{p}: sum(t)={sum(t)} != (N-K)/2"
    return True, ""


def check_roundtrip(cells, k):
    for p in enumerate_valid(cells, k):
        if from_transition(to_transition(p)) != p:
            return False, f"round trip failed for {p}"
    return True, ""


def check_step_chain(cells, k):
    chain = list(closed_form_chain(cells, k))
    expected = [closed_form_sum_opt(n, cells, k) for n in valid_lengths(cells, k)]
    return chain == expected, f"{len(chain)} steps"


def check_closed_form_sum(cells, k, tables):
    by_length: dict[int, list[PilotVector]] = {}
    for p in enumerate_valid(cells, k):
        by_length.setdefault(pilot_length(p), []).append(p)
    for c in tables:
        for n, group in by_length.items():
            best = max(c_sum(p, c) for p in group)
            got = c_sum(closed_form_sum_opt(n, cells, k), c)
            if got != best:
                return False, f"length {n}, table {c}: closed form {got} < max {best}"
    return True, f"{len(tables)} tables"


def check_breakpoints(cells, k, tables, rel_tol=1e-9):
    worst = 0.0
    for c in tables:
        deltas = breakpoints(c, cells, k).deltas
        sums = {n: float(c_sum(brute_force_optimal("sum", n, c, cells, k), c)) for n in valid_lengths(cells, k)}
        for idx, delta in enumerate(deltas, start=1):
            lo = 2 * idx + k - 2
            x = crossing(lo, lo + 2, sums[lo], sums[lo + 2]) / k
            err = abs(float(delta) - x) / x
            worst = max(worst, err)
            if err > rel_tol:
                return False, f"Delta_{idx}={float(delta)!r} vs crossing {x!r} (rel {err:.2e})"
    return True, f"max rel err {worst:.2e}"


def check_net_optimum(cells, k, tables):
    grid = list(range(k, 4 * cells * k + 1))
    for c in tables:
        oracle = net_argmax_grid(grid, c, cells, k)
        for n_coh, best in zip(grid, oracle):
            p = optimal_assignment(n_coh, c, cells, k)
            got, want = c_net(p, n_coh, c), c_net(best, n_coh, c)
            if not np.isclose(got, want, rtol=1e-12, atol=1e-12):
                return False, f"N_coh={n_coh}: closed form {p} ({got}) vs oracle {best} ({want})"
    return True, f"{len(grid)} coherence values x {len(tables)} tables"


def check_monotone_length(cells, k, tables):
    for c in tables:
        lengths = [pilot_length(optimal_assignment(n, c, cells, k)) for n in range(k, 4 * cells * k + 1)]
        if any(b < a for a, b in zip(lengths, lengths[1:])):
            return False, f"pilot length decreases for table {c}"
    return True, ""


def check_realizations(cells, k):
    lattice = build_lattice(_levels(cells), 1.0)
    for p in enumerate_valid(cells, k):
        real = realize(p, lattice)
        real.validate(lattice)
        if real.n_pilots != pilot_length(p):
            return False, f"{p}: {real.n_pilots} pilots realised"
    return True, ""


def check_zero_crossing(cells, k, tables):
    for c in tables:
        for p in enumerate_valid(cells, k):
            if c_net(p, pilot_length(p), c) != 0:
                return False, f"{p} does not vanish at N_coh = N_pil"
    return True, ""


def check_scale_invariance(cells, k, tables):
    for c in tables:
        scaled = tuple(3 * x / 7 for x in c)
        if breakpoints(c, cells, k).deltas != breakpoints(scaled, cells, k).deltas:
            return False, "breakpoints change under rate scaling"
        for n_coh in range(k, 2 * cells * k, 5):
            if brute_force_optimal("net", n_coh, c, cells, k) != brute_force_optimal("net", n_coh, scaled, cells, k):
                return False, f"argmax changes under scaling at N_coh={n_coh}"
    return True, ""


def check_enumeration_count():
    n = len(enumerate_valid(81, 1))
    return n == 23, f"{n} vectors"


def check_rate_table(rates, cells, k):
    """Closed form against exhaustive search on a supplied (e.g. simulated) table."""
    try:
        breakpoints(rates, cells, k)
    except DomainError as exc:
        return False, f"breakpoints: {exc}"
    grid = list(range(k, 200 * k + 1))
    oracle = net_argmax_grid(grid, rates, cells, k)
    mismatches = [n for n, best in zip(grid, oracle)
                  if not np.isclose(c_net(optimal_assignment(n, rates, cells, k), n, rates),
                                    c_net(best, n, rates), rtol=1e-12)]
    if mismatches:
        return False, f"closed form differs from exhaustive optimum at N_coh={mismatches[:5]}"
    return True, f"{len(grid)} coherence values"


def _levels(cells):
    n = 0
    while cells > 1:
        cells //= 3
        n += 1
    return n


# --------------------------------------------------------------------------


def run_verification(cells_list=(9, 81), ks=(1, 2, 3), seed: int = 0, n_tables: int = 100,
                     rates=None, rate_table_k: tuple = (1, 2)) -> dict:
    """Run every property suite and collect a report.

    ``rates`` optionally adds checks on a supplied rate table (L = 3**len).
    """
    rng = np.random.default_rng(seed)
    results = []

    def record(name, fn: Callable[[], tuple], **where):
        start = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing property is a failing property
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append({"property": name, **where, "passed": bool(ok), "detail": detail,
                        "seconds": round(time.perf_counter() - start, 4)})

    t0 = time.perf_counter()
    record("enumeration_count", check_enumeration_count, cells=81, k=1)
    for cells in cells_list:
        depths = _levels(cells)
        exact_tables = random_linear_tables(rng, n_tables, depths, exact=True)
        float_tables = random_linear_tables(rng, 5, depths, exact=False)
        for k in ks:
            where = {"cells": cells, "k": k}
            record("valid_lengths", lambda: check_valid_lengths(cells, k), **where)
            record("transition_bounds", lambda: check_transition_bounds(cells, k), **where)
            record("transition_roundtrip", lambda: check_roundtrip(cells, k), **where)
            record("step_chain", lambda: check_step_chain(cells, k), **where)
            record("closed_form_sum_vs_oracle", lambda: check_closed_form_sum(cells, k, exact_tables), **where)
            record("breakpoint_crossings", lambda: check_breakpoints(cells, k, float_tables), **where)
            record("net_optimum_vs_oracle", lambda: check_net_optimum(cells, k, float_tables), **where)
            record("monotone_pilot_length", lambda: check_monotone_length(cells, k, float_tables[:2]), **where)
            record("realization_valid", lambda: check_realizations(cells, k), **where)
            record("zero_crossing", lambda: check_zero_crossing(cells, k, exact_tables[:3]), **where)
            record("scale_invariance", lambda: check_scale_invariance(cells, k, exact_tables[:1]), **where)
    if rates is not None:
        values = tuple(getattr(rates, "rates", rates))
        cells = 3 ** len(values)
        for k in rate_table_k:
            record("rate_table_consistency", lambda: check_rate_table(values, cells, k), cells=cells, k=k)
    return {
        "passed": all(r["passed"] for r in results),
        "failed": [r["property"] for r in results if not r["passed"]],
        "seed": seed,
        "runtime_seconds": round(time.perf_counter() - t0, 3),
        "results": results,
    }
