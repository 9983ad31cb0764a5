"""Command-line front end.

    pilotreuse rates    simulate per-depth rates C_d and cache them as CSV
    pilotreuse table    optimal assignment for every N_coh, merged into ranges
    pilotreuse optimal  single N_coh query, JSON answer
    pilotreuse curves   net-rate curves per scheme and value semantics
    pilotreuse verify   run the closed-form vs. enumeration property suites

Exit status: 0 success, 2 configuration error, 3 I/O error, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .assignment import (
    brute_force_optimal,
    c_net,
    closed_form_sum_opt,
    net_argmax_grid,
    optimal_assignment,
    pilot_length,
)
from .channel import estimate_depth_rates, linearity_residual
from .config import OUT_ENV, RunConfig, build_config, read_config_file
from .csvio import read_rate_table, sweep_rows, write_assignment_table, write_curve, write_rate_table
from .exceptions import ConfigurationError, DomainError, ValidationError
from .lattice import build_lattice
from .netrate import MonteCarloConfig, build_curve, ncoh_grid
from .verification import run_verification

log = logging.getLogger("pilotreuse")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_VERIFY = 4


class VerificationFailed(Exception):
    pass


def _ensure_out(config: RunConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_rates(config: RunConfig):
    path = config.rates or config.rate_cache_path()
    if not Path(path).exists():
        raise ConfigurationError(
            f"no rate table at {path}; run `pilotreuse rates` with the same parameters first "
            "or pass --rates PATH"
        )
    table = read_rate_table(path)
    if len(table.rates) != config.m:
        raise ConfigurationError(f"{path} has {len(table.rates)} depths but m={config.m}")
    return table


def cmd_rates(config: RunConfig) -> Path:
    lattice = build_lattice(config.m, config.params.cell_radius_m)
    table = estimate_depth_rates(lattice, config.params, config.trials, config.seed, config.workers)
    _ensure_out(config)
    path = write_rate_table(table, config.rates or config.rate_cache_path())
    for d, (r, e) in enumerate(zip(table.rates, table.stderr)):
        print(f"C_{d} = {r:.4f} +/- {e:.4f} bits/s/Hz")
    print(f"linear-fit max relative residual: {linearity_residual(table.rates):.3f}")
    print(f"wrote {path}")
    return path


def cmd_table(config: RunConfig) -> Path:
    table = _load_rates(config)
    grid = list(range(config.k, config.grid_max + 1))
    vectors = net_argmax_grid(grid, table.rates, config.cells, config.k)
    closed = [closed_form_sum_opt(pilot_length(p), config.cells, config.k) for p in vectors]
    disagreements = sum(p != q for p, q in zip(vectors, closed))
    if config.verify or disagreements:
        log.warning("closed form %s the exhaustive optimum (%d of %d coherence values differ)",
                    "matches" if not disagreements else "differs from", disagreements, len(grid))
    _ensure_out(config)
    path = Path(config.out) / f"table_K{config.k}.csv"
    write_assignment_table(sweep_rows(grid, vectors), path, config.provenance())
    print(f"wrote {path}")
    return path


def cmd_optimal(config: RunConfig) -> dict:
    if config.ncoh is None:
        raise ConfigurationError("the optimal subcommand needs --ncoh")
    rates = _load_rates(config).rates
    best = brute_force_optimal("net", config.ncoh, rates, config.cells, config.k)
    closed = optimal_assignment(config.ncoh, rates, config.cells, config.k)
    answer = {
        "n_coh": config.ncoh,
        "K": config.k,
        "L": config.cells,
        "p_vector": str(best),
        "npil": pilot_length(best),
        "c_net": float(c_net(best, config.ncoh, rates)),
        "closed_form": str(closed),
        "closed_form_c_net": float(c_net(closed, config.ncoh, rates)),
        "closed_form_matches": best == closed,
    }
    print(json.dumps(answer, indent=2))
    return answer


def cmd_curves(config: RunConfig) -> list[Path]:
    table = _load_rates(config)
    lattice = build_lattice(config.m, config.params.cell_radius_m)
    mc = MonteCarloConfig(config.curve_trials, config.seed, config.workers)
    grid = ncoh_grid(config.k, config.grid_max)
    _ensure_out(config)
    paths = []
    for scheme in config.schemes:
        for semantics in config.semantics:
            curve = build_curve(scheme, semantics, grid, config.k, table.rates, lattice, config.params, mc)
            path = Path(config.out) / f"curve_{scheme}_{semantics}_K{config.k}.csv"
            write_curve(curve, path, config.provenance())
            paths.append(path)
            print(f"wrote {path}")
    return paths


def cmd_verify(config: RunConfig) -> dict:
    rates = None
    if config.rates is not None or config.rate_cache_path().exists():
        rates = _load_rates(config).rates
    report = run_verification(seed=config.seed, rates=rates)
    text = json.dumps(report, indent=2)
    print(text)
    (_ensure_out(config) / "verify.json").write_text(text + "\n")
    if not report["passed"]:
        raise VerificationFailed(", ".join(report["failed"]))
    return report


COMMANDS = {
    "rates": cmd_rates,
    "table": cmd_table,
    "optimal": cmd_optimal,
    "curves": cmd_curves,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value configuration file")
    common.add_argument("--m", type=int, help="lattice exponent, L = 3**m (default 4)")
    common.add_argument("--k", type=int, help="users per cell (default 1)")
    common.add_argument("--gamma", type=float, help="path-loss exponent (default 3.8)")
    common.add_argument("--sigma-db", type=float, help="shadowing std in dB (default 8)")
    common.add_argument("--cell-radius", type=float, help="cell radius in m (default 1600)")
    common.add_argument("--hole-radius", type=float, help="cell-hole radius in m (default 100)")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per depth (default 100000)")
    common.add_argument("--curve-trials", type=int, help="trials per random-baseline point (default 10000)")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--workers", type=int, help="parallel workers (results do not depend on it)")
    common.add_argument("--ncoh", type=int, help="coherence interval for `optimal`")
    common.add_argument("--ncoh-max", type=int, help="largest N_coh on the grid (default 200*K)")
    common.add_argument("--schemes", help="comma list of optimal,full_reuse,random")
    common.add_argument("--semantics", help="comma list of c_net,c_net_per_user,c_net_per_ncoh")
    common.add_argument("--rates", help="rate table CSV to write (rates) or read (others)")
    common.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./pilotreuse-out)")
    common.add_argument("--verify", action="store_true", default=None,
                        help="report closed-form vs exhaustive agreement")
    parser = argparse.ArgumentParser(prog="pilotreuse", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = dict(line.split(None, 2)[1:] for line in __doc__.splitlines() if line.startswith("    pilotreuse "))
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in {"command", "config"}}
    try:
        file_values = read_config_file(args.config) if args.config else {}
        config = build_config(file_values, overrides)
        COMMANDS[args.command](config)
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (ConfigurationError, DomainError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
