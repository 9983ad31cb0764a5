"""CSV readers and writers for rate tables, assignment tables and curves.

Every file starts with ``#`` comment lines carrying provenance; floats are
written with ``repr`` so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, fields
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .assignment import PilotVector, pilot_length
from .channel import DepthRateTable, FadingParams
from .exceptions import ValidationError
from .netrate import NetRateCurve


def _params_line(params: FadingParams) -> str:
    return "# params: " + " ".join(f"{k}={v!r}" for k, v in asdict(params).items())


def _write(path, comments: Iterable[str], header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    buf = io.StringIO()
    for line in comments:
        buf.write(line.rstrip("\n") + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path = Path(path)
    path.write_text(buf.getvalue())
    return path


def write_rate_table(table: DepthRateTable, path) -> Path:
    comments = [_params_line(table.params), f"# pilotreuse {__version__}"]
    rows = [(d, repr(r), repr(e), table.trials, table.seed)
            for d, (r, e) in enumerate(zip(table.rates, table.stderr))]
    return _write(path, comments, ["depth", "rate_bits", "stderr", "trials", "seed"], rows)


def read_rate_table(path) -> DepthRateTable:
    text = Path(path).read_text()
    params = FadingParams()
    body = []
    for line in text.splitlines():
        if line.startswith("# params:"):
            values = dict(item.split("=", 1) for item in line[len("# params:"):].split())
            names = {f.name for f in fields(FadingParams)}
            params = FadingParams(**{k: float(v) for k, v in values.items() if k in names})
        elif not line.startswith("#"):
            body.append(line)
    rows = list(csv.DictReader(body))
    if not rows:
        raise ValidationError(f"{path}: no rate rows")
    rows.sort(key=lambda r: int(r["depth"]))
    if [int(r["depth"]) for r in rows] != list(range(len(rows))):
        raise ValidationError(f"{path}: depths must be 0..n-1")
    return DepthRateTable(
        rates=tuple(float(r["rate_bits"]) for r in rows),
        stderr=tuple(float(r["stderr"]) for r in rows),
        trials=int(rows[0]["trials"]),
        seed=int(rows[0]["seed"]),
        params=params,
    )


def sweep_rows(n_coh_values: Sequence[int], vectors: Sequence[PilotVector]) -> list[tuple]:
    """Merge consecutive equal optima into ``(start, end, vector, npil)`` runs.

    The last run's end is ``None`` (open-ended).
    """
    runs: list[list] = []
    for n, p in zip(n_coh_values, vectors):
        if runs and runs[-1][2] == p:
            runs[-1][1] = n
        else:
            runs.append([n, n, p])
    rows = [(s, e, p, pilot_length(p)) for s, e, p in runs]
    if rows:
        s, _, p, n = rows[-1]
        rows[-1] = (s, None, p, n)
    return rows


def write_assignment_table(rows, path, comments: Iterable[str] = ()) -> Path:
    out = [(s, "" if e is None else e, str(p), n) for s, e, p, n in rows]
    return _write(path, [*comments, f"# pilotreuse {__version__}"],
                  ["ncoh_range_start", "ncoh_range_end", "p_vector", "npil"], out)


def read_assignment_table(path, k: int = 1) -> list[tuple]:
    body = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    rows = []
    for r in csv.DictReader(body):
        end = int(r["ncoh_range_end"]) if r["ncoh_range_end"] else None
        rows.append((int(r["ncoh_range_start"]), end, PilotVector.parse(r["p_vector"], k), int(r["npil"])))
    return rows


def write_curve(curve: NetRateCurve, path, comments: Iterable[str] = ()) -> Path:
    rows = [(curve.scheme, curve.k, curve.x_semantics, repr(x), repr(v), n)
            for x, v, n in zip(curve.x, curve.values, curve.npil)]
    return _write(path, [*comments, f"# semantics: {curve.semantics}", f"# pilotreuse {__version__}"],
                  ["scheme", "K", "x_semantics", "x", "value", "npil"], rows)


def read_curve(path) -> list[dict]:
    body = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    return [dict(r) for r in csv.DictReader(body)]
