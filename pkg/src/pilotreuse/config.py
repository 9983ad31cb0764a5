"""Run configuration: defaults, flat ``key = value`` files and overrides."""

from __future__ import annotations

import hashlib
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from .channel import FadingParams
from .exceptions import ConfigurationError
from .netrate import SCHEMES, SEMANTICS

OUT_ENV = "PILOTREUSE_OUT"


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_ENV, "pilotreuse-out"))


@dataclass(frozen=True)
class RunConfig:
    m: int = 4
    k: int = 1
    params: FadingParams = field(default_factory=FadingParams)
    trials: int = 100_000
    seed: int = 20160401
    ncoh: Optional[int] = None
    ncoh_max: Optional[int] = None
    schemes: tuple[str, ...] = ("optimal", "full_reuse", "random")
    semantics: tuple[str, ...] = ("c_net",)
    curve_trials: int = 10_000
    workers: int = 1
    out: Path = field(default_factory=default_out_dir)
    rates: Optional[Path] = None
    verify: bool = False

    def __post_init__(self):
        if self.m % 2 or not 2 <= self.m <= 8:
            raise ConfigurationError(f"m must be an even integer in [2, 8], got {self.m}")
        if self.k < 1:
            raise ConfigurationError(f"k must be >= 1, got {self.k}")
        if self.trials < 1 or self.curve_trials < 1:
            raise ConfigurationError("trial counts must be >= 1")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad:
            raise ConfigurationError(f"unknown schemes {bad}; choose from {SCHEMES}")
        bad = [s for s in self.semantics if s not in SEMANTICS]
        if bad:
            raise ConfigurationError(f"unknown semantics {bad}; choose from {tuple(SEMANTICS)}")

    @property
    def cells(self) -> int:
        return 3 ** self.m

    @property
    def grid_max(self) -> int:
        return self.ncoh_max if self.ncoh_max is not None else 200 * self.k

    def rate_cache_key(self) -> str:
        blob = repr((self.m, sorted(asdict(self.params).items()), self.trials, self.seed))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def rate_cache_path(self) -> Path:
        return Path(self.out) / f"rates_{self.rate_cache_key()}.csv"

    def provenance(self) -> list[str]:
        p = self.params
        return [
            f"# params: gamma={p.gamma!r} shadow_sigma_db={p.shadow_sigma_db!r} "
            f"cell_radius_m={p.cell_radius_m!r} hole_radius_m={p.hole_radius_m!r}",
            f"# run: m={self.m} K={self.k} trials={self.trials} seed={self.seed}",
        ]


_PARAM_KEYS = {f.name for f in fields(FadingParams)}
_ALIASES = {
    "sigma_db": "shadow_sigma_db",
    "cell_radius": "cell_radius_m",
    "hole_radius": "hole_radius_m",
}
_INT_KEYS = {"m", "k", "trials", "seed", "ncoh", "ncoh_max", "curve_trials", "workers"}
_LIST_KEYS = {"schemes", "semantics"}


def _normalise(key: str) -> str:
    key = key.strip().lower().replace("-", "_")
    return _ALIASES.get(key, key)


def _coerce(key: str, value):
    if value is None:
        return None
    if key in _INT_KEYS:
        return int(value)
    if key in _PARAM_KEYS:
        return float(value)
    if key in _LIST_KEYS:
        return tuple(v.strip() for v in value.split(",") if v.strip()) if isinstance(value, str) else tuple(value)
    if key in {"out", "rates"}:
        return Path(value)
    if key == "verify":
        return value if isinstance(value, bool) else str(value).lower() in {"1", "true", "yes", "on"}
    raise ConfigurationError(f"unknown configuration key {key!r}")


def read_config_file(path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        values[_normalise(key)] = value.strip()
    return values


def build_config(file_values: Optional[dict] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Defaults, then file values, then explicit overrides (``None`` means unset)."""
    merged = {}
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if value is not None:
                merged[_normalise(key)] = value
    try:
        coerced = {k: _coerce(k, v) for k, v in merged.items()}
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc
    params = {k: coerced.pop(k) for k in list(coerced) if k in _PARAM_KEYS}
    base = RunConfig()
    return replace(base, params=replace(base.params, **params), **coerced)
