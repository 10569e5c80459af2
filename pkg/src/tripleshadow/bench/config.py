"""Benchmark configuration: an INI file with one section per stage.

Example::

    [benchmark]
    master_seed = 0
    families = Gibbs, GHZ, Zero
    n = 4
    states = 20          ; Gibbs Hamiltonians per n (k = floor(kmax**(j/states)))
    replicates = 3       ; Stage-1 seeds per (state, mu)
    trials = 5           ; Stage-3 trials per (state, mu, replicate, variant)
    mu_grid = 0.05, 0.07, 0.11, 0.16, 0.23, 0.34, 0.5
    variants = v1, v2

    [stage1]
    cap = 30000000
    first_block = 10
    growth = 1.1

    [stage2]
    sign_source = oracle
    exact_magnitudes = false

    [stage3]
    cap = 700000
    first_block = 1
    growth = 2.0
"""
from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from ..bell import DEFAULT_SAMPLE_CAP
from ..mimic import VARIANTS, parse_sign_source
from ..signs import DEFAULT_STAGE3_CAP
from ..states import FAMILIES
from ..support import MU_GRID, BlockSchedule


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class BenchConfig:
    master_seed: int = 0
    families: tuple[str, ...] = ("Gibbs",)
    n: tuple[int, ...] = (4,)
    states: int = 20
    replicates: int = 3
    trials: int = 5
    mu_grid: tuple[float, ...] = MU_GRID
    variants: tuple[str, ...] = VARIANTS
    include_identity: bool = True
    kmax: int | None = None

    stage1_cap: int = DEFAULT_SAMPLE_CAP
    stage1_first_block: int = 10
    stage1_growth: float = 1.1

    sign_source: str = "oracle"
    exact_magnitudes: bool = False
    eta0: float | None = None

    stage3_cap: int = DEFAULT_STAGE3_CAP
    stage3_first_block: int = 1
    stage3_growth: float = 2.0

    def __post_init__(self):
        for f in self.families:
            if f not in FAMILIES:
                raise ConfigError(f"unknown family {f!r}")
        for v in self.variants:
            if v not in VARIANTS:
                raise ConfigError(f"unknown variant {v!r}")
        for mu in self.mu_grid:
            if not 0 < mu < 0.75:
                raise ConfigError(f"mu={mu} gives epsilon outside (0, 1)")
        if min(self.states, self.replicates, self.trials) < 1:
            raise ConfigError("states, replicates and trials must be positive")
        try:
            parse_sign_source(self.sign_source)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def stage1_schedule(self) -> BlockSchedule:
        return BlockSchedule(self.stage1_first_block, self.stage1_growth)

    @property
    def stage3_schedule(self) -> BlockSchedule:
        return BlockSchedule(self.stage3_first_block, self.stage3_growth)

    def to_dict(self) -> dict:
        return asdict(self)


# INI key -> (section, dataclass field)
_KEYS = {
    ("benchmark", "master_seed"): "master_seed",
    ("benchmark", "families"): "families",
    ("benchmark", "n"): "n",
    ("benchmark", "states"): "states",
    ("benchmark", "replicates"): "replicates",
    ("benchmark", "trials"): "trials",
    ("benchmark", "mu_grid"): "mu_grid",
    ("benchmark", "variants"): "variants",
    ("benchmark", "include_identity"): "include_identity",
    ("benchmark", "kmax"): "kmax",
    ("stage1", "cap"): "stage1_cap",
    ("stage1", "first_block"): "stage1_first_block",
    ("stage1", "growth"): "stage1_growth",
    ("stage2", "sign_source"): "sign_source",
    ("stage2", "exact_magnitudes"): "exact_magnitudes",
    ("stage2", "eta0"): "eta0",
    ("stage3", "cap"): "stage3_cap",
    ("stage3", "first_block"): "stage3_first_block",
    ("stage3", "growth"): "stage3_growth",
}


def _split(s: str) -> list[str]:
    return [p.strip() for p in s.replace(";", ",").split(",") if p.strip()]


def _convert(name: str, raw: str):
    try:
        if name in ("families", "variants"):
            return tuple(_split(raw))
        if name == "n":
            return tuple(int(v) for v in _split(raw))
        if name == "mu_grid":
            return tuple(float(v) for v in _split(raw))
        if name in ("include_identity", "exact_magnitudes"):
            low = raw.strip().lower()
            if low not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(raw)
            return low in ("true", "yes", "1")
        if name in ("kmax", "eta0"):
            if raw.strip().lower() in ("", "none", "default"):
                return None
            return int(raw) if name == "kmax" else float(raw)
        if name in ("stage1_growth", "stage3_growth"):
            return float(raw)
        if name == "sign_source":
            return raw.strip()
        return int(float(raw)) if "e" in raw.lower() else int(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc


def load_config(path: str | Path, overrides: dict | None = None) -> BenchConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    with open(path) as fh:
        parser.read_file(fh)
    values = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            name = _KEYS.get((section, key))
            if name is None:
                raise ConfigError(f"unknown key [{section}] {key}")
            values[name] = _convert(name, raw)
    values.update(overrides or {})
    return BenchConfig(**values)


def dump_config(cfg: BenchConfig) -> str:
    by_field = {v: k for k, v in _KEYS.items()}
    sections: dict[str, list[str]] = {}
    for f in fields(cfg):
        section, key = by_field[f.name]
        val = getattr(cfg, f.name)
        if isinstance(val, tuple):
            val = ", ".join(str(v) for v in val)
        sections.setdefault(section, []).append(f"{key} = {val}")
    return "\n".join(f"[{s}]\n" + "\n".join(lines) + "\n" for s, lines in sections.items())
