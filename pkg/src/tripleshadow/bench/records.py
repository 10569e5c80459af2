"""Experiment records and their CSV form."""
from __future__ import annotations

import csv
import hashlib
import io
import math
import struct
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable

import numpy as np

TIMING_FIELD = "wall_time_ms"


@dataclass
class ExperimentRecord:
    state_family: str
    n: int
    k: int
    state_seed: int
    run_seed: int
    epsilon: float
    mu: float
    stage: int
    variant: str
    samples_used: int = 0
    iterations: int = 0
    substeps: int = 0
    feasible: bool = False
    jaccard_final: float = math.nan
    mse_final: float = math.nan
    agreement_final: float = math.nan
    support_size: int = 0
    wall_time_ms: float = 0.0
    replicate: int = 0
    trial: int = 0
    error: str = ""

    def key(self) -> tuple:
        return (self.state_family, self.n, self.state_seed, self.mu, self.replicate, self.stage, self.variant, self.trial)


FIELDS = [f.name for f in fields(ExperimentRecord)]
_TYPES = {f.name: f.type for f in fields(ExperimentRecord)}


def derive_seed(*parts) -> int:
    """64-bit seed from an ordered tuple of ints/strings (blake2b over a
    length-prefixed encoding); stable across processes and platforms."""
    h = hashlib.blake2b(digest_size=8, person=b"tripleshadow")
    for p in parts:
        b = str(p).encode()
        h.update(struct.pack("<I", len(b)))
        h.update(b)
    return int.from_bytes(h.digest(), "little")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def record_row(rec: ExperimentRecord) -> list[str]:
    return [_fmt(v) for v in asdict(rec).values()]


def format_rows(records: Iterable[ExperimentRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in records:
        w.writerow(record_row(r))
    return buf.getvalue()


def header_line() -> str:
    return ",".join(FIELDS) + "\n"


def _parse(name: str, raw: str):
    t = _TYPES[name]
    if t in ("int", int):
        return int(raw)
    if t in ("float", float):
        return math.nan if raw == "" else float(raw)
    if t in ("bool", bool):
        return raw == "1"
    return raw


def read_records(path: str | Path, strict: bool = True) -> list[ExperimentRecord]:
    """Parse a record CSV.  With ``strict=False`` parsing stops quietly at the
    first malformed row (e.g. a line truncated by a crash)."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != FIELDS:
            raise ValueError(f"{path}: unexpected header {header}")
        for row in reader:
            try:
                if len(row) != len(FIELDS):
                    raise ValueError(f"row has {len(row)} fields")
                out.append(ExperimentRecord(**{k: _parse(k, v) for k, v in zip(FIELDS, row)}))
            except ValueError:
                if strict:
                    raise
                break
    return out


def write_records(path: str | Path, records: Iterable[ExperimentRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(header_line())
        fh.write(format_rows(records))
