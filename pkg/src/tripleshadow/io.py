"""On-disk formats.

Density operator (binary, little-endian)::

    magic   4s   b"TSDO"
    n       u32
    family  8s   ASCII, NUL padded
    k       i64
    seed    u64
    data    2**n * 2**n pairs of f64 (real, imag), row-major

Hamiltonian (text): one ``x_bits z_bits coeff`` line per term.
Magnitudes (text): ``# n=<n>`` header, then one ``index u_hat`` line per label.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .pauli import DensityOperator, PauliLabel
from .states import PauliHamiltonian
from .support import MagnitudeTable

MAGIC = b"TSDO"
_HEADER = struct.Struct("<4sI8sqQ")


def write_density(path, rho: DensityOperator, family: str = "", k: int = 0, seed: int = 0) -> None:
    header = _HEADER.pack(MAGIC, rho.n, family.encode()[:8].ljust(8, b"\0"), k, seed & (2**64 - 1))
    data = np.ascontiguousarray(rho.matrix, dtype="<c16").tobytes()
    Path(path).write_bytes(header + data)


def read_density(path, validate: bool = True) -> tuple[DensityOperator, dict]:
    raw = Path(path).read_bytes()
    magic, n, fam, k, seed = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: not a density-operator file")
    d = 1 << n
    body = raw[_HEADER.size:]
    if len(body) != d * d * 16:
        raise ValueError(f"{path}: truncated payload")
    m = np.frombuffer(body, dtype="<c16").reshape(d, d)
    rho = DensityOperator(m, n)
    if validate:
        rho.validate(tol=1e-9)
    return rho, {"n": n, "family": fam.rstrip(b"\0").decode(), "k": k, "seed": seed}


def write_hamiltonian(path, h: PauliHamiltonian) -> None:
    lines = [f"{p.x_bits} {p.z_bits} {float(c)!r}\n" for p, c in h.terms]
    Path(path).write_text(f"# n={h.n}\n" + "".join(lines))


def read_hamiltonian(path) -> PauliHamiltonian:
    n, terms = None, []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line.startswith("# n="):
            n = int(line[4:])
        elif line and not line.startswith("#"):
            x, z, c = line.split()
            terms.append((int(x), int(z), float(c)))
    if n is None:
        raise ValueError(f"{path}: missing '# n=' header")
    return PauliHamiltonian(tuple((PauliLabel(x, z, n), c) for x, z, c in terms), n)


def write_magnitudes(path, table: MagnitudeTable) -> None:
    body = "".join(f"{i} {float(v)!r}\n" for i, v in enumerate(table.u_hat))
    Path(path).write_text(f"# n={table.n}\n" + body)


def read_magnitudes(path) -> MagnitudeTable:
    n, vals = None, {}
    for line in Path(path).read_text().splitlines():
        if line.startswith("# n="):
            n = int(line[4:])
        elif line.strip() and not line.startswith("#"):
            i, v = line.split()
            vals[int(i)] = float(v)
    if n is None:
        raise ValueError(f"{path}: missing '# n=' header")
    u = np.zeros(4**n)
    for i, v in vals.items():
        u[i] = v
    return MagnitudeTable(u, n)
