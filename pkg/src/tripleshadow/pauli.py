"""Pauli-label algebra on the symplectic (x, z) encoding.

A label on ``n`` qubits is the integer ``(z_bits << n) | x_bits``.  Bit ``q``
of either mask refers to qubit ``q``, and qubit ``q`` is bit ``q`` of the
computational-basis index, so the dense matrix is the Kronecker product
``P_{n-1} ⊗ ... ⊗ P_0``.  String labels are written in the same order
(leftmost character is qubit ``n-1``).

All 4**n tables in the package are indexed this way.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_QUBITS = 12
HERMITIAN_TOL = 1e-10
IMAG_TOL = 1e-10

_CHARS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS = {c: b for b, c in _CHARS.items()}

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class ValidationError(ValueError):
    """Input fails a density-operator or table invariant."""


def _popcount(a):
    a = np.asarray(a, dtype=np.uint64)
    return np.bitwise_count(a).astype(np.int64)


@dataclass(frozen=True, order=True)
class PauliLabel:
    x_bits: int
    z_bits: int
    n: int

    def __post_init__(self):
        if not 1 <= self.n <= MAX_QUBITS:
            raise ValueError(f"qubit count {self.n} outside 1..{MAX_QUBITS}")
        full = (1 << self.n) - 1
        if self.x_bits & ~full or self.z_bits & ~full or self.x_bits < 0 or self.z_bits < 0:
            raise ValueError("bit masks do not fit in n bits")

    @property
    def index(self) -> int:
        return (self.z_bits << self.n) | self.x_bits

    @classmethod
    def from_index(cls, idx: int, n: int) -> "PauliLabel":
        idx = int(idx)
        if not 0 <= idx < 4**n:
            raise ValueError(f"index {idx} out of range for n={n}")
        mask = (1 << n) - 1
        return cls(idx & mask, idx >> n, n)

    @classmethod
    def from_string(cls, s: str) -> "PauliLabel":
        n = len(s)
        x = z = 0
        for pos, c in enumerate(s.upper()):
            q = n - 1 - pos
            xb, zb = _BITS[c]
            x |= xb << q
            z |= zb << q
        return cls(x, z, n)

    @classmethod
    def identity(cls, n: int) -> "PauliLabel":
        return cls(0, 0, n)

    def __str__(self):
        return "".join(
            _CHARS[((self.x_bits >> q) & 1, (self.z_bits >> q) & 1)]
            for q in range(self.n - 1, -1, -1)
        )

    def is_identity(self) -> bool:
        return self.x_bits == 0 and self.z_bits == 0


def label_string(idx: int, n: int) -> str:
    return str(PauliLabel.from_index(idx, n))


def _check_same_n(a: PauliLabel, b: PauliLabel):
    if a.n != b.n:
        raise ValueError(f"qubit counts differ: {a.n} vs {b.n}")


def symplectic_product(a: PauliLabel, b: PauliLabel) -> int:
    """0 if the two Paulis commute, 1 if they anticommute."""
    _check_same_n(a, b)
    return (bin(a.x_bits & b.z_bits).count("1") + bin(a.z_bits & b.x_bits).count("1")) & 1


def pauli_weight(a: PauliLabel) -> int:
    return bin(a.x_bits | a.z_bits).count("1")


def y_count(a: PauliLabel) -> int:
    return bin(a.x_bits & a.z_bits).count("1")


def transpose_sign(a: PauliLabel) -> int:
    """Sign s with P^T = s P."""
    return -1 if y_count(a) & 1 else 1


# -- vectorised helpers over the full label table -----------------------------

@lru_cache(maxsize=None)
def label_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    """x and z masks for every index 0..4**n-1."""
    idx = np.arange(4**n, dtype=np.int64)
    mask = (1 << n) - 1
    x, z = idx & mask, idx >> n
    x.flags.writeable = False
    z.flags.writeable = False
    return x, z


@lru_cache(maxsize=None)
def transpose_signs(n: int) -> np.ndarray:
    """transpose_sign for every label, as a float array."""
    x, z = label_arrays(n)
    out = np.where(_popcount(x & z) & 1, -1.0, 1.0)
    out.flags.writeable = False
    return out


def symplectic_products(a_idx, b_idx, n: int) -> np.ndarray:
    """Elementwise symplectic product of broadcastable index arrays."""
    mask = (1 << n) - 1
    a_idx = np.asarray(a_idx, dtype=np.int64)
    b_idx = np.asarray(b_idx, dtype=np.int64)
    ax, az = a_idx & mask, a_idx >> n
    bx, bz = b_idx & mask, b_idx >> n
    return (_popcount(ax & bz) + _popcount(az & bx)) & 1


# -- dense matrices -----------------------------------------------------------

def dense_pauli(a: PauliLabel) -> np.ndarray:
    """2**n x 2**n matrix of the label, built directly from the bit masks.

    Entry ``[j ^ x, j] = i**y_count * (-1)**popcount(j & z)``; this equals
    the Kronecker product of textbook single-qubit factors.
    """
    n = a.n
    if n > MAX_QUBITS:
        raise MemoryError(f"dense Pauli on {n} qubits is too large")
    d = 1 << n
    j = np.arange(d)
    phase = 1j ** (y_count(a) % 4)
    vals = phase * np.where(_popcount(j & a.z_bits) & 1, -1.0, 1.0)
    out = np.zeros((d, d), dtype=complex)
    out[j ^ a.x_bits, j] = vals
    return out


def dense_pauli_kron(a: PauliLabel) -> np.ndarray:
    """Reference construction as an explicit Kronecker product."""
    out = np.ones((1, 1), dtype=complex)
    for c in str(a):
        out = np.kron(out, _SINGLE[c])
    return out


# -- Walsh transforms ---------------------------------------------------------

def walsh_hadamard(v: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform along the last axis (length 2**m)."""
    v = np.array(v, dtype=np.result_type(v, np.float64), copy=True)
    size = v.shape[-1]
    if size & (size - 1):
        raise ValueError(f"length {size} is not a power of two")
    lead = v.shape[:-1]
    h = 1
    while h < size:
        v = v.reshape(*lead, -1, 2, h)
        a = v[..., 0, :].copy()
        b = v[..., 1, :]
        v[..., 0, :] += b
        v[..., 1, :] = a - b
        h *= 2
    return v.reshape(*lead, size)


@lru_cache(maxsize=None)
def _swap_perm(n: int) -> np.ndarray:
    x, z = label_arrays(n)
    return (x << n) | z


def symplectic_walsh(v) -> np.ndarray:
    """out[a] = sum_b (-1)**sp(a, b) v[b] in O(4**n * 2n).

    With the (z, x) layout, sp(a, b) is the GF(2) dot product of
    swap(a) = (x << n) | z with b, so this is a plain Walsh-Hadamard
    transform read out through the x/z swap.
    """
    v = np.asarray(v)
    size = v.shape[-1]
    n2 = size.bit_length() - 1
    if size < 1 or (1 << n2) != size or n2 % 2:
        raise ValueError(f"length {size} is not a power of 4")
    w = walsh_hadamard(v)
    return w[..., _swap_perm(n2 // 2)]


def symplectic_walsh_direct(v) -> np.ndarray:
    """O(16**n) reference for symplectic_walsh."""
    v = np.asarray(v, dtype=float)
    size = len(v)
    n = (size.bit_length() - 1) // 2
    idx = np.arange(size)
    signs = 1.0 - 2.0 * symplectic_products(idx[:, None], idx[None, :], n)
    return signs @ v


# -- state containers ---------------------------------------------------------

def qubits_from_dim(d: int) -> int:
    n = d.bit_length() - 1
    if d < 2 or (1 << n) != d:
        raise ValidationError(f"dimension {d} is not a power of two")
    return n


@dataclass(frozen=True, eq=False)
class DensityOperator:
    matrix: np.ndarray
    n: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (1 << self.n, 1 << self.n):
            raise ValidationError(f"shape {m.shape} does not match n={self.n}")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_matrix(cls, m, validate: bool = True) -> "DensityOperator":
        m = np.asarray(m, dtype=complex)
        rho = cls(m, qubits_from_dim(m.shape[0]))
        if validate:
            rho.validate()
        return rho

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityOperator":
        d = 1 << n
        return cls(np.eye(d) / d, n)

    @classmethod
    def from_state_vector(cls, psi) -> "DensityOperator":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), qubits_from_dim(len(psi)))

    def validate(self, tol: float = HERMITIAN_TOL) -> "DensityOperator":
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise ValidationError("matrix is not Hermitian")
        if abs(np.trace(m) - 1) > tol:
            raise ValidationError(f"trace {np.trace(m).real:.3g} != 1")
        if np.linalg.eigvalsh(m)[0] < -tol:
            raise ValidationError("matrix is not positive semidefinite")
        return self


@dataclass(frozen=True, eq=False)
class PauliVector:
    coeffs: np.ndarray
    n: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (4**self.n,):
            raise ValidationError(f"expected {4**self.n} coefficients, got {c.shape}")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def __getitem__(self, label):
        if isinstance(label, PauliLabel):
            label = label.index
        elif isinstance(label, str):
            label = PauliLabel.from_string(label).index
        return self.coeffs[label]

    def nonzero(self, tol: float = 1e-12) -> dict[str, float]:
        idx = np.flatnonzero(np.abs(self.coeffs) > tol)
        return {label_string(i, self.n): float(self.coeffs[i]) for i in idx}


def _diag_phases(n: int) -> np.ndarray:
    # i**y_count for every label
    x, z = label_arrays(n)
    return 1j ** (_popcount(x & z) % 4)


def _shifted_diagonals(m: np.ndarray, n: int) -> np.ndarray:
    """f[x, j] = m[j, j ^ x]."""
    d = 1 << n
    j = np.arange(d)
    return m[j[None, :], j[None, :] ^ j[:, None]]


def pauli_expectations(m: np.ndarray, n: int | None = None) -> np.ndarray:
    """Complex tr(P_a m) for every label, via one Walsh transform per shift."""
    m = np.asarray(m, dtype=complex)
    if n is None:
        n = qubits_from_dim(m.shape[0])
    f = _shifted_diagonals(m, n)  # [x, j]
    # tr(P m) = i**y * sum_j (-1)**(j.z) m[j, j^x]
    w = walsh_hadamard(f.real) + 1j * walsh_hadamard(f.imag)  # [x, z]
    table = w.T.reshape(-1)  # index (z << n) | x
    return table * _diag_phases(n)


def to_pauli_vector(rho: DensityOperator | np.ndarray, tol: float = IMAG_TOL) -> PauliVector:
    """Pauli coefficients tr(P rho); the imaginary residue must stay below tol."""
    m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
    n = qubits_from_dim(m.shape[0])
    if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
        raise ValidationError("matrix is not Hermitian")
    vals = pauli_expectations(m, n)
    if np.max(np.abs(vals.imag)) > max(tol, tol * (1 << n)):
        raise ValidationError("Pauli expectations carry an imaginary part")
    return PauliVector(vals.real, n)


def from_pauli_vector(v: PauliVector, validate: bool = True) -> DensityOperator:
    """rho = 2**-n sum_P v[P] P."""
    n = v.n
    if validate and abs(v.coeffs[0] - 1) > HERMITIAN_TOL:
        raise ValidationError("identity coefficient must be 1")
    d = 1 << n
    c = (v.coeffs * _diag_phases(n)).reshape(d, d)  # [z, x]
    # m[j ^ x, j] = 2**-n sum_z c[z, x] (-1)**(j.z)
    g = (walsh_hadamard(c.real.T) + 1j * walsh_hadamard(c.imag.T)) / d  # [x, j]
    j = np.arange(d)
    m = np.empty((d, d), dtype=complex)
    m[j[None, :] ^ j[:, None], j[None, :]] = g
    rho = DensityOperator(m, n)
    if validate:
        rho.validate(tol=1e-9)
    return rho
