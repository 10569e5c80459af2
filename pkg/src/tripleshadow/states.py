"""Test-state families: GHZ, |0...0>, and Gibbs states of random Pauli sums."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .pauli import (
    HERMITIAN_TOL,
    MAX_QUBITS,
    DensityOperator,
    PauliLabel,
    ValidationError,
    dense_pauli,
)

FAMILIES = ("GHZ", "Zero", "Gibbs")


@dataclass(frozen=True)
class PauliHamiltonian:
    terms: tuple[tuple[PauliLabel, float], ...]
    n: int

    def __post_init__(self):
        idx = [p.index for p, _ in self.terms]
        if len(set(idx)) != len(idx):
            raise ValueError("Hamiltonian labels must be distinct")
        for p, c in self.terms:
            if p.n != self.n:
                raise ValueError("term qubit count mismatch")
            if not math.isfinite(c):
                raise ValueError("non-finite coefficient")

    @property
    def k(self) -> int:
        return len(self.terms)

    def dense(self) -> np.ndarray:
        d = 1 << self.n
        h = np.zeros((d, d), dtype=complex)
        for p, c in self.terms:
            h += c * dense_pauli(p)
        return h


@dataclass(frozen=True)
class TestStateSpec:
    __test__ = False  # not a pytest class

    family: str
    n: int
    k: int = 0
    seed: int = 0
    include_identity: bool = True

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "Gibbs" and not 1 <= self.k <= 4**self.n:
            raise ValueError(f"k={self.k} outside 1..4**n")


@dataclass
class GeneratedState:
    spec: TestStateSpec
    rho: DensityOperator
    hamiltonian: PauliHamiltonian | None = None
    degenerate: bool = False
    notes: dict = field(default_factory=dict)


def _check_n(n: int):
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"n={n} outside supported range 1..{MAX_QUBITS}")


def make_stabilizer_state(family: str, n: int) -> DensityOperator:
    _check_n(n)
    d = 1 << n
    psi = np.zeros(d, dtype=complex)
    if family == "Zero":
        psi[0] = 1
    elif family == "GHZ":
        psi[0] = psi[-1] = 1 / math.sqrt(2)
    else:
        raise ValueError(f"not a stabilizer family: {family!r}")
    return DensityOperator.from_state_vector(psi)


def k_max(n: int) -> int:
    if n in (2, 3, 4):
        return 2 ** (2 * n - 1)
    if n in (5, 6, 7):
        return 2 ** (n + 3)
    raise ValueError(f"no default k_max for n={n}; pass k_max explicitly")


def k_sequence(n: int, m: int = 100, kmax: int | None = None) -> list[int]:
    """floor(kmax**(j/m)) for j = 1..m, duplicates kept."""
    kmax = k_max(n) if kmax is None else kmax
    out = []
    for j in range(1, m + 1):
        v = int(math.floor(kmax ** (j / m)))
        # exact integer floor: the float power can land a hair off an integer
        if (v + 1) ** m <= kmax**j:
            v += 1
        elif v**m > kmax**j:
            v -= 1
        out.append(max(v, 1))
    return out


def k_grid(n: int, m: int = 100, kmax: int | None = None) -> list[int]:
    """Sorted, deduplicated log-spaced Pauli term counts."""
    return sorted(set(k_sequence(n, m, kmax)))


def sample_pauli_hamiltonian(n: int, k: int, seed: int, include_identity: bool = True) -> PauliHamiltonian:
    """k distinct labels drawn uniformly without replacement, unit coefficients."""
    _check_n(n)
    pool = 4**n if include_identity else 4**n - 1
    if not 1 <= k <= pool:
        raise ValueError(f"k={k} outside 1..{pool}")
    rng = np.random.default_rng(seed)
    picks = rng.choice(pool, size=k, replace=False)
    if not include_identity:
        picks = picks + 1
    return PauliHamiltonian(tuple((PauliLabel.from_index(int(i), n), 1.0) for i in picks), n)


def _hermitian(h) -> np.ndarray:
    h = h.dense() if isinstance(h, PauliHamiltonian) else np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError("Hamiltonian must be square")
    scale = max(1.0, float(np.max(np.abs(h))))
    if np.max(np.abs(h - h.conj().T)) > HERMITIAN_TOL * scale:
        raise ValidationError("Hamiltonian is not Hermitian")
    return h


def gibbs_from_eigh(evals: np.ndarray, evecs: np.ndarray, beta: float) -> np.ndarray:
    """exp(-beta H)/tr(.) from an eigendecomposition, shifted against overflow."""
    w = -beta * evals
    w = np.exp(w - w.max())
    w /= w.sum()
    return (evecs * w) @ evecs.conj().T


def gibbs_state(h, beta: float = 1.0) -> DensityOperator:
    hm = _hermitian(h)
    try:
        evals, evecs = np.linalg.eigh(hm)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("eigensolver did not converge") from exc
    m = gibbs_from_eigh(evals, evecs, beta)
    m = 0.5 * (m + m.conj().T)
    return DensityOperator(m, qubits_from_matrix(m))


def qubits_from_matrix(m: np.ndarray) -> int:
    return m.shape[0].bit_length() - 1


def spectral_norm(h) -> float:
    return float(np.max(np.abs(np.linalg.eigvalsh(_hermitian(h)))))


def normalized_gibbs_state(h: PauliHamiltonian, beta: float = 1.0) -> tuple[DensityOperator, bool]:
    """Gibbs state of H/||H||; returns (state, degenerate) where ||H|| = 0 gives the mixed state."""
    hm = h.dense()
    norm = spectral_norm(hm)
    if norm == 0.0:
        return DensityOperator.maximally_mixed(h.n), True
    return gibbs_state(hm / norm, beta), False


def generate_state(spec: TestStateSpec) -> GeneratedState:
    if spec.family in ("GHZ", "Zero"):
        return GeneratedState(spec, make_stabilizer_state(spec.family, spec.n))
    ham = sample_pauli_hamiltonian(spec.n, spec.k, spec.seed, spec.include_identity)
    rho, degenerate = normalized_gibbs_state(ham)
    return GeneratedState(spec, rho, ham, degenerate)
