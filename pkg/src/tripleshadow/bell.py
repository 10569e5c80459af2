"""Transversal Bell sampling on rho ⊗ sigma.

Bell outcome ``a`` is the state |Phi_a> = (P_a ⊗ I)|Phi> / 2**(n/2), with
|Phi> = sum_i |i>|i>.  Its probability under rho ⊗ sigma is
2**-n tr(P_a rho P_a sigma^T), and P ⊗ P acts on it with eigenvalue
(-1)**(y_count(P) + sp(a, P)).  Both quantities reduce to one symplectic
Walsh transform over the label table.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pauli import (
    DensityOperator,
    PauliLabel,
    PauliVector,
    symplectic_product,
    symplectic_walsh,
    to_pauli_vector,
    transpose_sign,
    transpose_signs,
)

NORM_TOL = 1e-9
DEFAULT_SAMPLE_CAP = 3 * 10**7


class SampleCapError(RuntimeError):
    """Raised when a draw would exceed the configured cap; carries the partial counts."""

    def __init__(self, message, counts):
        super().__init__(message)
        self.counts = counts


class AliasTable:
    """Vose alias table for O(1) draws from a fixed discrete distribution."""

    def __init__(self, probs):
        p = np.asarray(probs, dtype=float)
        size = len(p)
        scaled = p * size / p.sum()
        prob = np.ones(size)
        alias = np.arange(size)
        small = [i for i in range(size) if scaled[i] < 1.0]
        large = [i for i in range(size) if scaled[i] >= 1.0]
        while small and large:
            s, g = small.pop(), large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] -= 1.0 - scaled[s]
            (small if scaled[g] < 1.0 else large).append(g)
        # leftovers are 1 up to rounding
        self.prob = prob
        self.alias = alias
        self.size = size

    def sample(self, m: int, rng: np.random.Generator) -> np.ndarray:
        col = rng.integers(0, self.size, size=m)
        keep = rng.random(m) < self.prob[col]
        return np.where(keep, col, self.alias[col])


@dataclass(eq=False)
class BellDistribution:
    probs: np.ndarray
    n: int
    _alias: AliasTable | None = field(default=None, repr=False)

    @property
    def alias(self) -> AliasTable:
        if self._alias is None:
            self._alias = AliasTable(self.probs)
        return self._alias


@dataclass(eq=False)
class BellSampleCounts:
    counts: np.ndarray
    total: int = 0
    cap: int | None = None

    @classmethod
    def empty(cls, n: int, cap: int | None = None) -> "BellSampleCounts":
        return cls(np.zeros(4**n, dtype=np.int64), 0, cap)

    def merge(self, other: "BellSampleCounts") -> "BellSampleCounts":
        return BellSampleCounts(self.counts + other.counts, self.total + other.total, self.cap)

    def to_text(self, n: int) -> str:
        from .pauli import label_string

        return "".join(f"{label_string(i, n)} {int(self.counts[i])}\n" for i in np.flatnonzero(self.counts))


def _coeffs(state) -> tuple[np.ndarray, int]:
    if isinstance(state, PauliVector):
        return state.coeffs, state.n
    pv = to_pauli_vector(state)
    return pv.coeffs, pv.n


def bell_distribution(rho, sigma) -> BellDistribution:
    """Outcome distribution of Bell sampling on rho ⊗ sigma (states or Pauli vectors)."""
    r, n = _coeffs(rho)
    s, ns = _coeffs(sigma)
    if n != ns:
        raise ValueError(f"qubit counts differ: {n} vs {ns}")
    probs = symplectic_walsh(transpose_signs(n) * r * s) / 4**n
    if probs.min() < -NORM_TOL:
        raise ValueError(f"negative Bell probability {probs.min():.3g}")
    probs = np.clip(probs, 0.0, None)
    total = probs.sum()
    if abs(total - 1) > NORM_TOL:
        raise ValueError(f"Bell distribution sums to {total}")
    return BellDistribution(probs / total, n)


def bell_distribution_dense(rho: DensityOperator, sigma: DensityOperator) -> np.ndarray:
    """Reference: project rho ⊗ sigma onto each of the 4**n Bell vectors explicitly."""
    from .pauli import dense_pauli

    n = rho.n
    d = 1 << n
    joint = np.kron(rho.matrix, sigma.matrix)
    phi = np.eye(d).reshape(-1) / np.sqrt(d)
    out = np.empty(4**n)
    for a in range(4**n):
        v = np.kron(dense_pauli(PauliLabel.from_index(a, n)), np.eye(d)) @ phi
        out[a] = np.real(v.conj() @ joint @ v)
    return out


def bell_pair_eigenvalue(p: PauliLabel, a: PauliLabel) -> int:
    """Eigenvalue of P ⊗ P on the Bell vector labelled a."""
    return transpose_sign(p) * (-1 if symplectic_product(a, p) else 1)


def draw_samples(
    dist: BellDistribution,
    m: int,
    seed=None,
    counts: BellSampleCounts | None = None,
    cap: int | None = None,
    rng: np.random.Generator | None = None,
) -> BellSampleCounts:
    """Draw m outcomes and add them to ``counts`` (a fresh table if None)."""
    if m < 0:
        raise ValueError("sample count must be nonnegative")
    if counts is None:
        counts = BellSampleCounts.empty(dist.n, cap)
    cap = counts.cap if cap is None else cap
    if cap is not None and counts.total + m > cap:
        raise SampleCapError(f"{counts.total + m} samples exceed cap {cap}", counts)
    if m == 0:
        return counts
    rng = np.random.default_rng(seed) if rng is None else rng
    outcomes = dist.alias.sample(m, rng)
    add = np.bincount(outcomes, minlength=4**dist.n)
    return BellSampleCounts(counts.counts + add, counts.total + m, cap)


def estimate_products(counts) -> np.ndarray:
    """Empirical tr(P rho) tr(P sigma) for every label from a Bell count table.

    Also accepts a probability vector in place of counts (exact expectation).
    """
    if isinstance(counts, BellSampleCounts):
        c, total = counts.counts.astype(float), counts.total
    else:
        c = np.asarray(counts, dtype=float)
        total = c.sum()
    if total <= 0:
        raise ValueError("no samples")
    n = (len(c).bit_length() - 1) // 2
    return transpose_signs(n) * symplectic_walsh(c) / total


def magnitudes_from_products(e) -> np.ndarray:
    return np.sqrt(np.clip(np.asarray(e, dtype=float), 0.0, None))
