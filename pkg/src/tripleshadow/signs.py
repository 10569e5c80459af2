"""Stage 3: recover signs of the significant Paulis from Bell samples of
rho ⊗ sigma, and score the resulting reconstruction."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bell import BellDistribution, BellSampleCounts, bell_distribution, draw_samples, estimate_products
from .pauli import PauliVector, to_pauli_vector
from .support import BlockSchedule, MagnitudeTable, SupportSet

DEFAULT_STAGE3_CAP = 7 * 10**5
AGREEMENT_TARGET = 0.9


@dataclass
class Reconstruction:
    values: np.ndarray  # r_hat * u_hat on the support, 1 at identity, 0 elsewhere
    signs: np.ndarray  # +-1 for every label, +1 where no sign was estimated
    n: int

    @classmethod
    def from_signs(cls, table: MagnitudeTable, support: np.ndarray, signs: np.ndarray) -> "Reconstruction":
        full = np.ones(4**table.n)
        full[support] = signs[support]
        values = np.where(support, full * table.u_hat, 0.0)
        values[0] = 1.0
        return cls(values, full, table.n)

    @classmethod
    def exact(cls, rho) -> "Reconstruction":
        pv = rho if isinstance(rho, PauliVector) else to_pauli_vector(rho)
        signs = np.where(pv.coeffs < 0, -1.0, 1.0)
        return cls(pv.coeffs.copy(), signs, pv.n)


def _coeffs(rho) -> np.ndarray:
    return rho.coeffs if isinstance(rho, PauliVector) else to_pauli_vector(rho).coeffs


def mse(rho, recon: Reconstruction) -> float:
    """2**-n sum_P (recon[P] - tr(P rho))**2 over all 4**n labels."""
    r = _coeffs(rho)
    if len(r) != len(recon.values):
        raise ValueError("qubit counts differ")
    return float(np.sum((recon.values - r) ** 2) / 2**recon.n)


def sign_agreement(recon: Reconstruction, rho, mu: float) -> float:
    """Fraction of non-identity P with |tr(P rho)| >= mu whose sign is right."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    r = _coeffs(rho)
    q = np.abs(r) >= mu
    q[0] = False
    total = np.count_nonzero(q)
    if total == 0:
        return 1.0
    truth = np.where(r < 0, -1.0, 1.0)
    return np.count_nonzero(recon.signs[q] == truth[q]) / total


@dataclass
class Stage3Result:
    samples: int
    met: bool
    recon: Reconstruction
    mse: float
    agreement: float
    trace: list[tuple[int, float, float]] = field(default_factory=list)


def signs_from_products(e: np.ndarray, sigma_exp: np.ndarray) -> np.ndarray:
    """sgn(e_P) * sgn(tr(P sigma)), with sgn(0) = +1."""
    s1 = np.where(e < 0, -1.0, 1.0)
    s2 = np.where(sigma_exp < 0, -1.0, 1.0)
    return s1 * s2


def run_stage3(
    rho,
    sigma,
    table: MagnitudeTable,
    support: SupportSet,
    cap: int = DEFAULT_STAGE3_CAP,
    schedule: BlockSchedule = BlockSchedule(1, 2.0),
    seed=None,
    mu: float | None = None,
    dist: BellDistribution | None = None,
    threshold: float = AGREEMENT_TARGET,
) -> Stage3Result:
    """Bell-sample rho ⊗ sigma in blocks until sign agreement reaches ``threshold``.

    Agreement is scored on |tr(P rho)| >= mu, defaulting to the support
    threshold.
    """
    rho_pv = rho if isinstance(rho, PauliVector) else to_pauli_vector(rho)
    sigma_pv = sigma if isinstance(sigma, PauliVector) else to_pauli_vector(sigma)
    n = rho_pv.n
    mu = support.mu if mu is None else mu
    if dist is None:
        dist = bell_distribution(rho_pv, sigma_pv)
    smask = support.mask()
    rng = np.random.default_rng(seed)

    counts = BellSampleCounts.empty(n, cap)
    recon = Reconstruction.from_signs(table, smask, np.ones(4**n))
    agree = sign_agreement(recon, rho_pv, mu)
    err = mse(rho_pv, recon)
    met = False
    trace = []
    if cap > 0:
        for size in schedule.blocks():
            size = min(size, cap - counts.total)
            counts = draw_samples(dist, size, counts=counts, rng=rng)
            e = estimate_products(counts)
            recon = Reconstruction.from_signs(table, smask, signs_from_products(e, sigma_pv.coeffs))
            agree = sign_agreement(recon, rho_pv, mu)
            err = mse(rho_pv, recon)
            trace.append((counts.total, err, agree))
            if agree >= threshold:
                met = True
                break
            if counts.total >= cap:
                break
    return Stage3Result(counts.total, met, recon, err, agree, trace)


def run_stage3_exact(rho, sigma, table: MagnitudeTable, support: SupportSet, mu: float | None = None) -> Stage3Result:
    """Stage 3 with the exact Bell distribution standing in for sample counts."""
    rho_pv = rho if isinstance(rho, PauliVector) else to_pauli_vector(rho)
    sigma_pv = sigma if isinstance(sigma, PauliVector) else to_pauli_vector(sigma)
    dist = bell_distribution(rho_pv, sigma_pv)
    e = estimate_products(dist.probs)
    recon = Reconstruction.from_signs(table, support.mask(), signs_from_products(e, sigma_pv.coeffs))
    mu = support.mu if mu is None else mu
    agree = sign_agreement(recon, rho_pv, mu)
    return Stage3Result(0, agree >= AGREEMENT_TARGET, recon, mse(rho_pv, recon), agree)
