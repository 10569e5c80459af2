"""Stage 2: construct a mimicking state by matrix multiplicative weights.

The candidate is always a Gibbs state sigma = exp(-beta H)/tr(...).  Each
iteration looks for a Pauli P with large estimated magnitude u_P whose
sigma-expectation is far from both +u_P and -u_P, learns the sign of
tr(P rho), and pushes H along P.  ``v1`` adds a unit multiple of P;
``v2`` adds a residual-weighted multiple with a backtracking step size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .pauli import DensityOperator, PauliLabel, PauliVector, pauli_expectations, to_pauli_vector
from .states import PauliHamiltonian, gibbs_from_eigh
from .support import MagnitudeTable

ETA_FLOOR = 1e-20
ETA_GROWTH = 1.3
VARIANTS = ("v1", "v2")


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float
    variant: str = "v2"
    eta0: float | None = None
    T: int | None = None
    beta: float | None = None
    sign_source: str = "oracle"  # "oracle" or "sampled:<shots>"
    seed: int | None = None

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        parse_sign_source(self.sign_source)

    def iterations(self, n: int) -> int:
        if self.T is not None:
            return self.T
        return math.ceil(64 * n / self.epsilon**2) + 1

    def inverse_temperature(self, n: int) -> float:
        if self.beta is not None:
            return self.beta
        return math.sqrt(n / self.iterations(n))

    def initial_step(self, n: int) -> float:
        if self.eta0 is not None:
            return self.eta0
        return 0.375 * 2**n if self.variant == "v2" else 1.0


def parse_sign_source(source: str) -> int | None:
    """None for the oracle, else the shot count of ``sampled:<shots>``."""
    if source == "oracle":
        return None
    kind, _, shots = source.partition(":")
    if kind != "sampled" or not shots.isdigit() or int(shots) < 1:
        raise ValueError(f"bad sign source {source!r}")
    return int(shots)


def _sgn(x: float) -> int:
    return -1 if x < 0 else 1


def add_pauli(h: np.ndarray, idx: int, n: int, coeff: float) -> None:
    """h += coeff * P_idx in place, touching only the 2**n nonzero entries."""
    mask = (1 << n) - 1
    x, z = idx & mask, idx >> n
    j = np.arange(1 << n)
    y = bin(x & z).count("1")
    vals = (1j ** (y % 4)) * np.where(np.bitwise_count(j & z) & 1, -1.0, 1.0)
    h[j ^ x, j] += coeff * vals


class GibbsMap:
    """sigma(H) at fixed beta; counts evaluations."""

    def __init__(self, beta: float):
        self.beta = beta
        self.evaluations = 0

    def __call__(self, h: np.ndarray) -> np.ndarray:
        self.evaluations += 1
        evals, evecs = np.linalg.eigh(h)
        return gibbs_from_eigh(evals, evecs, self.beta)


def expectations(sigma: np.ndarray, n: int) -> np.ndarray:
    return pauli_expectations(sigma, n).real


def find_violation(sigma_pv, table: MagnitudeTable, epsilon: float):
    """(label index, u_P) of the most violated constraint, or None.

    A label with u_P >= 3 eps/4 violates when |tr(P sigma) - u_P| and
    |tr(P sigma) + u_P| both exceed eps/2.  The largest min-distance wins;
    ties go to the smaller index.
    """
    t = sigma_pv.coeffs if isinstance(sigma_pv, PauliVector) else np.asarray(sigma_pv)
    u = table.u_hat
    cand = u >= 0.75 * epsilon
    cand[0] = False
    margin = np.minimum(np.abs(t - u), np.abs(t + u))
    viol = cand & (margin > epsilon / 2)
    if not viol.any():
        return None
    scored = np.where(viol, margin, -np.inf)
    idx = int(np.argmax(scored))
    return idx, float(u[idx])


def estimate_sign(rho_pv: PauliVector, p: int, source: str = "oracle", rng=None) -> int:
    """sgn tr(P rho): exact, or majority vote over single-copy +-1 outcomes."""
    p = p.index if isinstance(p, PauliLabel) else int(p)
    mean = float(rho_pv.coeffs[p])
    shots = parse_sign_source(source)
    if shots is None:
        return _sgn(mean)
    rng = np.random.default_rng() if rng is None else rng
    plus = rng.binomial(shots, min(1.0, max(0.0, (1 + mean) / 2)))
    return 1 if 2 * plus >= shots else -1


@dataclass
class UpdateOutcome:
    h: np.ndarray
    sigma: np.ndarray
    sigma_exp: np.ndarray
    eta: float
    substeps: int = 0
    stalled: bool = False


def update_v1(h, sigma, sigma_exp, p: int, r_p: int, u_p: float, gibbs: GibbsMap, n: int) -> UpdateOutcome:
    """H <- H + sgn(tr(P sigma) - r_P u_P) P with unit step."""
    arg = sigma_exp[p] - r_p * u_p
    step = 0.0 if arg == 0 else float(np.sign(arg))
    h_new = h.copy()
    if step:
        add_pauli(h_new, p, n, step)
    sigma_new = gibbs(h_new)
    return UpdateOutcome(h_new, sigma_new, expectations(sigma_new, n), 1.0, 1)


def update_v2(
    h, sigma, sigma_exp, p: int, r_p: int, u_p: float, eta: float, gibbs: GibbsMap, n: int
) -> UpdateOutcome:
    """Residual-weighted step with backtracking; grows eta on success."""
    if eta < ETA_FLOOR:
        return UpdateOutcome(h, sigma, sigma_exp, eta, 0, True)
    target = r_p * u_p
    delta = sigma_exp[p] - target
    evals = 0
    while True:
        h_new = h.copy()
        add_pauli(h_new, p, n, eta * delta)
        sigma_new = gibbs(h_new)
        evals += 1
        exp_new = expectations(sigma_new, n)
        if abs(exp_new[p] - target) < abs(delta):
            return UpdateOutcome(h_new, sigma_new, exp_new, eta * ETA_GROWTH, evals)
        eta /= 2
        if eta < ETA_FLOOR:
            return UpdateOutcome(h, sigma, sigma_exp, eta, evals, True)


@dataclass
class MimicResult:
    feasible: bool
    sigma: DensityOperator
    sigma_pv: PauliVector
    hamiltonian: PauliHamiltonian
    iterations: int
    substeps: int
    eta_final: float
    stalled: bool = False
    certificate: bool = False
    trace: list[tuple[int, float, float]] = field(default_factory=list)

    @property
    def gibbs_evaluations(self) -> int:
        return self.substeps


def certify(sigma_pv: PauliVector, table: MagnitudeTable, epsilon: float) -> bool:
    """|tr(P sigma)| >= eps/4 on every non-identity P with u_P >= 3 eps/4."""
    cand = table.u_hat >= 0.75 * epsilon
    cand[0] = False
    return bool(np.all(np.abs(sigma_pv.coeffs[cand]) >= epsilon / 4))


def solve_mimicking(table: MagnitudeTable, config: SolverConfig, rho) -> MimicResult:
    """Run the MMW loop from H = 0 until no violated constraint remains.

    ``rho`` (state or Pauli vector) only feeds the sign source.  The result
    reports ``iterations`` (update calls) and ``substeps`` (Gibbs-state
    evaluations; equal to iterations for v1).
    """
    n = table.n
    rho_pv = rho if isinstance(rho, PauliVector) else to_pauli_vector(rho)
    eps = config.epsilon
    T = config.iterations(n)
    gibbs = GibbsMap(config.inverse_temperature(n))
    eta = config.initial_step(n)
    rng = np.random.default_rng(config.seed)

    d = 1 << n
    h = np.zeros((d, d), dtype=complex)
    sigma = np.eye(d, dtype=complex) / d
    sigma_exp = np.zeros(4**n)
    sigma_exp[0] = 1.0
    terms: dict[int, float] = {}
    trace = []
    feasible = stalled = False
    t = 0
    while True:
        found = find_violation(sigma_exp, table, eps)
        if found is None:
            feasible = True
            break
        if t >= T:
            break
        p, u_p = found
        r_p = estimate_sign(rho_pv, p, config.sign_source, rng)
        if config.variant == "v1":
            out = update_v1(h, sigma, sigma_exp, p, r_p, u_p, gibbs, n)
            coeff = float(np.sign(sigma_exp[p] - r_p * u_p))
        else:
            coeff = eta * (sigma_exp[p] - r_p * u_p)
            out = update_v2(h, sigma, sigma_exp, p, r_p, u_p, eta, gibbs, n)
        trace.append((p, float(sigma_exp[p] - r_p * u_p), out.eta))
        t += 1
        if out.stalled:
            stalled = True
            eta = out.eta
            break
        terms[p] = terms.get(p, 0.0) + coeff
        h, sigma, sigma_exp, eta = out.h, out.sigma, out.sigma_exp, out.eta

    sigma_m = 0.5 * (sigma + sigma.conj().T)
    sigma_pv = PauliVector(sigma_exp, n)
    ham = PauliHamiltonian(tuple((PauliLabel.from_index(i, n), c) for i, c in sorted(terms.items())), n)
    cert = certify(sigma_pv, table, eps)
    return MimicResult(
        feasible and cert,
        DensityOperator(sigma_m, n),
        sigma_pv,
        ham,
        t,
        gibbs.evaluations,
        eta,
        stalled,
        cert,
        trace,
    )
