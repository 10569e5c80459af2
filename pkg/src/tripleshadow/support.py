"""Stage 1: adaptive Bell sampling of rho ⊗ rho until the estimated support of
large Pauli magnitudes matches the true one."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .bell import (
    DEFAULT_SAMPLE_CAP,
    BellDistribution,
    BellSampleCounts,
    bell_distribution,
    draw_samples,
    estimate_products,
    magnitudes_from_products,
)
from .pauli import DensityOperator, PauliVector, to_pauli_vector

MU_GRID = (0.05, 0.07, 0.11, 0.16, 0.23, 0.34, 0.5)
JACCARD_TARGET = 0.9


@dataclass(frozen=True)
class BlockSchedule:
    """Sizes of successive measurement blocks.

    ``growth == 1`` gives fixed blocks of ``first`` samples; otherwise each
    block tops the running total up by a factor ``growth`` (at least one
    sample), so checkpoints are geometrically spaced.
    """

    first: int = 10
    growth: float = 1.1

    def __post_init__(self):
        if self.first < 1 or self.growth < 1:
            raise ValueError("block sizes must be positive and nondecreasing")

    def blocks(self) -> Iterator[int]:
        total = 0
        size = self.first
        while True:
            yield size
            total += size
            if self.growth > 1:
                size = max(1, math.ceil(total * (self.growth - 1)))

    @classmethod
    def fixed(cls, size: int) -> "BlockSchedule":
        return cls(size, 1.0)


@dataclass
class MagnitudeTable:
    u_hat: np.ndarray
    n: int
    u_true: np.ndarray | None = None

    def __post_init__(self):
        self.u_hat = np.clip(np.asarray(self.u_hat, dtype=float), 0.0, 1.0)
        if self.u_hat.shape != (4**self.n,):
            raise ValueError("magnitude table has the wrong length")

    @classmethod
    def exact(cls, rho: DensityOperator | PauliVector) -> "MagnitudeTable":
        pv = rho if isinstance(rho, PauliVector) else to_pauli_vector(rho)
        u = np.abs(pv.coeffs)
        return cls(u.copy(), pv.n, u.copy())


@dataclass(frozen=True)
class SupportSet:
    labels: tuple[int, ...]
    mu: float
    n: int

    def __len__(self):
        return len(self.labels)

    def __contains__(self, idx):
        return int(idx) in set(self.labels)

    def mask(self) -> np.ndarray:
        m = np.zeros(4**self.n, dtype=bool)
        m[list(self.labels)] = True
        return m


def _support_mask(u: np.ndarray, mu: float, target: np.ndarray | None) -> np.ndarray:
    m = u >= mu
    m[0] = False
    if target is not None:
        m &= target
    return m


def threshold_support(
    table: MagnitudeTable, mu: float, use_truth: bool = False, target: np.ndarray | None = None
) -> SupportSet:
    """Non-identity labels whose magnitude is at least mu."""
    if not 0 < mu <= 1:
        raise ValueError(f"threshold {mu} outside (0, 1]")
    u = table.u_true if use_truth else table.u_hat
    if u is None:
        raise ValueError("table carries no ground truth")
    m = _support_mask(u, mu, target)
    return SupportSet(tuple(int(i) for i in np.flatnonzero(m)), mu, table.n)


def jaccard_masks(a: np.ndarray, b: np.ndarray) -> float:
    union = np.count_nonzero(a | b)
    if union == 0:
        return 1.0
    return np.count_nonzero(a & b) / union


def jaccard(a: SupportSet, b: SupportSet) -> float:
    if a.n != b.n:
        raise ValueError("support sets live on different qubit counts")
    sa, sb = set(a.labels), set(b.labels)
    if not sa | sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


@dataclass
class Stage1Result:
    samples: int
    met: bool
    table: MagnitudeTable
    support: SupportSet
    jaccard: float
    trace: list[tuple[int, float]] = field(default_factory=list)
    counts: BellSampleCounts | None = None


def run_stage1(
    rho: DensityOperator,
    mu: float,
    block: int | BlockSchedule = BlockSchedule(),
    cap: int = DEFAULT_SAMPLE_CAP,
    seed=None,
    target: Sequence[int] | np.ndarray | None = None,
    dist: BellDistribution | None = None,
    truth: PauliVector | None = None,
    threshold: float = JACCARD_TARGET,
) -> Stage1Result:
    """Sample until jaccard(estimated support, true support) >= threshold or the cap is hit.

    ``target`` restricts scoring to a subset of labels (default: all
    non-identity labels).  ``dist`` and ``truth`` can be passed in to reuse
    the Bell distribution and Pauli vector across runs on the same state.
    """
    schedule = BlockSchedule.fixed(block) if isinstance(block, int) else block
    truth = to_pauli_vector(rho) if truth is None else truth
    n = truth.n
    if dist is None:
        dist = bell_distribution(truth, truth)
    tmask = None
    if target is not None:
        tmask = np.zeros(4**n, dtype=bool)
        tmask[np.asarray(target, dtype=np.int64)] = True
    u_true = np.abs(truth.coeffs)
    true_mask = _support_mask(u_true, mu, tmask)
    rng = np.random.default_rng(seed)

    counts = BellSampleCounts.empty(n, cap)
    u_hat = np.zeros(4**n)
    jac, met = 0.0, False
    trace = []
    if cap > 0:
        for size in schedule.blocks():
            size = min(size, cap - counts.total)
            counts = draw_samples(dist, size, counts=counts, rng=rng)
            u_hat = magnitudes_from_products(estimate_products(counts))
            jac = jaccard_masks(_support_mask(u_hat, mu, tmask), true_mask)
            trace.append((counts.total, jac))
            if jac >= threshold:
                met = True
                break
            if counts.total >= cap:
                break
    table = MagnitudeTable(u_hat, n, u_true)
    return Stage1Result(
        counts.total, met, table, threshold_support(table, mu, target=tmask), jac, trace, counts
    )
