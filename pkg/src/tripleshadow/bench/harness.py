"""Benchmark sweep: Stage 1 -> Stage 2 (v1, v2) -> Stage 3 trials per work unit."""
from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterator

import numpy as np

from ..bell import bell_distribution
from ..mimic import SolverConfig, solve_mimicking
from ..pauli import to_pauli_vector
from ..signs import run_stage3
from ..states import TestStateSpec, generate_state, k_sequence
from ..support import MagnitudeTable, run_stage1, threshold_support
from .config import BenchConfig
from .records import ExperimentRecord, format_rows, header_line, read_records, derive_seed

log = logging.getLogger(__name__)


def epsilon_for(mu: float) -> float:
    return mu / 0.75


def mu_for(epsilon: float) -> float:
    return 0.75 * epsilon


@dataclass(frozen=True)
class WorkUnit:
    family: str
    n: int
    state_index: int
    k: int
    state_seed: int
    mu: float
    replicate: int

    def key(self) -> tuple:
        return (self.family, self.n, self.state_seed, mu_for(epsilon_for(self.mu)), self.replicate)


def state_specs(cfg: BenchConfig) -> Iterator[tuple[int, TestStateSpec]]:
    for n in cfg.n:
        for family in cfg.families:
            if family == "Gibbs":
                for j, k in enumerate(k_sequence(n, cfg.states, cfg.kmax)):
                    seed = derive_seed(cfg.master_seed, "state", family, n, j)
                    yield j, TestStateSpec(family, n, k, seed, cfg.include_identity)
            else:
                yield 0, TestStateSpec(family, n, 0, 0)


def work_units(cfg: BenchConfig) -> list[WorkUnit]:
    units = []
    for j, spec in state_specs(cfg):
        for mu in cfg.mu_grid:
            for rep in range(cfg.replicates):
                units.append(WorkUnit(spec.family, spec.n, j, spec.k, spec.seed, mu, rep))
    return units


def records_per_unit(cfg: BenchConfig) -> int:
    v = len(cfg.variants)
    return 1 + v + v * cfg.trials


def expected_counts(cfg: BenchConfig) -> dict[int, int]:
    """Record count per stage for the whole sweep."""
    units = len(work_units(cfg))
    v = len(cfg.variants)
    return {1: units, 2: units * v, 3: units * v * cfg.trials}


@lru_cache(maxsize=8)
def _prepared_state(spec: TestStateSpec):
    g = generate_state(spec)
    pv = to_pauli_vector(g.rho)
    return g, pv, bell_distribution(pv, pv)


def _ms(t0: float) -> float:
    return round((time.perf_counter() - t0) * 1e3, 3)


def run_unit(unit: WorkUnit, cfg: BenchConfig) -> list[ExperimentRecord]:
    """All records for one (state, mu, replicate): Stage 1, Stage 2 per variant, Stage 3 trials."""
    spec = TestStateSpec(unit.family, unit.n, unit.k, unit.state_seed, cfg.include_identity) \
        if unit.family == "Gibbs" else TestStateSpec(unit.family, unit.n)
    eps = epsilon_for(unit.mu)
    mu = mu_for(eps)
    base = dict(state_family=unit.family, n=unit.n, k=unit.k, state_seed=unit.state_seed,
                epsilon=eps, mu=mu, replicate=unit.replicate)
    seed = lambda *tag: derive_seed(cfg.master_seed, unit.family, unit.n, unit.k, unit.state_seed,
                                    repr(mu), unit.replicate, *tag)
    out: list[ExperimentRecord] = []

    _, pv, dist = _prepared_state(spec)
    true_size = int(np.count_nonzero(np.abs(pv.coeffs[1:]) >= mu))

    s1_seed = seed(1, "-", 0)
    rec1 = ExperimentRecord(**base, run_seed=s1_seed, stage=1, variant="-", support_size=true_size)
    t0 = time.perf_counter()
    try:
        r1 = run_stage1(pv, mu, cfg.stage1_schedule, cfg.stage1_cap, s1_seed, dist=dist, truth=pv)
        rec1.samples_used, rec1.feasible, rec1.jaccard_final = r1.samples, r1.met, r1.jaccard
        table = MagnitudeTable.exact(pv) if cfg.exact_magnitudes else r1.table
    except Exception as exc:  # recorded, never fatal
        rec1.error = _err(exc)
        table = None
    rec1.wall_time_ms = _ms(t0)
    out.append(rec1)

    for variant in cfg.variants:
        s2_seed = seed(2, variant, 0)
        rec2 = ExperimentRecord(**base, run_seed=s2_seed, stage=2, variant=variant, support_size=true_size)
        sigma = None
        t0 = time.perf_counter()
        if table is None:
            rec2.error = "stage 1 failed"
        else:
            try:
                sc = SolverConfig(eps, variant, eta0=cfg.eta0, sign_source=cfg.sign_source, seed=s2_seed)
                res = solve_mimicking(table, sc, pv)
                rec2.iterations, rec2.substeps, rec2.feasible = res.iterations, res.substeps, res.feasible
                sigma = res.sigma_pv
            except Exception as exc:
                rec2.error = _err(exc)
        rec2.wall_time_ms = _ms(t0)
        out.append(rec2)

        for trial in range(cfg.trials):
            s3_seed = seed(3, variant, trial)
            rec3 = ExperimentRecord(**base, run_seed=s3_seed, stage=3, variant=variant, trial=trial,
                                    support_size=true_size)
            t0 = time.perf_counter()
            if sigma is None:
                rec3.error = "stage 2 failed"
            else:
                try:
                    if trial == 0:
                        dist3 = bell_distribution(pv, sigma)
                    support = threshold_support(table, mu)
                    r3 = run_stage3(pv, sigma, table, support, cfg.stage3_cap, cfg.stage3_schedule,
                                    s3_seed, dist=dist3)
                    rec3.samples_used, rec3.feasible = r3.samples, r3.met
                    rec3.mse_final, rec3.agreement_final = r3.mse, r3.agreement
                except Exception as exc:
                    rec3.error = _err(exc)
            rec3.wall_time_ms = _ms(t0)
            out.append(rec3)
    return out


def _err(exc: Exception) -> str:
    log.debug("run failed", exc_info=exc)
    return f"{type(exc).__name__}: {exc}".replace("\n", " ")[:200]


def _run_unit_star(args):
    return run_unit(*args)


def _completed_prefix(path: Path, cfg: BenchConfig, units: list[WorkUnit]) -> int:
    """Number of leading units fully present in an existing CSV; rewrites the file to that prefix."""
    try:
        recs = read_records(path, strict=False)
    except (OSError, ValueError):
        return 0
    per = records_per_unit(cfg)
    done = 0
    pos = 0
    for u in units:
        chunk = recs[pos:pos + per]
        if len(chunk) < per or any(
            (r.state_family, r.n, r.state_seed, r.replicate) != (u.family, u.n, u.state_seed, u.replicate)
            or r.mu != mu_for(epsilon_for(u.mu)) for r in chunk
        ):
            break
        done += 1
        pos += per
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(header_line())
        fh.write(format_rows(recs[:pos]))
    return done


def run_benchmark(cfg: BenchConfig, out_csv: str | Path, threads: int = 1, resume: bool = True,
                  progress=None) -> int:
    """Execute the sweep, streaming records to ``out_csv`` in unit order.

    Returns the number of units executed in this call.  Units already
    present in ``out_csv`` are skipped when ``resume`` is set.
    """
    out_csv = Path(out_csv)
    units = work_units(cfg)
    start = _completed_prefix(out_csv, cfg, units) if resume and out_csv.exists() else 0
    if start == 0:
        out_csv.parent.mkdir(parents=True, exist_ok=True)
        with open(out_csv, "w", newline="", encoding="utf-8") as fh:
            fh.write(header_line())
    todo = units[start:]
    if start:
        log.info("resuming after %d completed units", start)
    threads = max(1, threads or os.cpu_count() or 1)
    with open(out_csv, "a", newline="", encoding="utf-8") as fh:
        if threads == 1:
            results = (run_unit(u, cfg) for u in todo)
            _drain(results, fh, len(todo), progress)
        else:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                results = pool.map(_run_unit_star, [(u, cfg) for u in todo], chunksize=4)
                _drain(results, fh, len(todo), progress)
    return len(todo)


def _drain(results, fh, total, progress):
    for i, recs in enumerate(results, 1):
        fh.write(format_rows(recs))
        fh.flush()
        if progress:
            progress(i, total)


def run_pipeline(family: str, n: int, epsilon: float, variant: str = "v2", k: int = 1, seed: int = 0,
                 cfg: BenchConfig | None = None) -> dict:
    """One end-to-end run on a single state; returns a summary dict."""
    cfg = cfg or BenchConfig(families=(family,), n=(n,), variants=(variant,))
    spec = TestStateSpec(family, n, k, seed) if family == "Gibbs" else TestStateSpec(family, n)
    _, pv, dist = _prepared_state(spec)
    mu = mu_for(epsilon)
    r1 = run_stage1(pv, mu, cfg.stage1_schedule, cfg.stage1_cap, derive_seed(seed, 1), dist=dist, truth=pv)
    table = MagnitudeTable.exact(pv) if cfg.exact_magnitudes else r1.table
    res = solve_mimicking(table, SolverConfig(epsilon, variant, eta0=cfg.eta0, sign_source=cfg.sign_source,
                                              seed=derive_seed(seed, 2)), pv)
    r3 = run_stage3(pv, res.sigma_pv, table, threshold_support(table, mu), cfg.stage3_cap,
                    cfg.stage3_schedule, derive_seed(seed, 3))
    return {
        "family": family, "n": n, "k": spec.k, "epsilon": epsilon, "mu": mu, "variant": variant,
        "M1": r1.samples, "stage1_met": r1.met, "jaccard": r1.jaccard,
        "support_size": len(r1.support),
        "iterations": res.iterations, "substeps": res.substeps, "feasible": res.feasible,
        "M3": r3.samples, "stage3_met": r3.met, "agreement": r3.agreement, "mse": r3.mse,
    }
