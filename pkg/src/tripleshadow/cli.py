"""Command-line entry point: ``tripleshadow <command> ...``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

from .bell import DEFAULT_SAMPLE_CAP
from .io import read_density, read_magnitudes, write_density, write_hamiltonian, write_magnitudes
from .mimic import SolverConfig, solve_mimicking
from .pauli import to_pauli_vector
from .signs import DEFAULT_STAGE3_CAP, run_stage3
from .states import FAMILIES, TestStateSpec, generate_state
from .support import BlockSchedule, MagnitudeTable, run_stage1, threshold_support

log = logging.getLogger("tripleshadow")


def _schedule(args, first_default, growth_default) -> BlockSchedule:
    if getattr(args, "block", None):
        return BlockSchedule.fixed(args.block)
    return BlockSchedule(args.first_block or first_default, args.growth or growth_default)


def _state_meta(meta: dict) -> dict:
    return dict(state_family=meta["family"] or "custom", n=meta["n"], k=meta["k"], state_seed=meta["seed"])


def cmd_gen_states(args):
    spec = TestStateSpec(args.family, args.n, args.k if args.family == "Gibbs" else 0, args.seed,
                         not args.exclude_identity)
    g = generate_state(spec)
    write_density(args.out, g.rho, spec.family, spec.k, spec.seed)
    if g.hamiltonian is not None:
        write_hamiltonian(Path(args.out).with_suffix(".ham.txt"), g.hamiltonian)
    if g.degenerate:
        log.warning("Hamiltonian has zero norm; wrote the maximally mixed state")


def cmd_stage1(args):
    from .bench.records import ExperimentRecord, write_records

    rho, meta = read_density(args.input)
    pv = to_pauli_vector(rho)
    t0 = time.perf_counter()
    r = run_stage1(pv, args.mu, _schedule(args, 10, 1.1), args.cap, args.seed, truth=pv)
    rec = ExperimentRecord(**_state_meta(meta), run_seed=args.seed, epsilon=args.mu / 0.75, mu=args.mu,
                           stage=1, variant="-", samples_used=r.samples, feasible=r.met,
                           jaccard_final=r.jaccard, support_size=len(r.support),
                           wall_time_ms=round((time.perf_counter() - t0) * 1e3, 3))
    write_records(args.out, [rec])
    if args.magnitudes_out:
        write_magnitudes(args.magnitudes_out, r.table)
    if args.counts_out:
        Path(args.counts_out).write_text(r.counts.to_text(pv.n))


def cmd_mimic(args):
    rho, _ = read_density(args.input)
    pv = to_pauli_vector(rho)
    if args.exact_magnitudes:
        table = MagnitudeTable.exact(pv)
    elif args.magnitudes:
        table = read_magnitudes(args.magnitudes)
    else:
        raise SystemExit("mimic: pass --magnitudes FILE or --exact-magnitudes")
    cfg = SolverConfig(args.epsilon, args.variant, eta0=args.eta0, sign_source=args.sign_source, seed=args.seed)
    res = solve_mimicking(table, cfg, pv)
    out = Path(args.out)
    write_density(out.with_suffix(".sigma.bin"), res.sigma, "mimic")
    with open(out.with_suffix(".trace.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "label", "delta", "eta"])
        for i, (p, delta, eta) in enumerate(res.trace):
            w.writerow([i, p, repr(delta), repr(eta)])
    print(json.dumps({"feasible": res.feasible, "iterations": res.iterations, "substeps": res.substeps,
                      "stalled": res.stalled, "eta_final": res.eta_final}))


def cmd_stage3(args):
    from .bench.records import ExperimentRecord, write_records

    rho, meta = read_density(args.input)
    sigma, _ = read_density(args.sigma)
    pv, spv = to_pauli_vector(rho), to_pauli_vector(sigma)
    table = MagnitudeTable.exact(pv) if args.exact_magnitudes else read_magnitudes(args.magnitudes)
    mu = 0.75 * args.epsilon
    t0 = time.perf_counter()
    r = run_stage3(pv, spv, table, threshold_support(table, mu), args.cap, _schedule(args, 1, 2.0),
                   args.seed, mu=args.agreement_mu)
    rec = ExperimentRecord(**_state_meta(meta), run_seed=args.seed, epsilon=args.epsilon, mu=mu, stage=3,
                           variant=args.variant, samples_used=r.samples, feasible=r.met, mse_final=r.mse,
                           agreement_final=r.agreement, support_size=len(threshold_support(table, mu)),
                           wall_time_ms=round((time.perf_counter() - t0) * 1e3, 3))
    write_records(args.out, [rec])
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["samples", "mse", "agreement"])
            w.writerows([s, repr(m), repr(a)] for s, m, a in r.trace)


_BENCH_OVERRIDES = {
    "master_seed": int, "states": int, "replicates": int, "trials": int,
    "stage1_cap": int, "stage3_cap": int, "sign_source": str,
}


def cmd_bench_run(args):
    from .bench import BenchConfig, dump_config, load_config, run_benchmark

    overrides = {k: getattr(args, k) for k in _BENCH_OVERRIDES if getattr(args, k) is not None}
    if args.n:
        overrides["n"] = tuple(args.n)
    if args.families:
        overrides["families"] = tuple(args.families)
    if args.exact_magnitudes:
        overrides["exact_magnitudes"] = True
    cfg = load_config(args.config, overrides) if args.config else BenchConfig(**overrides)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.ini").write_text(dump_config(cfg))

    def progress(i, total):
        if i % 50 == 0 or i == total:
            log.info("%d/%d units", i, total)

    run_benchmark(cfg, out / "records.csv", threads=args.threads, resume=not args.no_resume, progress=progress)


def cmd_bench_fit(args):
    from .bench import read_records, write_table1

    rows = write_table1(read_records(args.input), args.out, B=args.bootstrap, seed=args.seed,
                        pooled=not args.per_state)
    for r in rows:
        print(f"n={r['n']} {r['family']}: " + " ".join(f"{c}={r[c]}" for c in ("alpha1", "alpha2", "alpha3", "alpha4")))


def cmd_bench_plot(args):
    from .bench import read_records, write_figures

    write_figures(read_records(args.input), args.out)


def cmd_pipeline(args):
    from .bench import BenchConfig, run_pipeline

    cfg = BenchConfig(families=(args.family,), n=(args.n,), variants=(args.variant,),
                      exact_magnitudes=args.exact_magnitudes, sign_source=args.sign_source)
    print(json.dumps(run_pipeline(args.family, args.n, args.epsilon, args.variant, args.k, args.seed, cfg), indent=1))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tripleshadow", description="Three-stage Bell-sampling Pauli shadow tomography simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-states", help="write a test state (and its Hamiltonian)")
    g.add_argument("--family", choices=FAMILIES, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--exclude-identity", action="store_true")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_states)

    s1 = sub.add_parser("stage1", help="adaptive magnitude estimation on one state")
    s1.add_argument("--in", dest="input", required=True)
    s1.add_argument("--mu", type=float, required=True)
    s1.add_argument("--seed", type=int, default=0)
    s1.add_argument("--cap", type=int, default=DEFAULT_SAMPLE_CAP)
    s1.add_argument("--block", type=int, help="fixed block size (overrides the geometric schedule)")
    s1.add_argument("--first-block", type=int)
    s1.add_argument("--growth", type=float)
    s1.add_argument("--out", required=True, help="record CSV")
    s1.add_argument("--magnitudes-out")
    s1.add_argument("--counts-out")
    s1.set_defaults(func=cmd_stage1)

    m = sub.add_parser("mimic", help="construct a mimicking state")
    m.add_argument("--in", dest="input", required=True)
    m.add_argument("--magnitudes")
    m.add_argument("--exact-magnitudes", action="store_true")
    m.add_argument("--variant", choices=("v1", "v2"), default="v2")
    m.add_argument("--epsilon", type=float, required=True)
    m.add_argument("--eta0", type=float)
    m.add_argument("--sign-source", default="oracle", help="oracle | sampled:<shots>")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--out", required=True, help="output prefix (.sigma.bin, .trace.csv)")
    m.set_defaults(func=cmd_mimic)

    s3 = sub.add_parser("stage3", help="sign recovery by Bell sampling rho x sigma")
    s3.add_argument("--in", dest="input", required=True)
    s3.add_argument("--sigma", required=True)
    s3.add_argument("--magnitudes")
    s3.add_argument("--exact-magnitudes", action="store_true")
    s3.add_argument("--epsilon", type=float, required=True)
    s3.add_argument("--agreement-mu", type=float)
    s3.add_argument("--variant", default="-")
    s3.add_argument("--seed", type=int, default=0)
    s3.add_argument("--cap", type=int, default=DEFAULT_STAGE3_CAP)
    s3.add_argument("--block", type=int)
    s3.add_argument("--first-block", type=int)
    s3.add_argument("--growth", type=float)
    s3.add_argument("--out", required=True)
    s3.add_argument("--trace")
    s3.set_defaults(func=cmd_stage3)

    b = sub.add_parser("bench", help="benchmark sweep, fits and plots")
    bsub = b.add_subparsers(dest="bench_command", required=True)
    br = bsub.add_parser("run")
    br.add_argument("--config")
    br.add_argument("--out", required=True, help="output directory")
    br.add_argument("--threads", type=int, default=1)
    br.add_argument("--no-resume", action="store_true")
    br.add_argument("--n", type=int, nargs="+")
    br.add_argument("--families", nargs="+", choices=FAMILIES)
    br.add_argument("--exact-magnitudes", action="store_true")
    for name, typ in _BENCH_OVERRIDES.items():
        br.add_argument("--" + name.replace("_", "-"), dest=name, type=typ)
    br.set_defaults(func=cmd_bench_run)
    bf = bsub.add_parser("fit")
    bf.add_argument("--in", dest="input", required=True)
    bf.add_argument("--out", required=True)
    bf.add_argument("--bootstrap", type=int, default=100)
    bf.add_argument("--seed", type=int, default=0)
    bf.add_argument("--per-state", action="store_true")
    bf.set_defaults(func=cmd_bench_fit)
    bp = bsub.add_parser("plot")
    bp.add_argument("--in", dest="input", required=True)
    bp.add_argument("--out", required=True)
    bp.set_defaults(func=cmd_bench_plot)

    pl = sub.add_parser("pipeline", help="one end-to-end run")
    pl.add_argument("--family", choices=FAMILIES, required=True)
    pl.add_argument("--n", type=int, required=True)
    pl.add_argument("--epsilon", type=float, required=True)
    pl.add_argument("--variant", choices=("v1", "v2"), default="v2")
    pl.add_argument("--k", type=int, default=1)
    pl.add_argument("--seed", type=int, default=0)
    pl.add_argument("--exact-magnitudes", action="store_true")
    pl.add_argument("--sign-source", default="oracle")
    pl.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None) -> int:
    from .bench.config import ConfigError

    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except (ConfigError, OSError, ValueError) as exc:
        log.error("%s", exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
