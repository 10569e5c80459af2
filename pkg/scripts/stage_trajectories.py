"""Per-stage trajectories for GHZ and one Gibbs state at n = 5, eps = 0.07.

Writes CSV + PNG panels: Stage-1 Jaccard vs samples, Stage-2 residual |delta|
per update for v1 and v2, Stage-3 sign agreement vs samples.

    python3 scripts/stage_trajectories.py --out results/trajectories
"""
import argparse
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from tripleshadow import MagnitudeTable, SolverConfig, TestStateSpec, generate_state, make_stabilizer_state
from tripleshadow import run_stage1, run_stage3, solve_mimicking, threshold_support, to_pauli_vector


def trajectories(rho, eps, seed):
    pv = to_pauli_vector(rho)
    mu = 0.75 * eps
    s1 = run_stage1(pv, mu, seed=seed, truth=pv)
    table = MagnitudeTable.exact(pv)
    solves = {v: solve_mimicking(table, SolverConfig(eps, v), pv) for v in ("v1", "v2")}
    s3 = run_stage3(pv, solves["v2"].sigma_pv, table, threshold_support(table, mu), seed=seed)
    return s1.trace, {v: [abs(d) for _, d, _ in r.trace] for v, r in solves.items()}, s3.trace


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/trajectories")
    ap.add_argument("--eps", type=float, default=0.07)
    ap.add_argument("--k", type=int, default=32)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    states = {"GHZ": make_stabilizer_state("GHZ", 5),
              "Gibbs": generate_state(TestStateSpec("Gibbs", 5, args.k, args.seed)).rho}
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.4))
    for name, rho in states.items():
        s1, s2, s3 = trajectories(rho, args.eps, args.seed)
        with open(out / f"{name}_trajectories.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["stage", "variant", "x", "y"])
            w.writerows([1, "-", m, j] for m, j in s1)
            for v, res in s2.items():
                w.writerows([2, v, t + 1, d] for t, d in enumerate(res))
            w.writerows([3, "v2", m, a] for m, _, a in s3)
        axes[0].plot(*zip(*s1), label=name)
        for v, ls in (("v1", "--"), ("v2", "-")):
            axes[1].plot(range(1, len(s2[v]) + 1), s2[v], ls, label=f"{name} {v} ({len(s2[v])})")
        axes[2].plot([m for m, _, _ in s3], [a for _, _, a in s3], marker="o", ms=3, label=name)
    axes[0].set(xscale="log", xlabel="Bell samples", ylabel="Jaccard")
    axes[1].set(xscale="log", yscale="log", xlabel="update step", ylabel="|delta|")
    axes[2].set(xscale="log", xlabel="Bell samples", ylabel="sign agreement")
    for ax in axes:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out / "trajectories.png", dpi=120)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
