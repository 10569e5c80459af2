"""Exponent tables and scaling figures from record CSVs."""
from __future__ import annotations

import csv
import math
from collections import defaultdict
from pathlib import Path
from typing import Iterable

import numpy as np

from .fitting import FitError, FitResult, fit_with_ci, loglog_fit
from .records import ExperimentRecord, write_records

MIN_EPS_VALUES = 5

# column -> (stage, variant, metric)
EXPONENTS = {
    "alpha1": (1, "-", "samples_used"),
    "alpha2": (2, "v1", "iterations"),
    "alpha3": (2, "v2", "substeps"),
    "alpha4": (3, None, "samples_used"),
}


def select_points(records: Iterable[ExperimentRecord], stage: int, variant: str | None, metric: str,
                  n: int | None = None, family: str | None = None) -> tuple[list[tuple[float, float]], int]:
    """(epsilon, y) pairs of successful runs, plus the count of censored/failed runs left out."""
    pts, censored = [], 0
    for r in records:
        if r.stage != stage or (variant is not None and r.variant != variant):
            continue
        if (n is not None and r.n != n) or (family is not None and r.state_family != family):
            continue
        if r.error or not r.feasible:
            censored += 1
            continue
        pts.append((r.epsilon, float(getattr(r, metric))))
    return pts, censored


def fit_exponent(records, column: str, n=None, family=None, B=100, seed=0, pooled=True) -> FitResult | None:
    stage, variant, metric = EXPONENTS[column]
    recs = list(records)
    pts, censored = select_points(recs, stage, variant, metric, n, family)
    if not pooled:
        return _per_state_fit(recs, stage, variant, metric, n, family, censored)
    try:
        res = fit_with_ci(pts, B=B, seed=seed)
    except FitError:
        return None
    res.excluded += censored
    if res.eps_values < MIN_EPS_VALUES:
        return None
    return res


def _per_state_fit(recs, stage, variant, metric, n, family, censored) -> FitResult | None:
    by_state = defaultdict(list)
    for r in recs:
        if r.stage == stage and (variant is None or r.variant == variant) and not r.error and r.feasible:
            if (n is None or r.n == n) and (family is None or r.state_family == family):
                by_state[(r.state_family, r.n, r.state_seed)].append((r.epsilon, float(getattr(r, metric))))
    alphas = []
    for pts in by_state.values():
        try:
            f = loglog_fit(pts)
        except FitError:
            continue
        if f.eps_values >= MIN_EPS_VALUES:
            alphas.append(f.alpha)
    if not alphas:
        return None
    a = np.asarray(alphas)
    lo, hi = np.percentile(a, (2.5, 97.5))
    return FitResult(float(np.median(a)), math.nan, float(lo), float(hi), len(a), censored)


def table1_rows(records, B: int = 100, seed: int = 0, pooled: bool = True) -> list[dict]:
    recs = list(records)
    groups = sorted({(r.n, r.state_family) for r in recs})
    rows = []
    for n, family in groups:
        row = {"n": n, "family": family}
        for col in EXPONENTS:
            f = fit_exponent(recs, col, n, family, B=B, seed=seed, pooled=pooled)
            if f is None:
                row.update({col: "absent", f"{col}_p2.5": "", f"{col}_p97.5": "", f"{col}_points": 0,
                            f"{col}_excluded": ""})
            else:
                row.update({col: round(f.alpha, 4), f"{col}_p2.5": round(f.ci_low, 4),
                            f"{col}_p97.5": round(f.ci_high, 4), f"{col}_points": f.points,
                            f"{col}_excluded": f.excluded})
        rows.append(row)
    return rows


def table1_columns() -> list[str]:
    cols = ["n", "family"]
    for c in EXPONENTS:
        cols += [c, f"{c}_p2.5", f"{c}_p97.5", f"{c}_points", f"{c}_excluded"]
    return cols


def write_table1(records, path: str | Path, B: int = 100, seed: int = 0, pooled: bool = True) -> list[dict]:
    rows = table1_rows(records, B, seed, pooled)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=table1_columns(), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return rows


def export(records, kind: str, out: str | Path, **kw):
    """Write records as ``csv`` (full schema), ``table1``, or ``figures``."""
    records = list(records)
    out = Path(out)
    if kind == "csv":
        write_records(out, records)
        return out
    if kind == "table1":
        return write_table1(records, out, **kw)
    if kind == "figures":
        return write_figures(records, out)
    raise ValueError(f"unknown export kind {kind!r}")


# -- figures ------------------------------------------------------------------

_PANELS = [
    ("stage1_M1", "alpha1", "samples M1"),
    ("stage2_v1_updates", "alpha2", "update steps t (v1)"),
    ("stage2_v2_updates", "alpha3", "Gibbs evaluations t (v2)"),
    ("stage3_M3", "alpha4", "samples M3"),
]


def _write_csv(path: Path, header: list[str], rows: list[list]):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_figures(records, outdir: str | Path) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    recs = list(records)
    written = []
    for n, family in sorted({(r.n, r.state_family) for r in recs}):
        for name, col, ylabel in _PANELS:
            stage, variant, metric = EXPONENTS[col]
            sel = [r for r in recs if r.n == n and r.state_family == family and r.stage == stage
                   and (variant is None or r.variant == variant) and r.feasible and not r.error
                   and getattr(r, metric) > 0]
            stem = f"{family}_n{n}_{name}"
            rows = [[r.epsilon, math.log2(1 / r.epsilon), getattr(r, metric), r.support_size] for r in sel]
            _write_csv(outdir / f"{stem}.csv", ["epsilon", "log2_inv_eps", metric, "support_size"], rows)
            fig, ax = plt.subplots(figsize=(4, 3.2))
            if rows:
                x = np.log2(1 / np.array([r[0] for r in rows]))
                y = np.array([r[2] for r in rows], dtype=float)
                c = np.log2(np.maximum(1, [r[3] for r in rows]))
                sc = ax.scatter(x, y, c=c, s=8, cmap="viridis")
                fig.colorbar(sc, ax=ax, label="log2|S|")
                fit = fit_exponent(recs, col, n, family, B=20)
                if fit is not None:
                    xs = np.linspace(x.min(), x.max(), 20)
                    ax.plot(xs, np.exp(fit.intercept) * (2.0**xs) ** fit.alpha, "r-",
                            label=f"slope {fit.alpha:.2f}")
                    ax.legend(loc="upper left", fontsize=7)
                ax.set_yscale("log")
            ax.set_xlabel("log2(1/eps)")
            ax.set_ylabel(ylabel)
            ax.set_title(f"{family}, n={n}", fontsize=9)
            fig.tight_layout()
            fig.savefig(outdir / f"{stem}.png", dpi=110)
            plt.close(fig)
            written += [outdir / f"{stem}.csv", outdir / f"{stem}.png"]
    written += _median_updates_figure(recs, outdir, plt)
    return written


def median_updates(recs, family: str = "Gibbs") -> list[list]:
    """Median update steps per (n, variant, log2 |S| bin)."""
    groups = defaultdict(list)
    for r in recs:
        if r.stage == 2 and r.state_family == family and not r.error and r.support_size > 0:
            groups[(r.n, r.variant, int(round(math.log2(r.support_size))))].append(r.iterations)
    return [[n, v, b, float(np.median(vals)), len(vals)] for (n, v, b), vals in sorted(groups.items())]


def _median_updates_figure(recs, outdir: Path, plt) -> list[Path]:
    rows = median_updates(recs)
    stem = outdir / "Gibbs_median_updates"
    _write_csv(stem.with_suffix(".csv"), ["n", "variant", "log2_support", "median_iterations", "count"], rows)
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    for n in sorted({r[0] for r in rows}):
        for v, ls in (("v1", "--"), ("v2", "-")):
            pts = [(r[2], r[3]) for r in rows if r[0] == n and r[1] == v]
            if pts:
                ax.plot(*zip(*pts), ls, marker="o", ms=3, label=f"n={n} {v}")
    ax.set_yscale("log")
    ax.set_xlabel("log2|S|")
    ax.set_ylabel("median update steps")
    if rows:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(stem.with_suffix(".png"), dpi=110)
    plt.close(fig)
    return [stem.with_suffix(".csv"), stem.with_suffix(".png")]
