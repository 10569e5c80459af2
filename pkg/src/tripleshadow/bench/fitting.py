"""Log-log scaling fits with percentile bootstrap intervals."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class FitError(ValueError):
    pass


@dataclass
class FitResult:
    alpha: float
    intercept: float
    ci_low: float = math.nan
    ci_high: float = math.nan
    points: int = 0
    excluded: int = 0
    eps_values: int = 0


def _usable(points) -> tuple[np.ndarray, np.ndarray, int]:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    eps, y = pts[:, 0], pts[:, 1]
    ok = np.isfinite(y) & (y > 0) & (eps > 0)
    return eps[ok], y[ok], int(np.count_nonzero(~ok))


def _ols(eps: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    x = np.log(1.0 / eps)
    ly = np.log(y)
    xm = x.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = np.sum((x - xm) * (ly - ly.mean())) / sxx
    return float(slope), float(ly.mean() - slope * xm)


def loglog_fit(points: Sequence[tuple[float, float]]) -> FitResult:
    """Least-squares slope of log(y) against log(1/eps).

    Points with y <= 0 (or non-finite) are dropped and counted in
    ``excluded``; at least two distinct eps values must remain.
    """
    eps, y, dropped = _usable(points)
    distinct = len(np.unique(eps))
    if distinct < 2:
        raise FitError(f"need at least 2 distinct epsilon values, have {distinct}")
    alpha, intercept = _ols(eps, y)
    return FitResult(alpha, intercept, points=len(y), excluded=dropped, eps_values=distinct)


def bootstrap_ci(points, B: int = 100, seed=None, levels=(2.5, 97.5)) -> tuple[float, float]:
    """Percentile interval of the slope over B resamples (with replacement).

    Resamples with a single distinct eps are redrawn, at most 10*B draws.
    """
    eps, y, _ = _usable(points)
    if len(np.unique(eps)) < 2:
        raise FitError("need at least 2 distinct epsilon values")
    rng = np.random.default_rng(seed)
    size = len(y)
    alphas = []
    attempts = 0
    while len(alphas) < B and attempts < 10 * B:
        attempts += 1
        pick = rng.integers(0, size, size=size)
        e = eps[pick]
        if np.all(e == e[0]):
            continue
        alphas.append(_ols(e, y[pick])[0])
    if not alphas:
        raise FitError("every bootstrap resample was degenerate")
    lo, hi = np.percentile(alphas, levels)
    return float(lo), float(hi)


def fit_with_ci(points, B: int = 100, seed=None) -> FitResult:
    res = loglog_fit(points)
    res.ci_low, res.ci_high = bootstrap_ci(points, B, seed)
    return res
