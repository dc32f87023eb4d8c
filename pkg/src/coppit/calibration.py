"""Calibration diagnostics for multivariate probabilistic forecasts.

The central object is the copula probability integral transform: push the
observation through the forecast CDF, h = H(y), then through the forecast's
Kendall distribution function, randomizing across any jump,

    u = K(h-) + v * (K(h) - K(h-)),      v ~ uniform(0, 1).

Under a calibrated forecast u is uniform on (0, 1), so departures show up in
a histogram of u values exactly as univariate PIT miscalibration does.  The
same machinery supports orthant directions other than the lower-left one
(``signs``), multivariate rank histograms with randomized tie-breaking, and
a climatological calibration curve that compares the pooled distribution of
h values against the average Kendall function.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

__all__ = [
    "CopPitRecord",
    "HistogramResult",
    "ClicalCurve",
    "pit",
    "coppit",
    "coppit_interval",
    "multivariate_rank",
    "histogram",
    "rank_histogram",
    "clical_curve",
    "cone_signs",
]

_QUADRANTS = {
    "sw": (-1, -1),
    "se": (1, -1),
    "ne": (1, 1),
    "nw": (-1, 1),
}


@dataclass
class CopPitRecord:
    """One copula PIT evaluation: jump interval [k_left, k_right] and the
    randomized value u drawn at position v inside it."""

    h: float
    k_left: float
    k_right: float
    v: float
    u: float
    rank: Optional[int] = None


@dataclass
class HistogramResult:
    counts: np.ndarray
    edges: np.ndarray
    n: int
    chi2: float
    chi2_df: int
    chi2_pvalue: float
    ks: Optional[float] = None
    ks_pvalue: Optional[float] = None


@dataclass
class ClicalCurve:
    grid: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    max_abs_gap: float


def _check_v(v):
    v = float(v)
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"randomization draw v must lie in [0, 1], got {v}")
    return v


def cone_signs(spec, dim=None):
    """Resolve a cone direction to a vector of signs.

    Accepts the quadrant names 'sw', 'se', 'ne', 'nw' (first letter pairs
    with the second coordinate: south/north, second with the first:
    west/east), a string of '+'/'-' characters, or a sequence of +-1 values.
    """
    if isinstance(spec, str):
        key = spec.strip().lower()
        if key in _QUADRANTS:
            signs = np.array(_QUADRANTS[key], dtype=int)
        elif key and set(key) <= {"+", "-"}:
            signs = np.array([1 if c == "+" else -1 for c in key], dtype=int)
        else:
            raise ValueError(f"cannot parse cone direction {spec!r}")
    else:
        signs = np.asarray(spec)
        if signs.ndim != 1 or signs.size == 0 or not np.all(np.isin(signs, (-1, 1))):
            raise ValueError(f"cone signs must be a vector of +-1 values, got {spec!r}")
        signs = signs.astype(int)
    if dim is not None and signs.size != dim:
        raise ValueError(f"cone direction has {signs.size} signs, expected {dim}")
    return signs


def pit(forecast, y, v):
    """Randomized univariate PIT, F(y-) + v * (F(y) - F(y-))."""
    v = np.asarray(v, dtype=float)
    if not np.all((v >= 0.0) & (v <= 1.0)):
        raise ValueError("randomization draws v must lie in [0, 1]")
    lo = forecast.cdf_left(y)
    hi = forecast.cdf(y)
    out = lo + v * (hi - lo)
    return float(out) if np.ndim(out) == 0 else out


def coppit(forecast, kendall_fn, y, v, signs=None):
    """Copula PIT of one observation under one forecast.

    ``kendall_fn`` must describe the same direction as ``signs``; use
    ``select_kendall`` with matching arguments to build it.
    """
    v = _check_v(v)
    h = forecast.cdf(y) if signs is None else forecast.orthant_cdf(signs, y)
    h = float(h)
    k_left = float(kendall_fn.eval_left(h))
    k_right = float(kendall_fn.eval(h))
    u = k_left + v * (k_right - k_left)
    return CopPitRecord(h=h, k_left=k_left, k_right=k_right, v=v, u=u)


def _prerank_setup(points, y, signs):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError(f"points must have shape (m, d), got {np.shape(points)}")
    yv = np.asarray(y, dtype=float).reshape(-1)
    if yv.size != pts.shape[1]:
        raise ValueError(f"observation has {yv.size} coordinates, ensemble has {pts.shape[1]}")
    if signs is not None:
        refl = -cone_signs(signs, dim=pts.shape[1]).astype(float)
        pts = pts * refl
        yv = yv * refl
    m = pts.shape[0]
    c0 = int(np.all(pts <= yv, axis=1).sum())
    y_dom = np.all(yv <= pts, axis=1).astype(int)
    chunk = max(1, 4_000_000 // max(1, pts.size))
    cnt = np.empty(m, dtype=int)
    for lo in range(0, m, chunk):
        hi = min(m, lo + chunk)
        cnt[lo:hi] = np.all(pts[None, :, :] <= pts[lo:hi, None, :], axis=2).sum(axis=1)
    rho0 = 1 + c0
    rho = y_dom + cnt
    return m, rho0, rho, y_dom


def multivariate_rank(points, y, rng, signs=None):
    """Rank of the observation's pre-rank among the ensemble's, ties random.

    Pre-ranks count coordinatewise domination within the pooled set; the
    returned rank is uniform over the positions the observation could take
    among tied pre-ranks, an integer in 1..m+1.
    """
    m, rho0, rho, _ = _prerank_setup(points, y, signs)
    below = int((rho < rho0).sum())
    tied = int((rho == rho0).sum())
    return int(1 + below + rng.integers(0, tied + 1))


def coppit_interval(points, y, signs=None):
    """Jump interval of the ensemble copula PIT, computed from pre-ranks.

    Removing the observation's own contribution from each ensemble pre-rank
    and comparing against rho0 - 1 yields exactly the pair
    (K_m(H(y)-), K_m(H(y))) under the ensemble's own empirical Kendall
    function.
    """
    m, rho0, rho, y_dom = _prerank_setup(points, y, signs)
    base = rho - y_dom
    lo = int((base < rho0 - 1).sum())
    hi = int((base <= rho0 - 1).sum())
    return (lo / m, hi / m)


def histogram(values, bins=20):
    """Fixed-width histogram of values in [0, 1] with uniformity statistics.

    Bin i covers ((i-1)/B, i/B], with 0 folded into the first bin.  The
    chi-square statistic compares counts against the flat expectation; the
    Kolmogorov-Smirnov statistic and its exact p-value compare the sample
    against the uniform distribution.
    """
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 1 or vals.size == 0:
        raise ValueError("histogram needs a non-empty 1-d sample")
    if not np.all((vals >= 0.0) & (vals <= 1.0)):
        raise ValueError("histogram values must lie in [0, 1]")
    bins = int(bins)
    if bins < 1:
        raise ValueError(f"bin count must be positive, got {bins}")
    n = vals.size
    idx = np.clip(np.ceil(vals * bins).astype(int) - 1, 0, bins - 1)
    counts = np.bincount(idx, minlength=bins)
    expected = n / bins
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    chi2_df = bins - 1
    chi2_p = float(stats.chi2.sf(chi2, chi2_df))

    srt = np.sort(vals)
    grid_hi = np.arange(1, n + 1) / n
    grid_lo = np.arange(0, n) / n
    ks = float(max(np.max(grid_hi - srt), np.max(srt - grid_lo)))
    ks_p = float(stats.kstwo.sf(ks, n))

    return HistogramResult(
        counts=counts,
        edges=np.linspace(0.0, 1.0, bins + 1),
        n=n,
        chi2=chi2,
        chi2_df=chi2_df,
        chi2_pvalue=chi2_p,
        ks=ks,
        ks_pvalue=ks_p,
    )


def rank_histogram(ranks, m):
    """Histogram of integer ranks over the m+1 possible positions."""
    r = np.asarray(ranks)
    if r.ndim != 1 or r.size == 0:
        raise ValueError("rank histogram needs a non-empty 1-d sample")
    if not np.all((r == np.floor(r)) & (r >= 1) & (r <= m + 1)):
        raise ValueError(f"ranks must be integers in 1..{m + 1}")
    n = r.size
    counts = np.bincount(r.astype(int) - 1, minlength=m + 1)
    expected = n / (m + 1)
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    chi2_df = m
    chi2_p = float(stats.chi2.sf(chi2, chi2_df))
    return HistogramResult(
        counts=counts,
        edges=np.arange(1, m + 3) - 0.5,
        n=n,
        chi2=chi2,
        chi2_df=chi2_df,
        chi2_pvalue=chi2_p,
    )


def clical_curve(h_obs, kendall_fns, grid=None):
    """Climatological copula-calibration curve.

    Compares the pooled empirical CDF of the h = H_j(y_j) values (lhs)
    against the case-averaged Kendall function (rhs) on a grid; for a
    calibrated system the two coincide.  ``kendall_fns`` may be a single
    shared Kendall function or one per case.
    """
    h = np.asarray(h_obs, dtype=float)
    if h.ndim != 1 or h.size == 0:
        raise ValueError("need a non-empty 1-d array of h values")
    if not np.all((h >= 0.0) & (h <= 1.0)):
        raise ValueError("h values must lie in [0, 1]")
    if grid is None:
        grid = np.linspace(0.0, 1.0, 101)
    else:
        grid = np.asarray(grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0 or not np.all((grid >= 0) & (grid <= 1)):
            raise ValueError("grid must be a 1-d array of values in [0, 1]")

    srt = np.sort(h)
    lhs = np.searchsorted(srt, grid, side="right") / h.size

    if hasattr(kendall_fns, "eval"):
        rhs = np.asarray(kendall_fns.eval(grid), dtype=float)
    else:
        fns = list(kendall_fns)
        if len(fns) != h.size:
            raise ValueError(f"got {len(fns)} Kendall functions for {h.size} cases")
        rhs = np.zeros_like(grid)
        for kf in fns:
            rhs += kf.eval(grid)
        rhs /= len(fns)

    gap = float(np.max(np.abs(lhs - rhs)))
    return ClicalCurve(grid=grid, lhs=lhs, rhs=rhs, max_abs_gap=gap)
