"""Synthetic forecast-verification scenarios with known deficiencies.

Three scenario generators, each producing forecast-observation pairs from a
latent-parameter truth together with the full set of calibration records:

- ``run_bivariate``: a d=2 Gumbel-copula truth with per-case latent betas
  and eight forecasters labelled by which of (margin 1, margin 2, copula)
  they get right; e.g. FTT biases the first margin, TFT underdisperses the
  second, TTF shrinks the dependence.
- ``run_highdim``: a d=50 Frank-copula truth against a correct forecast, an
  attenuated-dependence Frank forecast, and a Joe forecast with matched
  pairwise tau; computes both copula PIT values and m=8 multivariate ranks,
  which is where the two diagnostics visibly part ways.
- ``run_demo_emos``: a bivariate Gaussian truth with a correct forecast, a
  zero-correlation variant, and an underdispersed m=8 ensemble.

All randomness flows through fixed sub-streams of the run seed (latent
draws, the shared randomization draws v, rank tie-breaking, per-forecaster
Monte Carlo), so any subset of forecasters reproduces the full run's values
bit for bit and reruns are deterministic.
"""

import hashlib
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np
from scipy.special import ndtr, ndtri

from .bvn import bvn_cdf
from .calibration import ClicalCurve, multivariate_rank
from .copulas import (
    ArchimedeanCopula,
    copula_cdf,
    kendall_cdf,
    kendall_sample,
    sample_copula,
    tau_to_theta,
)
from .forecasts import CopulaMarginalForecast, GaussianForecast, Normal
from .samplers import DEFAULT_SEED, beta, substream, uniform01

BIVARIATE_LABELS = ("TTT", "TTF", "TFT", "TFF", "FTT", "FTF", "FFT", "FFF")
QUADRANTS = ("sw", "se", "ne", "nw")
HIGHDIM_VARIANTS = ("true-frank", "shrunk-frank", "joe-swap")
DEMO_VARIANTS = ("correct", "independent", "ensemble")

_DEMO_RHO = 0.6
_DEMO_SHRINK = 0.7  # sd scale of the underdispersed demo ensemble

__all__ = [
    "BIVARIATE_LABELS",
    "QUADRANTS",
    "HIGHDIM_VARIANTS",
    "DEMO_VARIANTS",
    "ForecasterBatch",
    "BivariateStudy",
    "HighDimBatch",
    "DemoBatch",
    "run_bivariate",
    "run_highdim",
    "run_demo_emos",
    "bivariate_clical",
    "batch_digest",
]


@dataclass
class ForecasterBatch:
    """Per-case records of one bivariate-study forecaster."""

    label: str
    mu1: np.ndarray
    sd2: np.ndarray
    theta: np.ndarray
    h: np.ndarray
    k_left: np.ndarray
    k_right: np.ndarray
    v: np.ndarray
    u: np.ndarray
    pit1: np.ndarray
    pit2: np.ndarray
    directional: Optional[dict] = None

    def forecast(self, j):
        """The announced forecast distribution of case j."""
        cop = ArchimedeanCopula("gumbel", theta=float(self.theta[j]))
        margins = [Normal(float(self.mu1[j]), 1.0), Normal(0.0, float(self.sd2[j]))]
        return CopulaMarginalForecast(cop, margins)


@dataclass
class BivariateStudy:
    j: int
    seed: int
    b1: np.ndarray
    b2: np.ndarray
    tau: np.ndarray
    y: np.ndarray
    forecasters: tuple

    def batch(self, label):
        for fb in self.forecasters:
            if fb.label == label:
                return fb
        raise KeyError(f"no forecaster {label!r} in this run")


def _check_j(j):
    j = int(j)
    if j < 1:
        raise ValueError(f"need at least one case, got {j}")
    return j


def run_bivariate(j=4000, seed=DEFAULT_SEED, labels=BIVARIATE_LABELS,
                  include_directional=False, directional_n=10_000):
    """Bivariate Gumbel study: latent betas, truth sampling, eight forecasters.

    Truth per case: B1 ~ Beta(2,5), B2 ~ Beta(5,2); Y has a Gumbel copula
    with tau = (B1+B2)/2, margin 1 ~ N(2-B1, 1), margin 2 ~ N(0, 1/B2).
    A label's letters flag (margin 1, margin 2, copula): F entries bias the
    first mean by 0.8, shrink the second variance by 0.8, and shrink tau by
    0.6.  The copula PIT uses the closed-form Gumbel Kendall function; with
    ``include_directional``, the four quadrant orthant records are added
    using one shared Monte Carlo sample per case for the four directions.
    """
    j = _check_j(j)
    labels = tuple(labels)
    unknown = set(labels) - set(BIVARIATE_LABELS)
    if unknown or not labels:
        raise ValueError(f"labels must be a non-empty subset of {BIVARIATE_LABELS}, got {labels!r}")

    lat = substream(seed, 0)
    b1 = beta(lat, 2.0, 5.0, j)
    b2 = beta(lat, 5.0, 2.0, j)
    tau = (b1 + b2) / 2.0
    theta = tau_to_theta("gumbel", tau)
    u_truth = sample_copula("gumbel", lat, theta=theta, dim=2, n=j)
    y1 = (2.0 - b1) + ndtri(u_truth[:, 0])
    y2 = np.sqrt(1.0 / b2) * ndtri(u_truth[:, 1])
    y = np.column_stack([y1, y2])

    v = uniform01(substream(seed, 1), j)

    batches = []
    for label in BIVARIATE_LABELS:  # canonical order, stable sub-streams
        if label not in labels:
            continue
        f_idx = BIVARIATE_LABELS.index(label)
        mu1 = (2.0 - b1) if label[0] == "T" else 0.8 * (2.0 - b1)
        var2 = 1.0 / b2 if label[1] == "T" else 0.8 / b2
        sd2 = np.sqrt(var2)
        tau_hat = tau if label[2] == "T" else 0.6 * tau
        theta_hat = tau_to_theta("gumbel", tau_hat)

        pit1 = ndtr(y1 - mu1)
        pit2 = ndtr(y2 / sd2)
        h = copula_cdf("gumbel", np.column_stack([pit1, pit2]), theta_hat)
        k = kendall_cdf("gumbel", h, theta_hat)
        u = k + v * (k - k)  # continuous case: the jump interval is a point

        directional = None
        if include_directional:
            directional = _bivariate_directional(
                substream(seed, 3, f_idx), theta_hat, pit1, pit2, h, v, int(directional_n))

        batches.append(ForecasterBatch(
            label=label, mu1=mu1, sd2=sd2, theta=theta_hat,
            h=h, k_left=k.copy(), k_right=k.copy(), v=v, u=u,
            pit1=pit1, pit2=pit2, directional=directional))

    return BivariateStudy(j=j, seed=int(seed), b1=b1, b2=b2, tau=tau, y=y,
                          forecasters=tuple(batches))


def _bivariate_directional(rng, theta_hat, pit1, pit2, h, v, n):
    """Quadrant orthant records; Kendall functions by per-case Monte Carlo."""
    if n < 1:
        raise ValueError(f"directional Monte Carlo size must be positive, got {n}")
    j = h.size
    out = {q: {key: np.empty(j) for key in ("h", "k_left", "k_right", "u")}
           for q in QUADRANTS}
    for i in range(j):
        draws = sample_copula("gumbel", rng, theta=float(theta_hat[i]), dim=2, n=n)
        c = copula_cdf("gumbel", draws, float(theta_hat[i]))
        # orthant value at the outcome and at each copula draw, per quadrant
        pairs = {
            "sw": (h[i], c),
            "se": (pit2[i] - h[i], draws[:, 1] - c),
            "ne": (1.0 - pit1[i] - pit2[i] + h[i], 1.0 - draws[:, 0] - draws[:, 1] + c),
            "nw": (pit1[i] - h[i], draws[:, 0] - c),
        }
        for q, (hq, g) in pairs.items():
            g = np.sort(np.clip(g, 0.0, 1.0))
            hq = min(max(hq, 0.0), 1.0)
            kl = np.searchsorted(g, hq, side="left") / n
            kr = np.searchsorted(g, hq, side="right") / n
            rec = out[q]
            rec["h"][i] = hq
            rec["k_left"][i] = kl
            rec["k_right"][i] = kr
            rec["u"][i] = kl + v[i] * (kr - kl)
    return out


def bivariate_clical(study, label, grid=None):
    """Climatological calibration curve of one forecaster in a bivariate run.

    lhs is the empirical CDF of the h values; rhs averages the per-case
    closed-form Gumbel Kendall functions over the study.
    """
    fb = study.batch(label)
    if grid is None:
        grid = np.linspace(0.0, 1.0, 101)
    else:
        grid = np.asarray(grid, dtype=float)
    srt = np.sort(fb.h)
    lhs = np.searchsorted(srt, grid, side="right") / fb.h.size
    rhs = kendall_cdf("gumbel", grid[None, :], fb.theta[:, None]).mean(axis=0)
    gap = float(np.max(np.abs(lhs - rhs)))
    return ClicalCurve(grid=grid, lhs=lhs, rhs=rhs, max_abs_gap=gap)


@dataclass
class HighDimBatch:
    variant: str
    family: str
    j: int
    d: int
    m: int
    seed: int
    kendall_n: int
    theta_true: np.ndarray
    theta_hat: np.ndarray
    h: np.ndarray
    k_left: np.ndarray
    k_right: np.ndarray
    v: np.ndarray
    u: np.ndarray
    ranks: np.ndarray


def run_highdim(variant, j=4000, seed=DEFAULT_SEED, d=50, m=8, kendall_n=10_000):
    """High-dimensional Frank study: one forecast variant against the truth.

    Truth per case: Frank copula in dimension d with pairwise
    tau = (B1+B2)/2 and standard normal margins.  Variants: 'true-frank'
    announces the truth, 'shrunk-frank' uses 0.8*tau, 'joe-swap' keeps tau
    but swaps in a Joe copula.  The forecast Kendall function is estimated
    per case by Monte Carlo (``kendall_n`` draws through the frailty
    identity); ranks come from a fresh m-member ensemble drawn from the
    forecast.  Runs with the same (j, seed, d) share the identical truth
    sample across variants.  Per-case Monte Carlo draw order: ensemble
    first, then the Kendall sample.
    """
    if variant not in HIGHDIM_VARIANTS:
        raise ValueError(f"variant must be one of {HIGHDIM_VARIANTS}, got {variant!r}")
    j = _check_j(j)
    d = int(d)
    m = int(m)
    kendall_n = int(kendall_n)
    if d < 2 or m < 1 or kendall_n < 1:
        raise ValueError("need d >= 2, m >= 1, kendall_n >= 1")

    lat = substream(seed, 0)
    b1 = beta(lat, 2.0, 5.0, j)
    b2 = beta(lat, 5.0, 2.0, j)
    tau = (b1 + b2) / 2.0
    if not np.all(tau > 0.0):
        raise ValueError("latent tau must be positive for the Frank truth")
    theta_true = tau_to_theta("frank", tau)
    u_truth = sample_copula("frank", lat, theta=theta_true, dim=d, n=j)
    y = ndtri(u_truth)

    v = uniform01(substream(seed, 1), j)
    ties = substream(seed, 2)

    family, tau_hat = {
        "true-frank": ("frank", tau),
        "shrunk-frank": ("frank", 0.8 * tau),
        "joe-swap": ("joe", tau),
    }[variant]
    theta_hat = tau_to_theta(family, tau_hat)

    h = copula_cdf(family, ndtr(y), theta_hat)

    rng_f = substream(seed, 3, HIGHDIM_VARIANTS.index(variant))
    k_left = np.empty(j)
    k_right = np.empty(j)
    ranks = np.empty(j, dtype=int)
    for i in range(j):
        th = float(theta_hat[i])
        ens = ndtri(sample_copula(family, rng_f, theta=th, dim=d, n=m))
        ranks[i] = multivariate_rank(ens, y[i], ties)
        g = np.sort(kendall_sample(family, rng_f, theta=th, dim=d, n=kendall_n))
        k_left[i] = np.searchsorted(g, h[i], side="left") / kendall_n
        k_right[i] = np.searchsorted(g, h[i], side="right") / kendall_n
    u = k_left + v * (k_right - k_left)

    return HighDimBatch(variant=variant, family=family, j=j, d=d, m=m,
                        seed=int(seed), kendall_n=kendall_n,
                        theta_true=theta_true, theta_hat=theta_hat,
                        h=h, k_left=k_left, k_right=k_right, v=v, u=u,
                        ranks=ranks)


@dataclass
class DemoBatch:
    variant: str
    j: int
    m: Optional[int]
    seed: int
    h: np.ndarray
    k_left: np.ndarray
    k_right: np.ndarray
    v: np.ndarray
    u: np.ndarray
    ranks: Optional[np.ndarray] = None


def run_demo_emos(variant, j=4000, seed=DEFAULT_SEED, m=8, kendall_n=100_000):
    """Bivariate Gaussian demo: correct, zero-correlation, ensemble variants.

    Truth per case: mean drawn N(0, I), covariance fixed with unit variances
    and correlation 0.6.  'correct' announces the truth (its Kendall
    function depends only on the correlation, so one shared Monte Carlo
    estimate serves every case); 'independent' keeps the margins but forces
    correlation zero (independence copula, closed-form Kendall function);
    'ensemble' issues m draws with standard deviations shrunk to 0.7.
    """
    if variant not in DEMO_VARIANTS:
        raise ValueError(f"variant must be one of {DEMO_VARIANTS}, got {variant!r}")
    j = _check_j(j)
    m = int(m)
    kendall_n = int(kendall_n)
    if m < 1 or kendall_n < 1:
        raise ValueError("need m >= 1, kendall_n >= 1")

    rho = _DEMO_RHO
    chol = np.linalg.cholesky(np.array([[1.0, rho], [rho, 1.0]]))
    lat = substream(seed, 0)
    mu = lat.normal(size=(j, 2))
    y = mu + lat.normal(size=(j, 2)) @ chol.T
    v = uniform01(substream(seed, 1), j)
    ties = substream(seed, 2)
    resid = y - mu

    ranks = None
    if variant == "correct":
        h = bvn_cdf(resid[:, 0], resid[:, 1], rho)
        rng_f = substream(seed, 3, 0)
        draws = rng_f.normal(size=(kendall_n, 2)) @ chol.T
        g = np.sort(bvn_cdf(draws[:, 0], draws[:, 1], rho))
        k_left = np.searchsorted(g, h, side="left") / kendall_n
        k_right = np.searchsorted(g, h, side="right") / kendall_n
    elif variant == "independent":
        h = ndtr(resid[:, 0]) * ndtr(resid[:, 1])
        k = kendall_cdf("independence", h)
        k_left = k.copy()
        k_right = k.copy()
    else:
        rng_f = substream(seed, 3, 2)
        h = np.empty(j)
        k_left = np.empty(j)
        k_right = np.empty(j)
        ranks = np.empty(j, dtype=int)
        scale = (_DEMO_SHRINK * chol).T
        from .calibration import coppit_interval
        from .forecasts import EnsembleForecast

        for i in range(j):
            pts = mu[i] + rng_f.normal(size=(m, 2)) @ scale
            h[i] = EnsembleForecast(pts).cdf(y[i])
            k_left[i], k_right[i] = coppit_interval(pts, y[i])
            ranks[i] = multivariate_rank(pts, y[i], ties)
    u = k_left + v * (k_right - k_left)

    return DemoBatch(variant=variant, j=j, m=m if variant == "ensemble" else None,
                     seed=int(seed), h=h, k_left=k_left, k_right=k_right,
                     v=v, u=u, ranks=ranks)


def demo_truth_forecast(mu, rho=_DEMO_RHO):
    """The demo scenario's announced truth for one case mean."""
    cov = np.array([[1.0, rho], [rho, 1.0]])
    return GaussianForecast(np.asarray(mu, dtype=float), cov)


def batch_digest(obj):
    """Hex digest of every array field of a result dataclass, field order fixed."""
    hasher = hashlib.sha256()
    for f in fields(obj):
        val = getattr(obj, f.name)
        hasher.update(f.name.encode())
        if isinstance(val, np.ndarray):
            hasher.update(np.ascontiguousarray(val).tobytes())
        elif isinstance(val, dict):
            for key in sorted(val):
                hasher.update(str(key).encode())
                sub = val[key]
                for k2 in sorted(sub):
                    hasher.update(k2.encode())
                    hasher.update(np.ascontiguousarray(sub[k2]).tobytes())
        elif isinstance(val, tuple):
            for item in val:
                hasher.update(batch_digest(item).encode())
        elif val is not None:
            hasher.update(repr(val).encode())
    return hasher.hexdigest()
