"""Kendall distribution functions: K_H(w) = pr{H(X) <= w} for X ~ H.

K is the CDF of the forecast's own CDF evaluated at a draw from itself.
Both the value K(w) and the left limit K(w-) matter: the copula PIT places
a randomized point inside the jump interval [K(H(y)-), K(H(y))].

Construction routes:

- uniform_kendall: K(w) = w, exact for continuous univariate forecasts.
- analytic_kendall: bivariate Archimedean closed form w - phi(w)/phi'(w).
- monte_carlo_kendall: empirical CDF of H(X_1..n) for X_i sampled from the
  forecast; works for any forecast and any orthant direction.
- pseudo_kendall: the empirical Kendall function of an ensemble, built from
  pseudo-observations w_k = (1/m) #{j : x_j <= x_k coordinatewise}.

``select_kendall`` picks a route automatically: uniform for univariate
continuous forecasts, pseudo-observations for ensembles, the closed form
for bivariate copula-marginal forecasts, Monte Carlo otherwise.
"""

import numpy as np

from .copulas import ArchimedeanCopula, kendall_sample
from .forecasts import CopulaMarginalForecast, EnsembleForecast, UnivariateForecast

DEFAULT_MC_SIZE = 10_000

__all__ = [
    "DEFAULT_MC_SIZE",
    "KendallFn",
    "uniform_kendall",
    "analytic_kendall",
    "monte_carlo_kendall",
    "archimedean_mc_kendall",
    "pseudo_kendall",
    "pseudo_observations",
    "select_kendall",
]


def _check_w(w):
    arr = np.asarray(w, dtype=float)
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        raise ValueError("Kendall function arguments must lie in [0, 1]")
    return arr


class KendallFn:
    """A Kendall distribution function with value and left-limit evaluation."""

    def __init__(self, source):
        self.source = source

    def eval(self, w):
        raise NotImplementedError

    def eval_left(self, w):
        raise NotImplementedError


class _Uniform(KendallFn):
    def __init__(self):
        super().__init__("uniform")

    def eval(self, w):
        arr = _check_w(w)
        return float(arr) if arr.ndim == 0 else arr.copy()

    eval_left = eval


class _Analytic(KendallFn):
    def __init__(self, copula):
        if not isinstance(copula, ArchimedeanCopula) or copula.dim != 2:
            raise ValueError("analytic Kendall functions require a bivariate Archimedean copula")
        super().__init__("analytic")
        self.copula = copula

    def eval(self, w):
        return self.copula.kendall_cdf(_check_w(w))

    eval_left = eval  # continuous: no jumps


class _Empirical(KendallFn):
    def __init__(self, values, source):
        vals = np.asarray(values, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("empirical Kendall function needs a non-empty 1-d sample")
        if not np.all((vals >= 0.0) & (vals <= 1.0)):
            raise ValueError("empirical Kendall sample must lie in [0, 1]")
        super().__init__(source)
        self.values = np.sort(vals)
        self.n = vals.size

    def eval(self, w):
        arr = _check_w(w)
        out = np.searchsorted(self.values, arr, side="right") / self.n
        return float(out) if arr.ndim == 0 else out

    def eval_left(self, w):
        arr = _check_w(w)
        out = np.searchsorted(self.values, arr, side="left") / self.n
        return float(out) if arr.ndim == 0 else out


def uniform_kendall():
    """K(w) = w: the Kendall function of any continuous univariate forecast."""
    return _Uniform()


def analytic_kendall(copula):
    """Closed-form bivariate Archimedean Kendall function."""
    return _Analytic(copula)


def monte_carlo_kendall(forecast, rng, n=DEFAULT_MC_SIZE, signs=None):
    """Empirical Kendall function of H(X) from n forecast draws.

    With ``signs``, estimates the Kendall function of the orthant CDF
    H^signs(X) instead of the joint CDF.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"Monte Carlo sample size must be positive, got {n}")
    x = forecast.sample(rng, n)
    h = forecast.cdf(x) if signs is None else forecast.orthant_cdf(signs, x)
    return _Empirical(h, "mc")


def archimedean_mc_kendall(family, theta, dim, rng, n=DEFAULT_MC_SIZE):
    """Empirical Kendall function of a d-dimensional Archimedean copula.

    Samples the Kendall distribution directly through the frailty identity
    instead of evaluating the copula CDF at each draw; the result is
    distributed identically to ``monte_carlo_kendall`` on a copula-marginal
    forecast but far cheaper in high dimension.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"Monte Carlo sample size must be positive, got {n}")
    return _Empirical(kendall_sample(family, rng, theta=theta, dim=dim, n=n), "mc")


def pseudo_observations(points):
    """w_k = (1/m) #{j : x_j <= x_k coordinatewise} for an (m, d) point set."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError(f"points must have shape (m, d), got {np.shape(points)}")
    m, d = pts.shape
    chunk = max(1, 4_000_000 // max(1, m * d))
    out = np.empty(m)
    for lo in range(0, m, chunk):
        hi = min(m, lo + chunk)
        out[lo:hi] = np.all(pts[None, :, :] <= pts[lo:hi, None, :], axis=2).sum(axis=1) / m
    return out


def pseudo_kendall(points):
    """Empirical Kendall function of an ensemble from its own pseudo-observations."""
    return _Empirical(pseudo_observations(points), "pseudo")


def select_kendall(forecast, strategy="auto", rng=None, n=DEFAULT_MC_SIZE, signs=None):
    """Build the Kendall function for a forecast under the given strategy.

    Strategies: 'auto', 'analytic', 'mc', 'pseudo'.  'auto' resolves to
    uniform for univariate continuous forecasts, pseudo for ensembles,
    analytic for bivariate copula-marginal forecasts evaluated on the plain
    CDF, and Monte Carlo otherwise.
    """
    if strategy == "auto":
        if isinstance(forecast, UnivariateForecast):
            return uniform_kendall()
        if isinstance(forecast, EnsembleForecast):
            if forecast.dim == 1:
                return pseudo_kendall(forecast.points)
            if signs is None or np.all(np.asarray(signs) == -1):
                return pseudo_kendall(forecast.points)
            refl = -np.asarray(signs, dtype=float)
            return pseudo_kendall(forecast.points * refl[None, :])
        if isinstance(forecast, CopulaMarginalForecast) and forecast.dim == 2 and (
                signs is None or np.all(np.asarray(signs) == -1)):
            return analytic_kendall(forecast.copula)
        strategy = "mc"
    if strategy == "analytic":
        if not isinstance(forecast, CopulaMarginalForecast) or forecast.dim != 2:
            raise ValueError("analytic Kendall functions require a bivariate copula-marginal forecast")
        if signs is not None and not np.all(np.asarray(signs) == -1):
            raise ValueError("the closed form covers the plain CDF direction only; use mc for other cones")
        return analytic_kendall(forecast.copula)
    if strategy == "pseudo":
        if not isinstance(forecast, EnsembleForecast):
            raise ValueError("pseudo-observation Kendall functions require an ensemble forecast")
        if signs is None or np.all(np.asarray(signs) == -1):
            return pseudo_kendall(forecast.points)
        refl = -np.asarray(signs, dtype=float)
        return pseudo_kendall(forecast.points * refl[None, :])
    if strategy == "mc":
        if rng is None:
            raise ValueError("Monte Carlo Kendall estimation needs an rng")
        return monte_carlo_kendall(forecast, rng, n, signs)
    raise ValueError(f"unknown Kendall strategy {strategy!r} (use auto, analytic, mc, or pseudo)")
