"""Seedable random streams and the distribution samplers the package needs.

Every random quantity in the package is drawn from a numpy Generator backed
by the counter-based Philox bit generator, so runs are reproducible bit for
bit across platforms for a given seed.  Independent simulation components
get independent sub-streams derived from the master seed through
SeedSequence spawn keys: ``substream(seed, k, ...)`` is the stream for
component ``(k, ...)``, and adding a new component (a new spawn key) never
perturbs the draws of existing ones.

Beyond the numpy built-ins (uniform, normal, exponential, beta, gamma) the
module provides three samplers numpy lacks: positive stable variates
(Kanter's representation), logarithmic-series variates (Kemp's LS scheme,
parameterized by log(1-p) so p arbitrarily close to 1 stays well-posed),
and Sibuya variates (asymptotic inversion corrected by the exact survival
function).  The latter three are the frailty distributions used for
Archimedean copula sampling.
"""

import math

import numpy as np
from scipy.special import gammaln

DEFAULT_SEED = 123456789

__all__ = [
    "DEFAULT_SEED",
    "make_rng",
    "substream",
    "uniform01",
    "standard_normal",
    "exponential",
    "beta",
    "gamma",
    "positive_stable",
    "log_series",
    "sibuya",
]


def _check_seed(seed):
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise ValueError(f"seed must be an integer, got {seed!r}")
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return int(seed)


def make_rng(seed=DEFAULT_SEED):
    """Master Generator for ``seed`` (Philox; counter-based, jump-free)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(_check_seed(seed))))


def substream(seed, *key):
    """Independent Generator for component ``key`` under ``seed``.

    The key is an arbitrary tuple of non-negative integers.  Streams for
    distinct keys are statistically independent, and the mapping
    (seed, key) -> stream is stable: new keys never disturb old ones.
    """
    seed = _check_seed(seed)
    if not key:
        raise ValueError("substream requires at least one key component")
    key = tuple(int(k) for k in key)
    if any(k < 0 for k in key):
        raise ValueError(f"substream key components must be non-negative, got {key}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def uniform01(rng, size=None):
    """U(0,1) draws."""
    return rng.random(size)


def standard_normal(rng, size=None):
    return rng.standard_normal(size)


def exponential(rng, size=None):
    """Unit-rate exponentials."""
    return rng.standard_exponential(size)


def beta(rng, a, b, size=None):
    if np.any(np.asarray(a) <= 0) or np.any(np.asarray(b) <= 0):
        raise ValueError(f"beta requires a > 0 and b > 0, got a={a}, b={b}")
    return rng.beta(a, b, size)


def gamma(rng, shape, size=None):
    if np.any(np.asarray(shape) <= 0):
        raise ValueError(f"gamma requires shape > 0, got {shape}")
    return rng.standard_gamma(shape, size)


def _broadcast_param(param, size, name, low, high, low_open=True, high_closed=True):
    arr = np.asarray(param, dtype=float)
    lo_ok = arr > low if low_open else arr >= low
    hi_ok = arr <= high if high_closed else arr < high
    if not np.all(lo_ok & hi_ok):
        lo_b = "(" if low_open else "["
        hi_b = "]" if high_closed else ")"
        raise ValueError(f"{name} must lie in {lo_b}{low}, {high}{hi_b}, got {param!r}")
    if size is None:
        size = arr.shape if arr.shape else None
    shape = () if size is None else (size if isinstance(size, tuple) else (size,))
    return np.broadcast_to(arr, shape), shape, size is None and arr.shape == ()


def positive_stable(rng, alpha, size=None):
    """Positive stable variates with index ``alpha`` in (0, 1].

    Kanter's representation: with Theta ~ U(0, pi) and W ~ Exp(1),

        V = (A(Theta) / W)^((1 - alpha) / alpha),
        A(t) = [sin(alpha t)^alpha * sin((1-alpha) t)^(1-alpha) / sin(t)]^(1/(1-alpha)),

    has Laplace transform E exp(-sV) = exp(-s^alpha).  Computed in log
    space; alpha = 1 gives the degenerate unit mass.  ``alpha`` may be an
    array (one index per draw).
    """
    alpha_b, shape, scalar_out = _broadcast_param(alpha, size, "alpha", 0.0, 1.0)
    theta = rng.random(shape) * np.pi
    w = rng.standard_exponential(shape)
    # guard the open-interval assumptions; p(boundary) = 0 but floats happen
    theta = np.clip(theta, 1e-300, np.pi * (1 - 1e-16))
    w = np.maximum(w, 1e-300)
    out = np.ones(shape)
    act = alpha_b < 1.0
    if np.any(act):
        a = alpha_b[act]
        t = theta[act]
        log_a_num = a * np.log(np.sin(a * t)) + (1 - a) * np.log(np.sin((1 - a) * t)) - np.log(np.sin(t))
        # V = (A/W)^((1-a)/a), log A = log_a_num / (1 - a)
        log_v = (1 - a) / a * (log_a_num / (1 - a) - np.log(w[act]))
        out[act] = np.exp(log_v)
    if scalar_out:
        return float(out[()])
    return out


def _log_series_from_log1mp(rng, log1mp, size=None):
    """Log-series variates given r = log(1 - p) < 0 (may be an array).

    Kemp's LS scheme: draw V ~ U(0,1); if V >= p return 1; else draw
    U ~ U(0,1) and set Q = 1 - exp(U * log(1-p)) = 1 - (1-p)^U; return
    floor(1 + log(V) / log(Q)), with the degenerate Q cases mapped to 1.
    Works directly from log(1-p), so p indistinguishable from 1.0 in
    float64 is still exact.
    """
    r = np.asarray(log1mp, dtype=float)
    if not np.all(r < 0):
        raise ValueError(f"log(1-p) must be negative, got {log1mp!r}")
    if size is None:
        size = r.shape if r.shape else None
    shape = () if size is None else (size if isinstance(size, tuple) else (size,))
    scalar_out = size is None and r.shape == ()
    r = np.broadcast_to(r, shape)
    v = np.maximum(rng.random(shape), 2.0**-53)
    u = np.maximum(rng.random(shape), 2.0**-53)
    out = np.ones(shape)
    big = v < -np.expm1(r)  # V >= p is an immediate K = 1
    if np.any(big):
        x = u[big] * r[big]  # log((1-p)^U) < 0
        lv = np.log(v[big])
        # geometric inversion K = floor(1 + log V / log Q), Q = 1 - e^x
        log_q = np.where(x > -0.6931471805599453, np.log(-np.expm1(x)), np.log1p(-np.exp(x)))
        with np.errstate(divide="ignore"):
            ratio = lv / log_q
        deep = x < -600.0
        if np.any(deep):
            # e^x underflows; log Q = -e^x exactly, so the ratio is -log(V) e^{-x}
            lr = np.log(-lv[deep]) - x[deep]
            ratio[deep] = np.exp(np.minimum(lr, 690.0))
        out[big] = np.maximum(np.floor(1.0 + ratio), 1.0)
    if scalar_out:
        return float(out[()])
    return out


def log_series(rng, p, size=None):
    """Logarithmic-series variates, pmf(k) = -p^k / (k log(1-p)), k >= 1.

    Returns integer-valued float64 (the tails of companion frailty uses
    exceed int64 for extreme parameters).  ``p`` in (0, 1), array ok.
    """
    arr = np.asarray(p, dtype=float)
    if not np.all((arr > 0) & (arr < 1)):
        raise ValueError(f"p must lie in (0, 1), got {p!r}")
    return _log_series_from_log1mp(rng, np.log1p(-arr), size)


def _sibuya_log_sf(k, alpha):
    """log S(k) for the Sibuya(alpha) survival S(k) = 1/(k B(k, 1-alpha)).

    The gammaln difference cancels catastrophically for large k (both terms
    ~ k log k while the result is ~ -alpha log k), so past 1e6 the
    asymptotic expansion takes over; at the crossover both forms agree to
    ~1e-9 absolute.
    """
    k = np.asarray(k, dtype=float)
    direct = gammaln(k + 1 - alpha) - gammaln(k + 1) - gammaln(1 - alpha)
    expand = -alpha * np.log(k) - gammaln(1 - alpha) - alpha * (1 - alpha) / (2 * k)
    return np.where(k <= 1e6, direct, expand)


_SIBUYA_TABLE_K = 24


def _sibuya_invert(u, alpha):
    """Smallest integer k >= 1 with S(k) <= 1 - u, for u, alpha arrays.

    Answers up to _SIBUYA_TABLE_K come from the exact product
    S(k) = prod_{j<=k} (1 - alpha/j); larger ones from the asymptotic
    inverse k ~ ((1-u) Gamma(1-alpha))^(-1/alpha), which is within one of
    the truth once k is past the table (verified exhaustively in tests),
    followed by exact-survival correction steps.
    """
    shape = np.broadcast(u, alpha).shape
    u = np.broadcast_to(np.asarray(u, dtype=float), shape)
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), shape)
    out = np.ones(shape)
    big = u > alpha  # pr(K = 1) = alpha
    if not np.any(big):
        return out
    a = alpha[big]
    log_tail = np.log1p(-u[big])  # log(1 - u) = target log-survival
    ks = np.arange(1, _SIBUYA_TABLE_K + 1, dtype=float)
    log_sf_table = np.cumsum(np.log1p(-a[:, None] / ks[None, :]), axis=1)
    in_table = log_sf_table[:, -1] <= log_tail
    k_big = np.ones(a.shape)
    if np.any(in_table):
        # first column whose log-survival drops to the target
        k_big[in_table] = 1.0 + np.argmax(log_sf_table[in_table] <= log_tail[in_table, None], axis=1)
    rest = ~in_table
    if np.any(rest):
        ar = a[rest]
        tr = log_tail[rest]
        # solve -alpha log k - alpha (1-alpha)/(2k) = T for log k; the
        # second-order term matters because the residual gets divided by
        # alpha.  Past float granularity (k ~ 2^53) skip the refinement,
        # and cap at ~1e299: beyond that no representable integer is exact.
        log_kc = -(tr + gammaln(1 - ar)) / ar
        log_kc = np.minimum(log_kc, 690.0)
        small_enough = log_kc < 36.0
        k0 = np.exp(np.minimum(log_kc, 36.0))
        log_kc = np.where(small_enough, log_kc - (1 - ar) / (2 * k0), log_kc)
        k = np.maximum(np.floor(np.exp(log_kc)) - 2.0, float(_SIBUYA_TABLE_K))
        for _ in range(6):
            k = np.where(_sibuya_log_sf(k, ar) > tr, k + 1.0, k)
        k_big[rest] = k
    out[big] = k_big
    return out


def sibuya(rng, alpha, size=None):
    """Sibuya(alpha) variates, alpha in (0, 1]: pr(K > k) = 1/(k B(k, 1-alpha)).

    Inverts one uniform per draw: u <= alpha gives K = 1 (pr(K=1) = alpha);
    otherwise the asymptotic inverse k ~ ((1-u) Gamma(1-alpha))^(-1/alpha)
    locates the answer to within one, and evaluating the exact survival
    function at the neighbouring integers pins it down.  Returns
    integer-valued float64 (infinite mean for alpha < 1; values can exceed
    int64).  ``alpha`` may be an array (one index per draw).
    """
    alpha_b, shape, scalar_out = _broadcast_param(alpha, size, "alpha", 0.0, 1.0)
    u = rng.random(shape)
    out = _sibuya_invert(u, alpha_b)
    if scalar_out:
        return float(out[()])
    return out
