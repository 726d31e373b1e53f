"""Distribution families for industrial mmWave channel statistics.

Implements the four continuous families used to describe 60 GHz channel
parameters (generalized extreme value, generalized Pareto, gamma, inverse
Gaussian) plus a degenerate point mass for fixtures and tests.  On top of the
analytic layer (cdf / pdf / quantile / deterministic sampling) sit maximum
likelihood fitting, the exact two-sided Kolmogorov-Smirnov statistic, and
cross-family selection.

Conventions
-----------
GEV(shape k, scale s, location m):
    F(x) = exp(-(1 + k (x - m)/s) ** (-1/k)),  Gumbel limit as k -> 0.
    k > 0 gives a heavy upper tail with support x >= m - s/k.
GPD(shape k, scale s, location t):
    F(x) = 1 - (1 + k (x - t)/s) ** (-1/k),  exponential limit as k -> 0.
    k < 0 bounds the support at t - s/k, where the cdf is exactly 1.
Gamma(shape a, scale b):       support x > 0, mean a*b.
InverseGaussian(mean m, shape l): support x > 0.
PointMass(value c):            cdf is a unit step at c.

All operations are pure functions of their arguments; sampling is inverse
transform over the counter-based streams in :mod:`mmwchan.rng`, so identical
``(dist, n, seed)`` triples reproduce bit-identical output anywhere.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize
import scipy.special as sps

from . import rng

# |shape| below this is treated as the k = 0 limit to avoid cancellation.
ZERO_SHAPE = 1e-12


class Family(enum.Enum):
    """Distribution families, in fixed tie-breaking order."""

    GEV = "gev"
    GPD = "gpd"
    GAMMA = "gamma"
    INVERSE_GAUSSIAN = "inverse_gaussian"
    POINT_MASS = "point_mass"


# Canonical parameter names per family, in the order stored in ``params``.
PARAM_NAMES: dict[Family, tuple[str, ...]] = {
    Family.GEV: ("shape", "scale", "location"),
    Family.GPD: ("shape", "scale", "location"),
    Family.GAMMA: ("shape", "scale"),
    Family.INVERSE_GAUSSIAN: ("mean", "shape"),
    Family.POINT_MASS: ("value",),
}

# Number of parameters that MLE actually adjusts (GPD location follows a
# preset rule rather than being optimized), used for selection tie-breaks.
FITTED_PARAM_COUNT: dict[Family, int] = {
    Family.GEV: 3,
    Family.GPD: 2,
    Family.GAMMA: 2,
    Family.INVERSE_GAUSSIAN: 2,
    Family.POINT_MASS: 1,
}


class FitError(Exception):
    """MLE failure; ``best`` carries the best iterate when one exists."""

    def __init__(self, message: str, best: "DistributionSpec | None" = None):
        super().__init__(message)
        self.best = best


class SelectionError(Exception):
    """Raised when every candidate family fails to fit."""


@dataclass(frozen=True)
class DistributionSpec:
    """A family tag plus its parameter vector (see module conventions)."""

    family: Family
    params: tuple[float, ...]

    def __post_init__(self):
        names = PARAM_NAMES[self.family]
        if len(self.params) != len(names):
            raise ValueError(
                f"{self.family.value} takes {len(names)} parameters "
                f"{names}, got {len(self.params)}"
            )
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        for name, value in zip(names, self.params):
            if not math.isfinite(value):
                raise ValueError(f"{self.family.value} {name} must be finite")
        if self.family in (Family.GEV, Family.GPD) and self.params[1] <= 0:
            raise ValueError(f"{self.family.value} scale must be > 0")
        if self.family is Family.GAMMA and (self.params[0] <= 0 or self.params[1] <= 0):
            raise ValueError("gamma shape and scale must be > 0")
        if self.family is Family.INVERSE_GAUSSIAN and (
            self.params[0] <= 0 or self.params[1] <= 0
        ):
            raise ValueError("inverse_gaussian mean and shape must be > 0")

    def named_params(self) -> dict[str, float]:
        return dict(zip(PARAM_NAMES[self.family], self.params))

    def __repr__(self):
        inner = ", ".join(f"{k}={v:.6g}" for k, v in self.named_params().items())
        return f"{self.family.value}({inner})"


def gev(shape: float, scale: float, location: float) -> DistributionSpec:
    return DistributionSpec(Family.GEV, (shape, scale, location))


def gpd(shape: float, scale: float, location: float) -> DistributionSpec:
    return DistributionSpec(Family.GPD, (shape, scale, location))


def gamma(shape: float, scale: float) -> DistributionSpec:
    return DistributionSpec(Family.GAMMA, (shape, scale))


def inverse_gaussian(mean: float, shape: float) -> DistributionSpec:
    return DistributionSpec(Family.INVERSE_GAUSSIAN, (mean, shape))


def point_mass(value: float) -> DistributionSpec:
    return DistributionSpec(Family.POINT_MASS, (value,))


def support(dist: DistributionSpec) -> tuple[float, float]:
    """Closed support interval (lo, hi) of the distribution."""
    if dist.family is Family.GEV:
        k, s, m = dist.params
        if k > ZERO_SHAPE:
            return (m - s / k, math.inf)
        if k < -ZERO_SHAPE:
            return (-math.inf, m - s / k)
        return (-math.inf, math.inf)
    if dist.family is Family.GPD:
        k, s, t = dist.params
        if k < -ZERO_SHAPE:
            return (t, t - s / k)
        return (t, math.inf)
    if dist.family in (Family.GAMMA, Family.INVERSE_GAUSSIAN):
        return (0.0, math.inf)
    c = dist.params[0]
    return (c, c)


# ---------------------------------------------------------------------------
# Analytic layer
# ---------------------------------------------------------------------------


def cdf(dist: DistributionSpec, x) -> np.ndarray | float:
    """Cumulative distribution function; clamps to 0/1 outside the support."""
    xa = np.asarray(x, dtype=np.float64)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    out = _cdf_array(dist, xa)
    return float(out[0]) if scalar else out


def _cdf_array(dist: DistributionSpec, x: np.ndarray) -> np.ndarray:
    fam = dist.family
    if fam is Family.GEV:
        k, s, m = dist.params
        z = (x - m) / s
        if abs(k) < ZERO_SHAPE:
            return np.exp(-np.exp(-z))
        arg = 1.0 + k * z
        out = np.empty_like(z)
        good = arg > 0
        with np.errstate(over="ignore"):
            out[good] = np.exp(-np.power(arg[good], -1.0 / k))
        out[~good] = 0.0 if k > 0 else 1.0
        return out
    if fam is Family.GPD:
        k, s, t = dist.params
        y = (x - t) / s
        out = np.zeros_like(y)
        pos = y >= 0
        if abs(k) < ZERO_SHAPE:
            out[pos] = -np.expm1(-y[pos]) + 0.0
            return out
        arg = 1.0 + k * y
        inside = pos & (arg > 0)
        out[inside] = -np.expm1(np.log(arg[inside]) * (-1.0 / k)) + 0.0
        if k < 0:
            out[y >= -1.0 / k] = 1.0  # at/above the bounded upper end
        return out
    if fam is Family.GAMMA:
        a, b = dist.params
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = sps.gammainc(a, x[pos] / b)
        return out
    if fam is Family.INVERSE_GAUSSIAN:
        m, lam = dist.params
        out = np.zeros_like(x)
        pos = x > 0
        xp = x[pos]
        u = np.sqrt(lam / xp)
        # log-form second term avoids overflow of exp(2*lam/m) at large lam/m
        term1 = sps.ndtr(u * (xp / m - 1.0))
        term2 = np.exp(2.0 * lam / m + sps.log_ndtr(-u * (xp / m + 1.0)))
        out[pos] = np.clip(term1 + term2, 0.0, 1.0)
        return out
    # point mass: unit step at c
    c = dist.params[0]
    return np.where(x >= c, 1.0, 0.0)


def pdf(dist: DistributionSpec, x) -> np.ndarray | float:
    """Probability density; zero outside the support."""
    xa = np.atleast_1d(np.asarray(x, dtype=np.float64))
    fam = dist.family
    out = np.zeros_like(xa)
    if fam is Family.GEV:
        k, s, m = dist.params
        z = (xa - m) / s
        if abs(k) < ZERO_SHAPE:
            t = np.exp(-z)
            out = t * np.exp(-t) / s
        else:
            arg = 1.0 + k * z
            good = arg > 0
            with np.errstate(over="ignore"):
                t = np.power(arg[good], -1.0 / k)
                out[good] = np.power(arg[good], -1.0 / k - 1.0) * np.exp(-t) / s
    elif fam is Family.GPD:
        k, s, t0 = dist.params
        y = (xa - t0) / s
        if abs(k) < ZERO_SHAPE:
            good = y >= 0
            out[good] = np.exp(-y[good]) / s
        else:
            arg = 1.0 + k * y
            good = (y >= 0) & (arg > 0)
            out[good] = np.power(arg[good], -1.0 / k - 1.0) / s
    elif fam is Family.GAMMA:
        a, b = dist.params
        pos = xa > 0
        xp = xa[pos]
        out[pos] = np.exp(
            (a - 1.0) * np.log(xp) - xp / b - sps.gammaln(a) - a * np.log(b)
        )
    elif fam is Family.INVERSE_GAUSSIAN:
        m, lam = dist.params
        pos = xa > 0
        xp = xa[pos]
        out[pos] = np.sqrt(lam / (2.0 * np.pi * xp**3)) * np.exp(
            -lam * (xp - m) ** 2 / (2.0 * m**2 * xp)
        )
    else:
        raise ValueError("point mass has no density")
    return float(out[0]) if np.ndim(x) == 0 else out


def quantile(dist: DistributionSpec, p) -> np.ndarray | float:
    """Inverse cdf.  Requires 0 < p < 1 elementwise."""
    pa = np.asarray(p, dtype=np.float64)
    scalar = pa.ndim == 0
    pa = np.atleast_1d(pa)
    if np.any(pa <= 0.0) or np.any(pa >= 1.0):
        raise ValueError("quantile requires probabilities strictly inside (0, 1)")
    out = _quantile_array(dist, pa)
    return float(out[0]) if scalar else out


def _quantile_array(dist: DistributionSpec, p: np.ndarray) -> np.ndarray:
    fam = dist.family
    if fam is Family.GEV:
        k, s, m = dist.params
        ln = -np.log(p)  # -log p > 0
        if abs(k) < ZERO_SHAPE:
            return m - s * np.log(ln)
        return m + s * np.expm1(-k * np.log(ln)) / k
    if fam is Family.GPD:
        k, s, t = dist.params
        if abs(k) < ZERO_SHAPE:
            return t - s * np.log1p(-p)
        return t + s * np.expm1(-k * np.log1p(-p)) / k
    if fam is Family.GAMMA:
        a, b = dist.params
        return b * sps.gammaincinv(a, p)
    if fam is Family.INVERSE_GAUSSIAN:
        return _invgauss_quantile(dist, p)
    return np.full_like(p, dist.params[0])


def _invgauss_quantile(dist: DistributionSpec, p: np.ndarray) -> np.ndarray:
    """Bracketed bisection plus Newton polish on the closed-form cdf."""
    m, lam = dist.params
    lo = np.full_like(p, m * 1e-12)
    hi = np.full_like(p, m)
    # grow upper brackets until they cover the requested probabilities
    for _ in range(200):
        short = _cdf_array(dist, hi) < p
        if not short.any():
            break
        hi[short] *= 2.0
    for _ in range(26):
        mid = 0.5 * (lo + hi)
        below = _cdf_array(dist, mid) < p
        lo[below] = mid[below]
        hi[~below] = mid[~below]
    x = 0.5 * (lo + hi)
    for _ in range(4):
        f = _cdf_array(dist, x) - p
        d = pdf(dist, x)
        step = np.where(d > 0, f / np.where(d > 0, d, 1.0), 0.0)
        x = np.clip(x - step, lo, hi)
    return x


def sample(dist: DistributionSpec, n: int, seed: int, stream: int = 0) -> np.ndarray:
    """Draw ``n`` variates by inverse transform over a counter-based stream.

    Identical ``(dist, n, seed, stream)`` give bit-identical arrays on any
    platform; distinct streams of one seed are independent, so concurrent
    generation reproduces the serial result.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return np.empty(0, dtype=np.float64)
    u = rng.uniforms_at(seed, stream, np.arange(n, dtype=np.uint64))
    return _quantile_array(dist, u)


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------


def _sample_lmoments(x: np.ndarray) -> tuple[float, float, float]:
    """First three L-moments (l1, l2, t3) from a sorted sample."""
    n = x.size
    i = np.arange(1, n + 1, dtype=np.float64)
    b0 = x.mean()
    b1 = np.sum((i - 1) / (n - 1) * x) / n
    b2 = np.sum((i - 1) * (i - 2) / ((n - 1) * (n - 2)) * x) / n
    l1 = b0
    l2 = 2 * b1 - b0
    l3 = 6 * b2 - 6 * b1 + b0
    t3 = l3 / l2 if l2 != 0 else 0.0
    return l1, l2, t3


def _gev_moment_init(x: np.ndarray) -> tuple[float, float, float]:
    """Hosking's L-moment estimators, mapped to this module's sign convention."""
    l1, l2, t3 = _sample_lmoments(x)
    c = 2.0 / (3.0 + t3) - math.log(2) / math.log(3)
    kh = 7.8590 * c + 2.9554 * c * c  # Hosking shape, = -k here
    kh = min(max(kh, -0.99), 5.0)
    if abs(kh) < 1e-6:
        scale = l2 / math.log(2)
        loc = l1 - 0.5772156649015329 * scale
        return 0.0, max(scale, 1e-300), loc
    g1 = math.gamma(1.0 + kh)
    scale = l2 * kh / ((1.0 - 2.0 ** (-kh)) * g1)
    loc = l1 - scale * (1.0 - g1) / kh
    return -kh, max(scale, 1e-300), loc


def _gpd_moment_init(y: np.ndarray) -> tuple[float, float]:
    """L-moment (k, scale) init for excesses y >= 0."""
    l1 = y.mean()
    n = y.size
    i = np.arange(1, n + 1, dtype=np.float64)
    b1 = np.sum((i - 1) / (n - 1) * np.sort(y)) / n
    l2 = 2 * b1 - l1
    if l2 <= 0:
        return 0.0, max(l1, 1e-300)
    kh = l1 / l2 - 2.0
    kh = min(max(kh, -0.95), 10.0)
    scale = l1 * (1.0 + kh)
    return -kh, max(scale, 1e-300)


def _feasible_gev_start(x: np.ndarray, k: float, s: float, m: float):
    """Shrink shape toward the Gumbel limit until every point is in-support."""
    for _ in range(60):
        if abs(k) < ZERO_SHAPE:
            break
        if np.all(1.0 + k * (x - m) / s > 1e-9):
            break
        k *= 0.7
    return k, s, m


def _nm(fun, x0, maxiter: int):
    return scipy.optimize.minimize(
        fun,
        np.asarray(x0, dtype=np.float64),
        method="Nelder-Mead",
        options={
            "maxiter": maxiter,
            "xatol": 1e-10,
            "fatol": 1e-10,
            "adaptive": True,
        },
    )


_BIG = 1e30


def _gev_nll(theta, x):
    k, log_s, m = theta
    s = math.exp(log_s)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        z = (x - m) / s
        if not np.all(np.isfinite(z)):
            return _BIG
        if abs(k) < ZERO_SHAPE:
            total = x.size * log_s + float(np.sum(z + np.exp(-z)))
            return total if math.isfinite(total) else _BIG
        arg = 1.0 + k * z
        if not np.all(arg > 0):
            return _BIG
        ln = np.log(arg)
        t = np.exp(-ln / k)
        total = x.size * log_s + float(np.sum((1.0 + 1.0 / k) * ln + t))
    return total if math.isfinite(total) else _BIG


def _gpd_nll(theta, y):
    k, log_s = theta
    s = math.exp(log_s)
    if abs(k) < ZERO_SHAPE:
        return y.size * log_s + float(np.sum(y)) / s
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        arg = 1.0 + k * y / s
        if not np.all(arg > 0) or not np.all(np.isfinite(arg)):
            return _BIG
        total = y.size * log_s + (1.0 + 1.0 / k) * float(np.sum(np.log(arg)))
    return total if math.isfinite(total) else _BIG


def _gamma_nll(theta, x, log_x_sum, x_sum):
    log_a, log_b = theta
    a, b = math.exp(log_a), math.exp(log_b)
    total = x.size * (sps.gammaln(a) + a * log_b) - (a - 1.0) * log_x_sum + x_sum / b
    return total if math.isfinite(total) else _BIG


def _ig_nll(theta, x):
    log_m, log_lam = theta
    m, lam = math.exp(log_m), math.exp(log_lam)
    total = float(
        np.sum(-0.5 * np.log(lam / (2.0 * np.pi * x**3)))
        + np.sum(lam * (x - m) ** 2 / (2.0 * m * m * x))
    )
    return total if math.isfinite(total) else _BIG


def samples_are_counts(samples: np.ndarray) -> bool:
    """True when every sample is a whole number >= 1 (count variate)."""
    return bool(np.all(samples >= 1) and np.allclose(samples, np.round(samples)))


def fit_mle(
    family: Family,
    samples,
    gpd_location: float | None = None,
    maxiter: int = 500,
) -> DistributionSpec:
    """Maximum likelihood fit via Nelder-Mead from moment-based starts.

    GPD location is not optimized: it is ``gpd_location`` when given, 1 for
    count variates (whole numbers >= 1), and ``min - 1e-6 * range`` otherwise.

    Raises
    ------
    FitError
        On degenerate samples (all equal), out-of-support samples, or
        optimizer non-convergence (the best iterate rides on ``.best``).
    """
    x = np.sort(np.asarray(samples, dtype=np.float64))
    if x.size < 20:
        raise ValueError("fit_mle requires at least 20 samples")
    if x[0] == x[-1]:
        raise FitError("degenerate sample: all values identical")

    if family is Family.GEV:
        starts = [_feasible_gev_start(x, *_gev_moment_init(x))]
        # moment estimators break down on very heavy tails; quantile-anchored
        # heavy starts keep the search honest there
        q1, q2, q3 = np.quantile(x, (0.25, 0.5, 0.75))
        for k0 in (0.8, 1.8):
            g25 = ((-math.log(0.25)) ** -k0 - 1.0) / k0
            g75 = ((-math.log(0.75)) ** -k0 - 1.0) / k0
            s0 = max((q3 - q1) / (g75 - g25), 1e-300)
            g50 = ((-math.log(0.5)) ** -k0 - 1.0) / k0
            starts.append(_feasible_gev_start(x, k0, s0, q2 - s0 * g50))
        res = min(
            (
                _nm(lambda th: _gev_nll(th, x), [k0, math.log(s0), m0], maxiter)
                for k0, s0, m0 in starts
            ),
            key=lambda r: r.fun,
        )
        k, log_s, m = res.x
        spec = gev(float(k), math.exp(log_s), float(m))
    elif family is Family.GPD:
        if gpd_location is not None:
            theta = float(gpd_location)
        elif samples_are_counts(x):
            theta = 1.0
        else:
            theta = x[0] - 1e-6 * (x[-1] - x[0])
        y = x - theta
        if y[0] < 0:
            raise FitError(f"samples below GPD location {theta}")
        k0, s0 = _gpd_moment_init(y)
        if k0 < 0:  # keep the bounded-support start feasible
            k0 = max(k0, -0.999 * s0 / y[-1]) if y[-1] > 0 else k0
        starts = [(k0, s0)]
        y_med = float(np.median(y))
        for kh in (0.5, 1.5, 3.0):  # heavy tails defeat the moment init
            h50 = ((0.5) ** -kh - 1.0) / kh
            starts.append((kh, max(y_med / h50, 1e-300)))
        res = min(
            (
                _nm(lambda th: _gpd_nll(th, y), [kk, math.log(ss)], maxiter)
                for kk, ss in starts
            ),
            key=lambda r: r.fun,
        )
        k, log_s = res.x
        spec = gpd(float(k), math.exp(log_s), theta)
    elif family is Family.GAMMA:
        if x[0] <= 0:
            raise FitError("gamma requires strictly positive samples")
        mean, var = x.mean(), x.var()
        a0 = max(mean * mean / var, 1e-8) if var > 0 else 1.0
        b0 = var / mean if var > 0 else mean
        log_x_sum, x_sum = float(np.sum(np.log(x))), float(np.sum(x))
        res = _nm(
            lambda th: _gamma_nll(th, x, log_x_sum, x_sum),
            [math.log(a0), math.log(b0)],
            maxiter,
        )
        spec = gamma(math.exp(res.x[0]), math.exp(res.x[1]))
    elif family is Family.INVERSE_GAUSSIAN:
        if x[0] <= 0:
            raise FitError("inverse_gaussian requires strictly positive samples")
        # closed-form MLE doubles as the start; NM confirms/polishes it
        m0 = x.mean()
        lam0 = x.size / float(np.sum(1.0 / x - 1.0 / m0))
        res = _nm(lambda th: _ig_nll(th, x), [math.log(m0), math.log(lam0)], 200)
        spec = inverse_gaussian(math.exp(res.x[0]), math.exp(res.x[1]))
    else:
        raise ValueError(f"{family} is not an MLE-fittable family")

    if not res.success:
        raise FitError("optimizer did not converge", best=spec)
    return spec


# ---------------------------------------------------------------------------
# Goodness of fit and family selection
# ---------------------------------------------------------------------------


def ks_statistic(samples, dist: DistributionSpec) -> float:
    """Exact two-sided Kolmogorov-Smirnov distance.

    Supremum of |ecdf - cdf| evaluated at the sample points from both sides
    of each empirical step.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if n < 1:
        raise ValueError("ks_statistic requires at least one sample")
    f = _cdf_array(dist, x)
    i = np.arange(1, n + 1, dtype=np.float64)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    return float(min(max(d_plus, d_minus, 0.0), 1.0))


def select_family(
    samples,
    candidates,
    gpd_location: float | None = None,
) -> tuple[DistributionSpec, dict[Family, float]]:
    """Fit each candidate family and keep the lowest KS score.

    Ties break toward fewer fitted parameters, then family enum order.
    Failed fits score ``nan`` in the returned table.

    Raises
    ------
    SelectionError
        If every candidate fit fails.
    """
    x = np.asarray(samples, dtype=np.float64)
    cand = list(candidates)
    if x.size < 50:
        raise ValueError("select_family requires at least 50 samples")
    if len(cand) < 2:
        raise ValueError("select_family requires at least 2 candidates")

    order = {fam: i for i, fam in enumerate(Family)}
    scores: dict[Family, float] = {}
    fits: dict[Family, DistributionSpec] = {}
    for fam in cand:
        try:
            spec = fit_mle(fam, x, gpd_location=gpd_location)
        except FitError:
            scores[fam] = math.nan
            continue
        fits[fam] = spec
        scores[fam] = ks_statistic(x, spec)
    if not fits:
        raise SelectionError("all candidate fits failed")
    best = min(
        fits,
        key=lambda fam: (scores[fam], FITTED_PARAM_COUNT[fam], order[fam]),
    )
    return fits[best], scores
