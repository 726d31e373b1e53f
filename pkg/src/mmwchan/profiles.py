"""Scenario profiles: published quartile targets and parameter calibration.

The measurement campaign behind this package published, per scenario and
receive beamwidth, the quartiles of five channel parameters together with the
distribution family describing each one and (for most families) the range its
fitted parameters occupied across scenarios.  Point estimates per scenario
were not published, so the registry reconstructs them: for every (scenario,
beamwidth, parameter) cell a derivative-free multi-start search picks the
family parameters whose model quartiles best match the published triple.

Calibration semantics mirror generation exactly:

* count parameters (cluster count, paths per cluster) are scored on the
  discretized variate ``max(1, round(x))``, simulated over a fixed
  100000-point uniform grid;
* inter-cluster delays are scored after the generator's clamp to one
  tap-grid period, so a published first quartile equal to the grid is
  attainable by putting probability mass at or below it;
* path amplitudes are scored on the post-rescale pooled amplitudes the
  generator actually emits (paths are rescaled so each cluster's mean hits
  its drawn amplitude), via a fixed synthetic cluster population.

Where the published parameter ranges cannot reproduce the published
quartiles (the two constraints come from different fits and are mutually
inconsistent for a few cells), the in-range fit is rejected and the cell is
refit without range constraints; the profile records this in its provenance
and keeps the residual visible.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
import scipy.optimize

from . import rng
from .distributions import (
    DistributionSpec,
    Family,
    PARAM_NAMES,
    _quantile_array,
    point_mass,
    quantile,
)

DEFAULT_TAP_GRID = 2.4e-10  # seconds; the smallest published delay quantum

PARAMETERS = (
    "num_clusters",
    "intercluster_delay",
    "cluster_amplitude",
    "paths_per_cluster",
    "path_amplitude",
)
COUNT_PARAMETERS = ("num_clusters", "paths_per_cluster")

CALIBRATION_SEED = 0x60C4A11B
_N_SIM = 100_000
_QUARTILE_PS = (0.25, 0.5, 0.75)


class Scenario(enum.Enum):
    TUNNEL = "tunnel"
    EXPERIMENTAL_HALL = "exp-hall"
    MECHANICAL_ROOM = "mechanical-room"
    SIDE_TUNNEL = "side-tunnel"


PROFILE_KEYS: tuple[tuple[Scenario, int], ...] = (
    (Scenario.TUNNEL, 7),
    (Scenario.TUNNEL, 20),
    (Scenario.TUNNEL, 80),
    (Scenario.EXPERIMENTAL_HALL, 7),
    (Scenario.EXPERIMENTAL_HALL, 20),
    (Scenario.EXPERIMENTAL_HALL, 80),
    (Scenario.MECHANICAL_ROOM, 20),
    (Scenario.SIDE_TUNNEL, 20),
)


@dataclass(frozen=True)
class QuartileTarget:
    """A published (q1, median, q3) triple for one parameter."""

    q1: float
    q2: float
    q3: float
    discretized: bool = False

    def __post_init__(self):
        if not self.q1 <= self.q2 <= self.q3:
            raise ValueError("quartiles must satisfy q1 <= q2 <= q3")

    def as_array(self) -> np.ndarray:
        return np.array([self.q1, self.q2, self.q3], dtype=np.float64)


# Quartile tables, transcribed row for row.  Keys: (scenario, beamwidth).
_NUM_CLUSTERS = {
    (Scenario.TUNNEL, 7): (2, 2, 2),
    (Scenario.TUNNEL, 20): (1, 2, 2),
    (Scenario.TUNNEL, 80): (1, 2, 3),
    (Scenario.EXPERIMENTAL_HALL, 7): (2, 4, 6),
    (Scenario.EXPERIMENTAL_HALL, 20): (2, 2, 3),
    (Scenario.EXPERIMENTAL_HALL, 80): (2, 5, 8),
    (Scenario.MECHANICAL_ROOM, 20): (2, 2, 3),
    (Scenario.SIDE_TUNNEL, 20): (1, 1, 1),
}
_INTERCLUSTER_DELAY = {
    (Scenario.TUNNEL, 7): (2.4e-10, 1.3e-9, 5.8e-9),
    (Scenario.TUNNEL, 20): (3.6e-10, 1.7e-9, 1.4e-8),
    (Scenario.TUNNEL, 80): (1.1e-9, 5.1e-9, 2.0e-8),
    (Scenario.EXPERIMENTAL_HALL, 7): (1.3e-9, 6.4e-9, 1.6e-8),
    (Scenario.EXPERIMENTAL_HALL, 20): (1.1e-9, 3.1e-9, 1.6e-8),
    (Scenario.EXPERIMENTAL_HALL, 80): (2.4e-9, 8.7e-9, 2.1e-8),
    (Scenario.MECHANICAL_ROOM, 20): (3.6e-10, 1.7e-9, 1.4e-8),
    (Scenario.SIDE_TUNNEL, 20): (2.4e-10, 2.4e-10, 3.6e-10),
}
_CLUSTER_AMPLITUDE = {
    (Scenario.TUNNEL, 7): (0.030, 0.044, 0.083),
    (Scenario.TUNNEL, 20): (0.031, 0.041, 0.075),
    (Scenario.TUNNEL, 80): (0.031, 0.034, 0.046),
    (Scenario.EXPERIMENTAL_HALL, 7): (0.014, 0.022, 0.054),
    (Scenario.EXPERIMENTAL_HALL, 20): (0.016, 0.024, 0.063),
    (Scenario.EXPERIMENTAL_HALL, 80): (0.020, 0.027, 0.035),
    (Scenario.MECHANICAL_ROOM, 20): (0.028, 0.038, 0.070),
    (Scenario.SIDE_TUNNEL, 20): (0.047, 0.065, 0.083),
}
_PATHS_PER_CLUSTER = {
    (Scenario.TUNNEL, 7): (2, 3, 4),
    (Scenario.TUNNEL, 20): (2, 3, 4),
    (Scenario.TUNNEL, 80): (2, 3, 4),
    (Scenario.EXPERIMENTAL_HALL, 7): (2, 3, 4),
    (Scenario.EXPERIMENTAL_HALL, 20): (2, 3, 4),
    (Scenario.EXPERIMENTAL_HALL, 80): (1, 2, 3),
    (Scenario.MECHANICAL_ROOM, 20): (2, 3, 4),
    (Scenario.SIDE_TUNNEL, 20): (7, 9, 10),
}
_PATH_AMPLITUDE = {
    (Scenario.TUNNEL, 7): (0.029, 0.041, 0.090),
    (Scenario.TUNNEL, 20): (0.030, 0.041, 0.090),
    (Scenario.TUNNEL, 80): (0.031, 0.036, 0.050),
    (Scenario.EXPERIMENTAL_HALL, 7): (0.014, 0.025, 0.054),
    (Scenario.EXPERIMENTAL_HALL, 20): (0.015, 0.027, 0.065),
    (Scenario.EXPERIMENTAL_HALL, 80): (0.020, 0.027, 0.038),
    (Scenario.MECHANICAL_ROOM, 20): (0.027, 0.037, 0.079),
    (Scenario.SIDE_TUNNEL, 20): (0.034, 0.055, 0.095),
}

_TABLES = {
    "num_clusters": _NUM_CLUSTERS,
    "intercluster_delay": _INTERCLUSTER_DELAY,
    "cluster_amplitude": _CLUSTER_AMPLITUDE,
    "paths_per_cluster": _PATHS_PER_CLUSTER,
    "path_amplitude": _PATH_AMPLITUDE,
}

# Published parameter ranges per parameter (the family they constrain).
# Side Tunnel cells use different families whose parameters were not
# published, and the cluster-count range explicitly excludes Tunnel/80.
PUBLISHED_RANGES: dict[str, dict[str, tuple[float, float]]] = {
    "num_clusters": {
        "shape": (0.31, 0.93),
        "scale": (0.9, 3.43),
        "location": (1.42, 2.91),
    },
    "intercluster_delay": {
        "shape": (-0.71, 0.93),
        "scale": (1.63e-9, 22.37e-9),
        "location": (-214.29e-11, -2.22e-15),
    },
    "cluster_amplitude": {
        "shape": (0.27, 0.96),
        "scale": (0.01, 0.03),
        "location": (0.02, 0.04),
    },
    "paths_per_cluster": {
        "shape": (-0.36, -0.12),
        "scale": (2.32, 3.37),
    },
    "path_amplitude": {
        "shape": (0.37, 0.95),
        "scale": (0.01, 0.03),
        "location": (0.02, 0.04),
    },
}


def family_assignment(scenario: Scenario, beamwidth: int, parameter: str):
    """Family each cell is described by; None means choose by residual."""
    side = scenario is Scenario.SIDE_TUNNEL
    if parameter == "num_clusters":
        if scenario is Scenario.TUNNEL and beamwidth == 80:
            return None  # explicitly not GEV; no alternative was named
        return Family.GEV
    if parameter == "intercluster_delay":
        return Family.GEV if side else Family.GPD
    if parameter == "cluster_amplitude":
        return Family.GPD if side else Family.GEV
    if parameter == "paths_per_cluster":
        return Family.GAMMA if side else Family.GPD
    if parameter == "path_amplitude":
        return Family.INVERSE_GAUSSIAN if side else Family.GEV
    raise KeyError(parameter)


def published_bounds(scenario: Scenario, beamwidth: int, parameter: str):
    """Published range box for a cell, or None when no range applies."""
    if scenario is Scenario.SIDE_TUNNEL:
        return None
    if parameter == "num_clusters" and scenario is Scenario.TUNNEL and beamwidth == 80:
        return None
    return dict(PUBLISHED_RANGES[parameter])


def builtin_targets() -> dict[tuple[Scenario, int, str], QuartileTarget]:
    """All 8 profiles x 5 parameters quartile targets, transcribed verbatim."""
    out: dict[tuple[Scenario, int, str], QuartileTarget] = {}
    for parameter, table in _TABLES.items():
        discrete = parameter in COUNT_PARAMETERS
        for (scenario, bw), (q1, q2, q3) in table.items():
            out[(scenario, bw, parameter)] = QuartileTarget(
                float(q1), float(q2), float(q3), discretized=discrete
            )
    return out


# ---------------------------------------------------------------------------
# Profile container
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioProfile:
    """The six distribution specs plus grid settings for one scenario cell."""

    scenario: "Scenario | str"
    beamwidth_deg: float
    num_clusters: DistributionSpec
    intercluster_delay: DistributionSpec
    cluster_amplitude: DistributionSpec
    paths_per_cluster: DistributionSpec
    path_amplitude: DistributionSpec
    tap_grid: float = DEFAULT_TAP_GRID
    residuals: Mapping[str, float] = field(default_factory=dict)
    provenance: Mapping[str, str] = field(default_factory=dict)

    @property
    def profile_id(self) -> str:
        name = self.scenario.value if isinstance(self.scenario, Scenario) else str(self.scenario)
        bw = self.beamwidth_deg
        bw_txt = str(int(bw)) if float(bw).is_integer() else str(bw)
        return f"{name}-{bw_txt}"

    def spec_for(self, parameter: str) -> DistributionSpec:
        return getattr(self, parameter)

    def validate(self) -> None:
        """Check grid, family assignments, and count-spec sanity.

        Family assignments are only enforced for the catalogued scenarios;
        point masses are always allowed as degenerate test profiles.  Count
        specs must keep essentially all mass at or above 0.5 so that the
        round-and-clamp discretization yields counts >= 1 by probability
        rather than by clamping alone.
        """
        if self.tap_grid <= 0:
            raise ValueError("tap grid must be > 0")
        strict = isinstance(self.scenario, Scenario)
        for parameter in PARAMETERS:
            spec = self.spec_for(parameter)
            if spec.family is Family.POINT_MASS:
                continue
            if strict:
                expected = family_assignment(self.scenario, int(self.beamwidth_deg), parameter)
                if expected is None:
                    allowed = {Family.GEV, Family.GPD, Family.GAMMA}
                    if spec.family not in allowed:
                        raise ValueError(
                            f"{parameter} for {self.profile_id} must be one of "
                            f"{sorted(f.value for f in allowed)}"
                        )
                elif spec.family is not expected:
                    raise ValueError(
                        f"{parameter} for {self.profile_id} must be {expected.value}, "
                        f"got {spec.family.value}"
                    )
        for parameter in COUNT_PARAMETERS:
            spec = self.spec_for(parameter)
            from .distributions import cdf as _cdf

            if float(_cdf(spec, 0.5)) > 0.01:
                raise ValueError(
                    f"{parameter} spec puts non-negligible mass below 0.5; counts "
                    "must round to >= 1 essentially always, not via clamping"
                )


# ---------------------------------------------------------------------------
# Calibration
# ---------------------------------------------------------------------------


class CalibrationError(Exception):
    """Residual exceeded the acceptance threshold; best iterate attached."""

    def __init__(self, message: str, best: "CalibrationResult | None" = None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class CalibrationResult:
    spec: DistributionSpec
    residual: float
    model_quartiles: tuple[float, float, float]
    max_rel_err: float
    near_point_mass: bool = False


# Free parameters per family: (name, log-transformed?).  GPD location is
# separated out because count calibration pins it.
_FREE_PARAMS: dict[Family, tuple[tuple[str, bool], ...]] = {
    Family.GEV: (("shape", False), ("scale", True), ("location", False)),
    Family.GPD: (("shape", False), ("scale", True), ("location", False)),
    Family.GAMMA: (("shape", True), ("scale", True)),
    Family.INVERSE_GAUSSIAN: (("mean", True), ("shape", True)),
}


@lru_cache(maxsize=4)
def _sim_order_stats(seed: int, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Order statistics of the fixed uniform grid needed for sim quartiles.

    A monotone transform of a sorted sample stays sorted, so the linearly
    interpolated quartiles of ``transform(u)`` over all n points only require
    the transform at six order statistics.  Equal by construction to
    ``np.quantile(transform(u), [.25, .5, .75])`` on the full sample.
    """
    u = np.sort(rng.uniforms_at(seed, 0, np.arange(n, dtype=np.uint64)))
    h = (n - 1) * np.asarray(_QUARTILE_PS)
    lo = np.floor(h).astype(int)
    frac = h - lo
    return u[lo], u[np.minimum(lo + 1, n - 1)], frac


def _discretize(x: np.ndarray) -> np.ndarray:
    return np.maximum(np.floor(x + 0.5), 1.0)


def _model_quartiles(
    spec: DistributionSpec,
    discretize: bool,
    floor: Optional[float],
    seed: int,
    n_sim: int,
) -> np.ndarray:
    """Quartiles of the generated variate for a candidate spec."""
    if discretize:
        u_lo, u_hi, frac = _sim_order_stats(seed, n_sim)
        v_lo = _discretize(_quantile_array(spec, u_lo))
        v_hi = _discretize(_quantile_array(spec, u_hi))
        return v_lo + frac * (v_hi - v_lo)
    q = _quantile_array(spec, np.asarray(_QUARTILE_PS))
    if floor is not None:
        q = np.maximum(q, floor)
    return q


def _spec_from_vector(family: Family, vec: np.ndarray, fixed_location: Optional[float]):
    free = _FREE_PARAMS[family]
    values = {}
    for (name, logt), v in zip(free, vec):
        values[name] = math.exp(v) if logt else v
    if family is Family.GPD and fixed_location is not None:
        values["location"] = fixed_location
    params = tuple(values[n] for n in PARAM_NAMES[family])
    return DistributionSpec(family, params)


def _gev_ratio_table():
    ks = np.linspace(-1.8, 3.5, 107)
    rows = []
    for k in ks:
        if abs(k) < 1e-9:
            g = [-math.log(-math.log(p)) for p in _QUARTILE_PS]
        else:
            g = [((-math.log(p)) ** (-k) - 1.0) / k for p in _QUARTILE_PS]
        rows.append((k, g[0], g[1], g[2]))
    return rows


_GEV_RATIOS = _gev_ratio_table()


def _starts_for(
    family: Family,
    target: QuartileTarget,
    bounds: Optional[Mapping[str, tuple[float, float]]],
    fixed_location: Optional[float],
) -> list[np.ndarray]:
    """Deterministic multi-start points: quartile-matching heuristics plus a
    small lattice over the bounds box."""
    t1, t2, t3 = target.q1, target.q2, target.q3
    span = max(t3 - t1, abs(t2) * 1e-3, 1e-300)
    starts: list[dict[str, float]] = []

    if family is Family.GEV:
        ratio = (t3 - t2) / max(t2 - t1, span * 1e-6)
        best = min(_GEV_RATIOS, key=lambda row: abs((row[3] - row[2]) / max(row[2] - row[1], 1e-9) - ratio))
        k, g1, g2, g3 = best
        sigma = span / max(g3 - g1, 1e-9)
        mu = t2 - sigma * g2
        starts.append({"shape": k, "scale": sigma, "location": mu})
        starts.append({"shape": 0.3, "scale": span / 2, "location": t2 - span / 4})
    elif family is Family.GPD:
        def h(p, k):
            return -math.log1p(-p) if abs(k) < 1e-9 else ((1 - p) ** (-k) - 1.0) / k

        theta_grid = (
            [fixed_location]
            if fixed_location is not None
            else [t1 - 2 * span, t1 - 0.5 * span, t1 - 0.02 * span]
        )
        for theta in theta_grid:
            e2, e3 = t2 - theta, t3 - theta
            want = e3 / max(e2, 1e-300)
            ks = np.linspace(-2.0, 3.5, 56)
            k = min(ks, key=lambda kk: abs(h(0.75, kk) / h(0.5, kk) - want))
            sigma = e2 / h(0.5, k)
            entry = {"shape": float(k), "scale": max(sigma, 1e-300)}
            if fixed_location is None:
                entry["location"] = theta
            starts.append(entry)
    elif family is Family.GAMMA:
        sd = max(span / 1.349, abs(t2) * 1e-3, 1e-300)
        mean = max(t2, 1e-300)
        starts.append({"shape": (mean / sd) ** 2, "scale": sd * sd / mean})
        starts.append({"shape": 1.5, "scale": mean / 1.5})
    elif family is Family.INVERSE_GAUSSIAN:
        sd = max(span / 1.349, abs(t2) * 1e-3, 1e-300)
        mean = max(t2, 1e-300)
        starts.append({"mean": mean, "shape": mean**3 / (sd * sd)})
        starts.append({"mean": mean, "shape": mean})

    if bounds:
        names = [
            n
            for n, _ in _FREE_PARAMS[family]
            if not (n == "location" and family is Family.GPD and fixed_location is not None)
            and n in bounds
        ]
        def lattice(frac):
            grid: list[dict[str, float]] = [{}]
            for n in names:
                lo, hi = bounds[n]
                lv = [lo + frac * (hi - lo), hi - frac * (hi - lo)]
                grid = [dict(g, **{n: v}) for g in grid for v in lv]
            return grid

        center = {n: 0.5 * (bounds[n][0] + bounds[n][1]) for n in names}
        base = dict(starts[0]) if starts else {}
        # interior points plus near-corner points: quartile-optimal fits of
        # bounded cells often sit on the faces of the published box
        for g in [center] + lattice(0.25) + lattice(1e-3):
            starts.append(dict(base, **g))

    # encode to optimizer space, clipping into bounds
    encoded = []
    for s in starts:
        vec = []
        ok = True
        for name, logt in _FREE_PARAMS[family]:
            if name == "location" and family is Family.GPD and fixed_location is not None:
                continue
            v = s.get(name)
            if v is None:
                ok = False
                break
            if bounds and name in bounds:
                v = min(max(v, bounds[name][0]), bounds[name][1])
            if logt:
                if v <= 0:
                    ok = False
                    break
                v = math.log(v)
            vec.append(v)
        if ok:
            encoded.append(np.asarray(vec, dtype=np.float64))
    return encoded


def _transformed_bounds(family, bounds, fixed_location):
    if not bounds:
        return None
    out = []
    for name, logt in _FREE_PARAMS[family]:
        if name == "location" and family is Family.GPD and fixed_location is not None:
            continue
        lo, hi = bounds.get(name, (-math.inf, math.inf))
        if logt:
            lo = math.log(lo) if lo > 0 else -700.0
            hi = math.log(hi) if math.isfinite(hi) else 700.0
        out.append((lo, hi))
    return out


def _grid_scan_starts(family, bounds, fixed_location, objective, levels=10, keep=4):
    """Evaluate the objective on a coarse lattice over the box and return the
    best points (in optimizer coordinates) as extra starts."""
    axes = []
    for name, logt in _FREE_PARAMS[family]:
        if name == "location" and family is Family.GPD and fixed_location is not None:
            continue
        lo, hi = bounds.get(name, (-1.0, 1.0))
        if logt:
            axes.append(np.log(np.geomspace(max(lo, 1e-300), hi, levels)))
        else:
            axes.append(np.linspace(lo, hi, levels))
    mesh = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=-1)
    scores = np.array([objective(vec) for vec in mesh])
    order = np.argsort(scores, kind="stable")[:keep]
    return [mesh[i].copy() for i in order]


def _count_residual(q_model: np.ndarray, t: np.ndarray, weights: np.ndarray) -> float:
    """Counts are judged after discretization with an integer tolerance of
    one, so deviations within +/-1 contribute nothing."""
    excess = np.maximum(np.abs(q_model - t) - 1.0, 0.0)
    return float(np.sum(weights * (excess / t) ** 2))


def calibrate(
    family: Family,
    target: QuartileTarget,
    bounds: Optional[Mapping[str, tuple[float, float]]] = None,
    discretize: bool = False,
    floor: Optional[float] = None,
    weights: Optional[Sequence[float]] = None,
    gpd_location: Optional[float] = None,
    residual_threshold: float = 0.15,
    seed: int = CALIBRATION_SEED,
    n_sim: int = _N_SIM,
    maxiter: int = 400,
    min_tail_mass: Optional[tuple[float, float]] = None,
    max_count_quantile: Optional[float] = None,
    tail_ratio_guard: Optional[float] = None,
) -> CalibrationResult:
    """Fit family parameters whose model quartiles match a target triple.

    Minimizes the weighted sum of squared relative quartile errors with
    multi-start Nelder-Mead constrained to ``bounds``.  Count targets
    (``discretize=True``) are scored on the simulated discretized variate
    (fixed 100000-point uniform grid) with a small continuous-quartile term
    keeping the search off the plateaus; their reported residual treats
    deviations within +/-1 as exact.  ``floor`` applies the generator's
    clamp (e.g. delays never fall below one tap-grid period).
    ``min_tail_mass=(x, mass)`` penalizes solutions keeping less than
    ``mass`` probability above ``x``; it steers degenerate count targets
    away from point masses that would starve downstream statistics.

    Raises
    ------
    CalibrationError
        When the best residual exceeds ``residual_threshold``; the error
        carries the best iterate.
    """
    t = target.as_array()
    w = np.asarray(weights if weights is not None else (1.0, 1.0, 1.0), dtype=np.float64)

    if family is Family.POINT_MASS:
        spec = point_mass(target.q2)
        q = _model_quartiles(spec, discretize, floor, seed, n_sim)
        residual = (
            _count_residual(q, t, w)
            if discretize
            else float(np.sum(w * ((q - t) / t) ** 2))
        )
        result = CalibrationResult(spec, residual, tuple(q), float(np.max(np.abs(q - t) / t)), True)
        if residual > residual_threshold:
            raise CalibrationError("point mass cannot match spread targets", best=result)
        return result

    if discretize and family is Family.GPD and gpd_location is None:
        gpd_location = 1.0  # count variates: published lower bound

    fixed_loc = gpd_location if family is Family.GPD else None

    def objective(vec: np.ndarray) -> float:
        try:
            spec = _spec_from_vector(family, vec, fixed_loc)
        except (ValueError, OverflowError):
            return 1e30
        q = _model_quartiles(spec, discretize, floor, seed, n_sim)
        penalty = 0.0
        if min_tail_mass is not None:
            x_thresh, mass = min_tail_mass
            from .distributions import cdf as _cdf

            penalty += 500.0 * max(0.0, float(_cdf(spec, x_thresh)) - (1.0 - mass)) ** 2
        if tail_ratio_guard is not None:
            # quartiles leave the far tail unidentified; among equally good
            # fits prefer ones whose extreme quantile stays physical.  The
            # weight is tiny so a cell that NEEDS a heavy tail to match its
            # quartiles keeps it.
            hi_q = quantile(spec, 1.0 - 1e-6)
            excess = hi_q / (tail_ratio_guard * target.q3)
            if excess > 1.0:
                penalty += 1e-5 * math.log10(excess) ** 2
        if discretize:
            base = float(np.sum(w * ((q - t) / t) ** 2))
            cont = _quantile_array(spec, np.asarray(_QUARTILE_PS))
            guide = float(np.sum(w * ((cont - t) / t) ** 2))
            from .distributions import cdf as _cdf

            # counts must round to >= 1 by mass, not by clamping; buffer
            # below the 1% profile invariant so the fit clears it safely
            below_half = float(_cdf(spec, 0.5))
            penalty += 1e4 * max(0.0, below_half - 0.005) ** 2
            if max_count_quantile is not None:
                # quartile targets say nothing about the far tail; keep count
                # draws physically bounded so batch generation stays sane
                hi = quantile(spec, 1.0 - 1e-7)
                penalty += 100.0 * max(0.0, hi / max_count_quantile - 1.0) ** 2
            # keep the achieved integer quartiles off their plateau edges:
            # a fit with F(m + 0.5) sitting exactly on a quartile probability
            # flips between adjacent integers under fresh sampling
            delta = 0.01
            from .distributions import _cdf_array as _cdfs

            for p_j, q_j in zip(_QUARTILE_PS, q):
                m = float(np.round(q_j))
                f_lo, f_hi = _cdfs(spec, np.asarray([m - 0.5, m + 0.5]))
                penalty += 500.0 * max(0.0, (p_j + delta) - f_hi) ** 2
                penalty += 500.0 * max(0.0, f_lo - (p_j - delta)) ** 2
            return base + 1e-3 * guide + penalty
        return float(np.sum(w * ((q - t) / t) ** 2)) + penalty

    tb = _transformed_bounds(family, bounds, fixed_loc)
    starts = _starts_for(family, target, bounds, fixed_loc)
    if discretize and bounds:
        # the discretized objective is piecewise constant over plateaus, so
        # local search alone is unreliable; a coarse scan over the whole box
        # finds the right plateaus cheaply and seeds the polish
        starts = _grid_scan_starts(family, bounds, fixed_loc, objective) + starts
    best_vec, best_val = None, math.inf
    for x0 in starts:
        res = scipy.optimize.minimize(
            objective,
            x0,
            method="Nelder-Mead",
            bounds=tb,
            options={"maxiter": maxiter, "xatol": 1e-12, "fatol": 1e-14, "adaptive": True},
        )
        if res.fun < best_val:
            best_vec, best_val = res.x, res.fun
    if best_vec is None:
        raise CalibrationError("no feasible start point")

    spec = _spec_from_vector(family, best_vec, fixed_loc)
    q = _model_quartiles(spec, discretize, floor, seed, n_sim)
    if discretize:
        residual = _count_residual(q, t, w)
        max_err = float(np.max(np.maximum(np.abs(q - t) - 1.0, 0.0) / t))
    else:
        residual = float(np.sum(w * ((q - t) / t) ** 2))
        max_err = float(np.max(np.abs(q - t) / t))
    scale_like = spec.params[1] if len(spec.params) > 1 else 0.0
    near_pm = bool(scale_like <= 1e-4 * max(abs(target.q2), 1e-300))
    result = CalibrationResult(spec, residual, tuple(float(v) for v in q), max_err, near_pm)
    if residual > residual_threshold:
        raise CalibrationError(
            f"calibration residual {residual:.4f} exceeds {residual_threshold}",
            best=result,
        )
    return result


# ---------------------------------------------------------------------------
# Pipeline-aware path-amplitude calibration
# ---------------------------------------------------------------------------
#
# Generated path amplitudes are rescaled so each cluster's mean equals its
# drawn cluster amplitude, which reshapes the pooled marginal away from the
# raw spec.  The published quartiles describe the pooled (post-rescale)
# amplitudes, so this cell is scored on a fixed synthetic cluster population
# driven by the already-calibrated cluster-amplitude and path-count specs.


@lru_cache(maxsize=8)
def _path_amp_population(a_spec, k_spec, seed, n_clusters):
    idx = np.arange(n_clusters, dtype=np.uint64)
    u_a = rng.uniforms_at(seed, 1, idx)
    u_k = rng.uniforms_at(seed, 2, idx)
    counts = _discretize(_quantile_array(k_spec, u_k)).astype(np.int64)
    width = int(counts.max())
    u_alpha = rng.uniforms_at(
        seed, 3, np.arange(n_clusters * width, dtype=np.uint64)
    ).reshape(n_clusters, width)
    amps = np.maximum(_quantile_array(a_spec, u_a), 1e-300)
    mask = np.arange(width)[None, :] < counts[:, None]
    return amps, counts, u_alpha, mask


# p-grid for the interpolated quantile transform used inside the pooled
# objective (exact transforms are used for the reported result)
_INTERP_PGRID = np.unique(
    np.concatenate(
        [
            np.geomspace(1e-10, 5e-4, 40),
            np.linspace(5e-4, 1 - 5e-4, 301),
            1.0 - np.geomspace(1e-10, 5e-4, 40),
        ]
    )
)


def _calibrate_path_amplitude(
    family: Family,
    target: QuartileTarget,
    bounds,
    a_spec: DistributionSpec,
    k_spec: DistributionSpec,
    weights=None,
    residual_threshold: float = 0.15,
    seed: int = CALIBRATION_SEED,
    n_clusters: int = 16000,
    maxiter: int = 260,
) -> CalibrationResult:
    t = target.as_array()
    w = np.asarray(weights if weights is not None else (1.0, 1.0, 1.0), dtype=np.float64)
    amps, counts, u_alpha, mask = _path_amp_population(a_spec, k_spec, seed, n_clusters)
    u_flat = u_alpha.ravel()

    def pooled_quartiles(spec: DistributionSpec, exact: bool) -> np.ndarray:
        if exact:
            alphas = _quantile_array(spec, u_flat)
        else:
            grid = _quantile_array(spec, _INTERP_PGRID)
            alphas = np.interp(u_flat, _INTERP_PGRID, grid)
        alphas = np.maximum(alphas, 1e-300).reshape(u_alpha.shape)
        means = np.where(mask, alphas, 0.0).sum(axis=1) / counts
        pooled = (alphas * (amps / means)[:, None])[mask]
        return np.quantile(pooled, _QUARTILE_PS)

    def objective(vec: np.ndarray) -> float:
        try:
            spec = _spec_from_vector(family, vec, None)
        except (ValueError, OverflowError):
            return 1e30
        q = pooled_quartiles(spec, exact=False)
        # rescaling cancels the spec's overall scale, leaving the pooled
        # quartiles flat along it; anchoring the raw median to the published
        # one pins that direction and keeps the stored spec interpretable
        raw_med = float(_quantile_array(spec, np.asarray([0.5]))[0])
        anchor = ((raw_med - t[1]) / t[1]) ** 2
        return float(np.sum(w * ((q - t) / t) ** 2)) + 1e-3 * anchor

    tb = _transformed_bounds(family, bounds, None)
    results = []
    # the pooled objective is smooth; the target-derived start plus the box
    # center cover it, so cap the start list to keep this cell affordable
    for x0 in _starts_for(family, target, bounds, None)[:5]:
        res = scipy.optimize.minimize(
            objective,
            x0,
            method="Nelder-Mead",
            bounds=tb,
            options={"maxiter": maxiter, "xatol": 1e-8, "fatol": 1e-10, "adaptive": True},
        )
        results.append(res)
    if not results:
        raise CalibrationError("no feasible start point")
    results.sort(key=lambda r: r.fun)

    # minimax polish: the validation gate is per-quartile, so spread the
    # residual evenly instead of leaving one quartile carrying it all.  The
    # pooled objective has distinct basins (narrow raw spread tracking the
    # cluster-amplitude marginal vs wide raw spread), so polish the best few
    # basins, not just the least-squares winner.
    def worst_err(vec: np.ndarray) -> float:
        try:
            spec = _spec_from_vector(family, vec, None)
        except (ValueError, OverflowError):
            return 1e30
        q = pooled_quartiles(spec, exact=False)
        errs = np.abs(q - t) / t
        return float(np.max(errs) + 0.05 * np.sum(errs**2))

    candidates = [r.x for r in results[:3]]
    for x0 in list(candidates):
        res = scipy.optimize.minimize(
            worst_err,
            x0,
            method="Nelder-Mead",
            bounds=tb,
            options={"maxiter": 200, "xatol": 1e-8, "fatol": 1e-10, "adaptive": True},
        )
        candidates.append(res.x)
    best_vec = min(candidates, key=worst_err)

    # final polish against a 4x larger population to shrink the finite-
    # population bias; the tight cells sit close to the validation gate
    big = _path_amp_population(a_spec, k_spec, seed + 1, 4 * n_clusters)
    amps_b, counts_b, u_alpha_b, mask_b = big

    def worst_err_big(vec: np.ndarray) -> float:
        try:
            spec = _spec_from_vector(family, vec, None)
        except (ValueError, OverflowError):
            return 1e30
        grid = _quantile_array(spec, _INTERP_PGRID)
        alphas = np.interp(u_alpha_b.ravel(), _INTERP_PGRID, grid)
        alphas = np.maximum(alphas, 1e-300).reshape(u_alpha_b.shape)
        means = np.where(mask_b, alphas, 0.0).sum(axis=1) / counts_b
        pooled = (alphas * (amps_b / means)[:, None])[mask_b]
        q = np.quantile(pooled, _QUARTILE_PS)
        errs = np.abs(q - t) / t
        return float(np.max(errs) + 0.02 * np.sum(errs**2))

    res = scipy.optimize.minimize(
        worst_err_big,
        best_vec,
        method="Nelder-Mead",
        bounds=tb,
        options={"maxiter": 150, "xatol": 1e-8, "fatol": 1e-10, "adaptive": True},
    )
    if worst_err_big(res.x) < worst_err_big(best_vec):
        best_vec = res.x

    spec = _spec_from_vector(family, best_vec, None)
    q = pooled_quartiles(spec, exact=True)
    residual = float(np.sum(w * ((q - t) / t) ** 2))
    max_err = float(np.max(np.abs(q - t) / t))
    result = CalibrationResult(spec, residual, tuple(float(v) for v in q), max_err, False)
    if residual > residual_threshold:
        raise CalibrationError(
            f"path-amplitude residual {residual:.4f} exceeds {residual_threshold}",
            best=result,
        )
    return result


def scale_spec(spec: DistributionSpec, s: float) -> DistributionSpec:
    """The same distribution with its variate multiplied by ``s`` > 0."""
    if s <= 0:
        raise ValueError("scale factor must be > 0")
    fam = spec.family
    if fam in (Family.GEV, Family.GPD):
        k, sig, loc = spec.params
        return DistributionSpec(fam, (k, sig * s, loc * s))
    if fam is Family.GAMMA:
        a, b = spec.params
        return DistributionSpec(fam, (a, b * s))
    if fam is Family.INVERSE_GAUSSIAN:
        m, lam = spec.params
        return DistributionSpec(fam, (m * s, lam * s))
    return DistributionSpec(fam, (spec.params[0] * s,))


def _joint_amplitude_refit(
    alpha_family: Family,
    alpha_target: QuartileTarget,
    alpha_bounds,
    a_spec: DistributionSpec,
    a_target: QuartileTarget,
    a_bounds,
    k_spec: DistributionSpec,
    seed: int = CALIBRATION_SEED,
    n_clusters: int = 48000,
    maxiter: int = 220,
):
    """Split the amplitude-table tension across both marginals.

    Rescaling makes the pooled path amplitudes exactly proportional to the
    cluster-amplitude spec, so when the pooled quartiles cannot reach their
    targets around the published cluster amplitudes, a common scale factor
    on the cluster-amplitude spec trades error between the two cells.  The
    search optimizes the path-amplitude shape with the scale minimized out
    analytically per evaluation; the factor is constrained to keep the
    cluster-amplitude spec inside its published box when one applies.

    Returns (alpha_spec, scaled_a_spec, s, pooled_quartiles).
    """
    t_alpha = alpha_target.as_array()
    t_a = a_target.as_array()
    a_quart = _quantile_array(a_spec, np.asarray(_QUARTILE_PS))

    s_lo, s_hi = 0.80, 1.30
    if a_bounds:
        named = a_spec.named_params()
        for name, (lo, hi) in a_bounds.items():
            v = named.get(name, 0.0)
            if name in ("scale", "location") and v > 0:
                s_lo = max(s_lo, lo / v)
                s_hi = min(s_hi, hi / v)
    s_grid = np.linspace(s_lo, max(s_hi, s_lo + 1e-6), 121)
    a_errs = np.abs(np.outer(s_grid, a_quart) / t_a - 1.0)  # (s, 3)

    amps, counts, u_alpha, mask = _path_amp_population(a_spec, k_spec, seed, n_clusters)
    u_flat = u_alpha.ravel()

    def pooled(spec: DistributionSpec, exact: bool) -> np.ndarray:
        if exact:
            alphas = _quantile_array(spec, u_flat)
        else:
            grid = _quantile_array(spec, _INTERP_PGRID)
            alphas = np.interp(u_flat, _INTERP_PGRID, grid)
        alphas = np.maximum(alphas, 1e-300).reshape(u_alpha.shape)
        means = np.where(mask, alphas, 0.0).sum(axis=1) / counts
        return np.quantile((alphas * (amps / means)[:, None])[mask], _QUARTILE_PS)

    def joint_profile(p_quart: np.ndarray):
        p_errs = np.abs(np.outer(s_grid, p_quart) / t_alpha - 1.0)
        worst = np.maximum(p_errs.max(axis=1), a_errs.max(axis=1))
        idx = int(np.argmin(worst))
        return float(worst[idx]), float(s_grid[idx])

    def objective(vec: np.ndarray) -> float:
        try:
            spec = _spec_from_vector(alpha_family, vec, None)
        except (ValueError, OverflowError):
            return 1e30
        worst, _ = joint_profile(pooled(spec, exact=False))
        return worst

    tb = _transformed_bounds(alpha_family, alpha_bounds, None)
    best_vec, best_val = None, math.inf
    for x0 in _starts_for(alpha_family, alpha_target, alpha_bounds, None)[:4]:
        res = scipy.optimize.minimize(
            objective,
            x0,
            method="Nelder-Mead",
            bounds=tb,
            options={"maxiter": maxiter, "xatol": 1e-8, "fatol": 1e-10, "adaptive": True},
        )
        if res.fun < best_val:
            best_vec, best_val = res.x, res.fun
    if best_vec is None:
        raise CalibrationError("no feasible start point")
    alpha_spec = _spec_from_vector(alpha_family, best_vec, None)
    p_quart = pooled(alpha_spec, exact=True)
    _, s = joint_profile(p_quart)
    return alpha_spec, scale_spec(a_spec, s), s, tuple(float(v) for v in s * p_quart)


# ---------------------------------------------------------------------------
# Per-cell orchestration: published bounds first, free refit as fallback
# ---------------------------------------------------------------------------

_PARAM_KIND = {
    "num_clusters": "count",
    "paths_per_cluster": "count",
    "intercluster_delay": "delay",
    "cluster_amplitude": "amplitude",
    "path_amplitude": "amplitude",
}

_SHAPE_BOX = {"count": (-2.0, 0.6), "delay": (-2.0, 4.0), "amplitude": (-2.0, 2.0)}

# Reweighting targets a little below the validation tolerance so simulation
# noise cannot push a passing cell over the 15% line.
_MAX_ERR_GOAL = 0.10
_MAX_ERR_ACCEPT = 0.13


def _default_box(family: Family, parameter: str, target: QuartileTarget):
    """Generous search box used when no published range constrains a cell."""
    t1, t2, t3 = target.q1, target.q2, target.q3
    span = max(t3 - t1, abs(t2) * 1e-3, 1e-300)
    kind = _PARAM_KIND[parameter]
    if family in (Family.GEV, Family.GPD):
        box = {
            "shape": _SHAPE_BOX[kind],
            "scale": (span * 1e-9, max(span * 1e3, abs(t2))),
        }
        if family is Family.GEV:
            box["location"] = (t1 - max(50 * span, 0.5 * abs(t2)), t3 + max(10 * span, 0.5 * abs(t2)))
        else:
            box["location"] = (t1 - max(50 * span, 0.5 * abs(t2)), t1)
        return box
    if family is Family.GAMMA:
        return {"shape": (1e-4, 1e6), "scale": (t2 * 1e-7, t2 * 1e4)}
    if family is Family.INVERSE_GAUSSIAN:
        return {"mean": (t2 / 100, t2 * 100), "shape": (t2 * 1e-6, t2 * 1e8)}
    raise ValueError(family)


def _per_quartile_errors(result: CalibrationResult, target: QuartileTarget, discretize: bool):
    q = np.asarray(result.model_quartiles)
    t = target.as_array()
    if discretize:
        return np.maximum(np.abs(q - t) - 1.0, 0.0) / t
    return np.abs(q - t) / t


def _unweighted_residual(result, target, discretize):
    errs = _per_quartile_errors(result, target, discretize)
    if discretize:
        return float(np.sum(errs**2))
    q = np.asarray(result.model_quartiles)
    t = target.as_array()
    return float(np.sum(((q - t) / t) ** 2))


def _run_reweighted(cal_fn: Callable[[np.ndarray], CalibrationResult],
                    target: QuartileTarget, base_weights, discretize: bool,
                    rounds: int = 5) -> CalibrationResult:
    """Iteratively upweight the worst quartile to chase the min-max fit."""
    w = np.asarray(base_weights, dtype=np.float64).copy()

    def attempt(weights):
        try:
            return cal_fn(weights)
        except CalibrationError as err:
            return err.best

    best = attempt(w)
    for _ in range(rounds):
        if best is None or best.max_rel_err <= _MAX_ERR_GOAL:
            break
        errs = _per_quartile_errors(best, target, discretize)
        w = w.copy()
        w[int(np.argmax(errs))] *= 1.8
        cand = attempt(w)
        if cand is not None and cand.max_rel_err < best.max_rel_err:
            best = cand
    if best is None:
        raise CalibrationError("calibration produced no iterate")
    return best


def calibrate_cell(
    scenario: Scenario,
    beamwidth: int,
    parameter: str,
    target: QuartileTarget,
    tap_grid: float = DEFAULT_TAP_GRID,
    a_spec: Optional[DistributionSpec] = None,
    k_spec: Optional[DistributionSpec] = None,
    seed: int = CALIBRATION_SEED,
) -> tuple[CalibrationResult, str]:
    """Calibrate one (scenario, beamwidth, parameter) cell.

    Returns the result plus a provenance string.  The published range box is
    tried first when one applies; if no in-range fit reaches the quartile
    tolerance the cell is refit over a free box and flagged, because the
    registry's contract is to reproduce the published quartile tables.
    """
    discretize = parameter in COUNT_PARAMETERS
    floor = tap_grid if parameter == "intercluster_delay" else None
    weights = (1.0, 1.0, 1.0)
    notes = []
    if scenario is Scenario.SIDE_TUNNEL and parameter == "intercluster_delay":
        # published q1 = q2 = one grid period: grid-quantized data; relax the
        # median constraint so the fit is not ill-posed
        weights = (1.0, 0.5, 1.0)
        notes.append("q1=q2 treated as grid-quantized; median half-weighted")
    if scenario is Scenario.MECHANICAL_ROOM and parameter == "intercluster_delay":
        notes.append("published row identical to tunnel-20; transcribed verbatim")

    assigned = family_assignment(scenario, beamwidth, parameter)
    # unassigned cell (tunnel-80 cluster count): the campaign singled it out
    # as the one case GEV does not describe, so on residual ties prefer the
    # alternatives over GEV
    candidates = [assigned] if assigned is not None else [Family.GPD, Family.GAMMA, Family.GEV]

    # a degenerate cluster-count target must not collapse to a point mass:
    # the published delay tables prove multi-cluster captures existed, and
    # validating the delay row requires gaps to occur at all
    tail = None
    if parameter == "num_clusters" and target.q3 <= 1.0:
        tail = (1.5, 0.1)
    count_cap = {"num_clusters": 2000.0, "paths_per_cluster": 500.0}.get(parameter)
    ratio_guard = 50.0 if parameter == "intercluster_delay" else None

    def fit(family: Family, bounds, w) -> CalibrationResult:
        if parameter == "path_amplitude":
            if a_spec is None or k_spec is None:
                raise ValueError("path_amplitude calibration needs cluster specs")
            return _calibrate_path_amplitude(
                family, target, bounds, a_spec, k_spec,
                weights=w, residual_threshold=math.inf, seed=seed,
            )
        return calibrate(
            family, target, bounds=bounds, discretize=discretize, floor=floor,
            weights=w, residual_threshold=math.inf, seed=seed,
            min_tail_mass=tail, max_count_quantile=count_cap if discretize else None,
            tail_ratio_guard=ratio_guard,
        )

    # the path-amplitude objective carries its own minimax polish, so the
    # reweighting loop only applies to the analytic cells
    rounds = 0 if parameter == "path_amplitude" else 5
    best: Optional[tuple[CalibrationResult, str]] = None
    for family in candidates:
        bounds = published_bounds(scenario, beamwidth, parameter)
        tags = []
        result = None
        if bounds is not None:
            result = _run_reweighted(
                lambda w: fit(family, bounds, w), target, weights, discretize, rounds=rounds
            )
            # counts must land within the +/-1 integer tolerance outright;
            # continuous cells need headroom below the 15% validation gate
            err_ok = (
                result.max_rel_err == 0.0
                if discretize
                else result.max_rel_err <= _MAX_ERR_ACCEPT
            )
            if err_ok and _unweighted_residual(result, target, discretize) <= 0.15:
                tags.append("within published ranges")
            else:
                result = None
                tags.append("published ranges cannot reach the published quartiles; refit free")
        if result is None:
            free_box = _default_box(family, parameter, target)
            result = _run_reweighted(
                lambda w: fit(family, free_box, w), target, weights, discretize, rounds=rounds
            )
            if bounds is None:
                tags.append("no published ranges for this cell")
        provenance = "; ".join(tags + notes)
        if assigned is None:
            provenance = f"family {family.value} chosen by residual; " + provenance
        if best is None or _unweighted_residual(result, target, discretize) < _unweighted_residual(best[0], target, discretize):
            best = (result, provenance)

    result, provenance = best
    residual = _unweighted_residual(result, target, discretize)
    if residual > 0.15:
        raise CalibrationError(
            f"{scenario.value}-{beamwidth} {parameter}: residual {residual:.4f} > 0.15",
            best=result,
        )
    return replace(result, residual=residual), provenance


def calibrate_profile(
    scenario: Scenario,
    beamwidth: int,
    targets: Optional[Mapping[str, QuartileTarget]] = None,
    tap_grid: float = DEFAULT_TAP_GRID,
    seed: int = CALIBRATION_SEED,
) -> ScenarioProfile:
    """Calibrate all five parameter cells of one profile.

    ``targets`` defaults to the published tables.  Path amplitudes are
    calibrated last, against the pooled post-rescale population implied by
    the freshly calibrated cluster-amplitude and path-count specs.
    """
    if targets is None:
        table = builtin_targets()
        targets = {p: table[(scenario, beamwidth, p)] for p in PARAMETERS}
    missing = [p for p in PARAMETERS if p not in targets]
    if missing:
        raise ValueError(f"missing targets for {missing}")

    specs: dict[str, DistributionSpec] = {}
    residuals: dict[str, float] = {}
    provenance: dict[str, str] = {}
    results: dict[str, CalibrationResult] = {}
    order = [p for p in PARAMETERS if p != "path_amplitude"] + ["path_amplitude"]
    for parameter in order:
        kwargs = {}
        if parameter == "path_amplitude":
            kwargs = {"a_spec": specs["cluster_amplitude"], "k_spec": specs["paths_per_cluster"]}
        result, prov = calibrate_cell(
            scenario, beamwidth, parameter, targets[parameter], tap_grid, seed=seed, **kwargs
        )
        specs[parameter] = result.spec
        residuals[parameter] = result.residual
        provenance[parameter] = prov
        results[parameter] = result

    # when the path-amplitude pooled marginal cannot reach its targets around
    # the fitted cluster amplitudes, split the tension across both amplitude
    # cells with a common scale factor (the pooled values are exactly
    # proportional to the cluster-amplitude spec)
    if results["path_amplitude"].max_rel_err > 0.12:
        a_in_range = "within published ranges" in provenance["cluster_amplitude"]
        alpha_in_range = "within published ranges" in provenance["path_amplitude"]
        alpha_bounds = (
            published_bounds(scenario, beamwidth, "path_amplitude")
            if alpha_in_range
            else _default_box(
                specs["path_amplitude"].family, "path_amplitude", targets["path_amplitude"]
            )
        )
        a_bounds = (
            published_bounds(scenario, beamwidth, "cluster_amplitude") if a_in_range else None
        )
        alpha_spec, a_scaled, s, pooled_q = _joint_amplitude_refit(
            specs["path_amplitude"].family,
            targets["path_amplitude"],
            alpha_bounds,
            specs["cluster_amplitude"],
            targets["cluster_amplitude"],
            a_bounds,
            specs["paths_per_cluster"],
            seed=seed,
        )
        t_alpha = targets["path_amplitude"].as_array()
        t_a = targets["cluster_amplitude"].as_array()

        def errs_of(pooled, a_cand):
            ae = np.abs(np.asarray(pooled) - t_alpha) / t_alpha
            aq = _quantile_array(a_cand, np.asarray(_QUARTILE_PS))
            return ae, np.abs(aq - t_a) / t_a

        alpha_errs, a_errs = errs_of(pooled_q, a_scaled)
        joint_worst = max(alpha_errs.max(), a_errs.max())
        a_note = f"rescaled by {s:.4f} to balance the pooled path amplitudes"

        if joint_worst > 0.12:
            # rescaling alone cannot balance the pair (the cluster-amplitude
            # shape is pinned by its published box); refit that shape freely
            # and balance again, trading one more out-of-range cell for
            # quartile fidelity on both amplitude tables
            a_free = calibrate(
                specs["cluster_amplitude"].family,
                targets["cluster_amplitude"],
                bounds=_default_box(
                    specs["cluster_amplitude"].family,
                    "cluster_amplitude",
                    targets["cluster_amplitude"],
                ),
                residual_threshold=math.inf,
                seed=seed,
            )
            alpha2, a2, s2, pooled2 = _joint_amplitude_refit(
                specs["path_amplitude"].family,
                targets["path_amplitude"],
                _default_box(
                    specs["path_amplitude"].family, "path_amplitude", targets["path_amplitude"]
                ),
                a_free.spec,
                targets["cluster_amplitude"],
                None,
                specs["paths_per_cluster"],
                seed=seed,
            )
            alpha_errs2, a_errs2 = errs_of(pooled2, a2)
            alpha_freed = False
            if max(alpha_errs2.max(), a_errs2.max()) < joint_worst:
                alpha_spec, a_scaled, pooled_q = alpha2, a2, pooled2
                alpha_errs, a_errs = alpha_errs2, a_errs2
                joint_worst = max(alpha_errs.max(), a_errs.max())
                a_note = (
                    "published ranges cannot balance the pooled path amplitudes; "
                    f"refit free and rescaled by {s2:.4f}"
                )
                alpha_freed = True
        else:
            alpha_freed = False

        if joint_worst < results["path_amplitude"].max_rel_err:
            specs["path_amplitude"] = alpha_spec
            specs["cluster_amplitude"] = a_scaled
            residuals["path_amplitude"] = float(np.sum(alpha_errs**2))
            residuals["cluster_amplitude"] = float(np.sum(a_errs**2))
            if alpha_freed:
                provenance["path_amplitude"] = (
                    "published ranges cannot balance the pooled path amplitudes; "
                    "refit free; jointly balanced with cluster amplitude"
                )
            else:
                provenance["path_amplitude"] += "; jointly balanced with cluster amplitude"
            provenance["cluster_amplitude"] += f"; {a_note}"

    return ScenarioProfile(
        scenario=scenario,
        beamwidth_deg=float(beamwidth),
        num_clusters=specs["num_clusters"],
        intercluster_delay=specs["intercluster_delay"],
        cluster_amplitude=specs["cluster_amplitude"],
        paths_per_cluster=specs["paths_per_cluster"],
        path_amplitude=specs["path_amplitude"],
        tap_grid=tap_grid,
        residuals=residuals,
        provenance=provenance,
    )


# ---------------------------------------------------------------------------
# Registry, serialization, validation
# ---------------------------------------------------------------------------

PROFILE_SCHEMA_VERSION = 1


def profile_to_jsonable(profile: ScenarioProfile) -> dict:
    """Plain-dict form of a profile (the documented profile JSON schema)."""
    name = (
        profile.scenario.value
        if isinstance(profile.scenario, Scenario)
        else str(profile.scenario)
    )
    out = {
        "schema_version": PROFILE_SCHEMA_VERSION,
        "scenario": name,
        "beamwidth_deg": profile.beamwidth_deg,
        "tap_grid": profile.tap_grid,
        "parameters": {},
    }
    for parameter in PARAMETERS:
        spec = profile.spec_for(parameter)
        out["parameters"][parameter] = {
            "family": spec.family.value,
            "params": spec.named_params(),
            "residual": profile.residuals.get(parameter),
            "provenance": profile.provenance.get(parameter, ""),
        }
    return out


def profile_from_jsonable(data: Mapping) -> ScenarioProfile:
    try:
        scenario: "Scenario | str" = Scenario(data["scenario"])
    except ValueError:
        scenario = str(data["scenario"])
    specs = {}
    residuals = {}
    provenance = {}
    for parameter in PARAMETERS:
        entry = data["parameters"][parameter]
        family = Family(entry["family"])
        params = tuple(entry["params"][n] for n in PARAM_NAMES[family])
        specs[parameter] = DistributionSpec(family, params)
        if entry.get("residual") is not None:
            residuals[parameter] = float(entry["residual"])
        if entry.get("provenance"):
            provenance[parameter] = entry["provenance"]
    return ScenarioProfile(
        scenario=scenario,
        beamwidth_deg=float(data["beamwidth_deg"]),
        tap_grid=float(data["tap_grid"]),
        residuals=residuals,
        provenance=provenance,
        **specs,
    )


@lru_cache(maxsize=1)
def builtin_profiles() -> dict[tuple[Scenario, int], ScenarioProfile]:
    """The eight catalogued profiles.

    Loads the calibrated constants shipped with the package (produced by
    ``scripts/calibrate_profiles.py``, which is deterministic); falls back to
    recalibrating in-process when the data file is absent.
    """
    import importlib.resources
    import json

    try:
        text = (
            importlib.resources.files("mmwchan")
            .joinpath("data/builtin_profiles.json")
            .read_text()
        )
    except (FileNotFoundError, ModuleNotFoundError):
        return recalibrate_builtin_profiles()
    raw = json.loads(text)
    out: dict[tuple[Scenario, int], ScenarioProfile] = {}
    for entry in raw["profiles"]:
        profile = profile_from_jsonable(entry)
        out[(profile.scenario, int(profile.beamwidth_deg))] = profile
    return out


def recalibrate_builtin_profiles() -> dict[tuple[Scenario, int], ScenarioProfile]:
    """Calibrate all eight profiles from the published tables, from scratch."""
    return {
        (scenario, bw): calibrate_profile(scenario, bw)
        for scenario, bw in PROFILE_KEYS
    }


def profile_by_id(profile_id: str) -> ScenarioProfile:
    for profile in builtin_profiles().values():
        if profile.profile_id == profile_id:
            return profile
    known = ", ".join(p.profile_id for p in builtin_profiles().values())
    raise KeyError(f"unknown profile '{profile_id}' (built-ins: {known})")


def simulate_profile_quartiles(
    profile: ScenarioProfile, seed: int, n: int = 100_000, base_stream: int = 0
) -> dict[str, np.ndarray]:
    """Empirical quartiles of each parameter over ``n`` seeded realizations."""
    from .channel import draw_parameters

    draws = draw_parameters(profile, seed, n, base_stream=base_stream)
    pools = {
        "num_clusters": draws.cluster_counts.astype(np.float64),
        "intercluster_delay": draws.gaps,
        "cluster_amplitude": draws.cluster_amplitudes,
        "paths_per_cluster": draws.path_counts.astype(np.float64),
        "path_amplitude": draws.path_amplitudes,
    }
    return {
        name: (
            np.quantile(vals, _QUARTILE_PS)
            if vals.size
            else np.full(3, np.nan)
        )
        for name, vals in pools.items()
    }


def validate_profile(
    profile: ScenarioProfile,
    targets: Optional[Mapping[str, QuartileTarget]] = None,
    n: int = 100_000,
    seed: int = 1,
    tolerance: float = 0.15,
    count_tolerance: float = 1.0,
) -> list[dict]:
    """Compare simulated quartiles against targets, one row per parameter.

    Counts pass within ``count_tolerance`` of the target after
    discretization; continuous parameters pass within ``tolerance`` relative
    error per quartile.
    """
    if targets is None:
        if not isinstance(profile.scenario, Scenario):
            raise ValueError("explicit targets required for custom profiles")
        table = builtin_targets()
        targets = {
            p: table[(profile.scenario, int(profile.beamwidth_deg), p)]
            for p in PARAMETERS
        }
    sim = simulate_profile_quartiles(profile, seed, n)
    rows = []
    for parameter in PARAMETERS:
        t = targets[parameter].as_array()
        q = sim[parameter]
        if parameter in COUNT_PARAMETERS:
            errs = np.abs(q - t)
            passed = bool(np.all(errs <= count_tolerance + 1e-9))
            metric = "abs"
        else:
            errs = np.abs(q - t) / t
            passed = bool(np.all(errs <= tolerance + 1e-12))
            metric = "rel"
        rows.append(
            {
                "parameter": parameter,
                "target": [float(v) for v in t],
                "simulated": [float(v) for v in q],
                "errors": [float(v) for v in errs],
                "metric": metric,
                "passed": passed,
            }
        )
    return rows
