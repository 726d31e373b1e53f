"""Cluster tap-delay-line channel structure and synthetic generation.

A channel realization is an ordered set of path clusters.  Cluster ``c``
arrives at delay ``T_c`` with amplitude set ``A_c``; inside it, paths sit on
consecutive tap-grid periods with amplitudes rescaled so their mean equals
``A_c`` exactly.  Generation draws every quantity from the distribution specs
of a scenario profile through counter-based uniform streams, so a realization
is a pure function of ``(profile, seed, stream)`` and batches can be produced
in any order or degree of parallelism without changing a single bit.

Counter layout per realization stream (addresses into :mod:`mmwchan.rng`):

====================  =========================================
cluster count         0
inter-cluster gap g   2**16 + g
cluster c amplitude   2**32 + 64*c + attempt
cluster c path count  2**40 + c
path (c, p) amplitude 2**44 + 2**16*c + 64*p + attempt
====================  =========================================

Amplitude draws that land <= 0 are redrawn at the next attempt counter, up to
64 attempts.  Layout limits (65535 clusters, 1023 paths per cluster) are far
beyond anything a credible profile produces and are enforced with errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Optional

import numpy as np

from . import rng
from .distributions import DistributionSpec, _quantile_array

if TYPE_CHECKING:  # pragma: no cover
    from .profiles import ScenarioProfile
    from .trace import TapSeries

_GAP_BASE = np.uint64(2**16)
_AMP_BASE = np.uint64(2**32)
_COUNT_BASE = np.uint64(2**40)
_ALPHA_BASE = np.uint64(2**44)

MAX_CLUSTERS = 65535
MAX_PATHS = 1023
MAX_REDRAWS = 64


class GenerationError(Exception):
    """Profile produced draws outside what the generator supports."""


class EmptyChannelError(Exception):
    """An operation removed every cluster from a realization."""


@dataclass(frozen=True)
class AngularInfo:
    """Departure/arrival directions in degrees."""

    azimuth_tx: float
    elevation_tx: float
    azimuth_rx: float
    elevation_rx: float

    def __post_init__(self):
        for az in (self.azimuth_tx, self.azimuth_rx):
            if not -180.0 <= az < 180.0:
                raise ValueError("azimuth must lie in [-180, 180)")
        for el in (self.elevation_tx, self.elevation_rx):
            if not -90.0 <= el <= 90.0:
                raise ValueError("elevation must lie in [-90, 90]")


@dataclass(frozen=True)
class BeamPattern:
    """Ideal cone beam: boresight direction plus total width in degrees."""

    boresight: AngularInfo
    width_deg: float

    def __post_init__(self):
        if self.width_deg <= 0:
            raise ValueError("beam width must be > 0")


@dataclass(frozen=True)
class PathTap:
    """One intra-cluster path: delay offset from cluster start, amplitude."""

    tau: float
    alpha: float
    angles: Optional[AngularInfo] = None

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("path delay offset must be >= 0")
        if self.alpha <= 0:
            raise ValueError("path amplitude must be > 0")


@dataclass(frozen=True)
class Cluster:
    """A bundle of paths travelling along one geometric propagation path."""

    T: float
    A: float
    paths: tuple[PathTap, ...]

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if self.T < 0:
            raise ValueError("cluster delay must be >= 0")
        if self.A <= 0:
            raise ValueError("cluster amplitude must be > 0")
        if not self.paths:
            raise ValueError("cluster needs at least one path")
        if self.paths[0].tau != 0.0:
            raise ValueError("first path of a cluster must sit at tau = 0")
        taus = [p.tau for p in self.paths]
        if any(b <= a for a, b in zip(taus, taus[1:])):
            raise ValueError("path offsets must be strictly increasing")
        mean_alpha = math.fsum(p.alpha for p in self.paths) / len(self.paths)
        if abs(mean_alpha - self.A) > 1e-9 * max(abs(self.A), 1e-300):
            raise ValueError("mean path amplitude must equal cluster amplitude")


@dataclass(frozen=True)
class ChannelRealization:
    """One synthetic channel: ordered clusters, first arrival at T = 0."""

    clusters: tuple[Cluster, ...]
    profile_id: str
    seed: int
    stream: int = 0

    def __post_init__(self):
        object.__setattr__(self, "clusters", tuple(self.clusters))
        if not self.clusters:
            raise ValueError("realization needs at least one cluster")
        if self.clusters[0].T != 0.0:
            raise ValueError("first cluster must arrive at T = 0")
        ts = [c.T for c in self.clusters]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("cluster delays must be strictly increasing")

    def total_power(self) -> float:
        return math.fsum(p.alpha**2 for c in self.clusters for p in c.paths)


@dataclass
class ParameterDraws:
    """Pooled raw parameter draws for a batch of realizations.

    ``cluster_counts[j]`` belongs to realization ``j``; flat arrays follow
    realization-major, cluster-major order.  ``cluster_offsets`` and
    ``path_offsets`` are prefix sums delimiting each realization's clusters
    and each cluster's paths inside the flat arrays.
    """

    cluster_counts: np.ndarray  # (n,) int
    gaps: np.ndarray  # (sum counts - n,) seconds, post-clamp
    cluster_amplitudes: np.ndarray  # (total clusters,)
    path_counts: np.ndarray  # (total clusters,) int
    path_amplitudes: np.ndarray  # (total paths,) rescaled
    cluster_offsets: np.ndarray = field(default=None)
    path_offsets: np.ndarray = field(default=None)


def _discretize_counts(x: np.ndarray, cap: int, what: str) -> np.ndarray:
    """Round half away from zero, clamp to >= 1; guard the layout cap."""
    c = np.floor(x + 0.5)
    if np.any(c > cap):
        raise GenerationError(f"{what} draw exceeded {cap}; profile too heavy-tailed")
    return np.maximum(c, 1.0).astype(np.int64)


def _draw_positive(
    spec: DistributionSpec, keys: np.ndarray, base_counters: np.ndarray, what: str
) -> np.ndarray:
    """Inverse-transform draws redrawn (attempt counters) until positive."""
    vals = _quantile_array(spec, _stream_uniforms(keys, base_counters))
    bad = vals <= 0
    attempt = 1
    while np.any(bad):
        if attempt >= MAX_REDRAWS:
            raise GenerationError(f"{what} draw stayed non-positive after {MAX_REDRAWS} attempts")
        vals[bad] = _quantile_array(
            spec, _stream_uniforms(keys[bad], base_counters[bad] + np.uint64(attempt))
        )
        bad = vals <= 0
        attempt += 1
    return vals


def _stream_uniforms(keys: np.ndarray, counters: np.ndarray) -> np.ndarray:
    return rng.uniforms_many(keys, counters)


def draw_parameters(
    profile: "ScenarioProfile", seed: int, n: int, base_stream: int = 0
) -> ParameterDraws:
    """Draw the raw model parameters of ``n`` realizations, vectorized.

    Realization ``j`` consumes exactly the counters of stream
    ``base_stream + j``, so the pooled output equals what ``n`` independent
    :func:`generate_realization` calls would produce.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    grid = profile.tap_grid
    keys = rng.stream_keys(seed, base_stream + np.arange(n, dtype=np.uint64))

    u0 = _stream_uniforms(keys, np.zeros(n, dtype=np.uint64))
    counts = _discretize_counts(
        _quantile_array(profile.num_clusters, u0), MAX_CLUSTERS, "cluster count"
    )

    # inter-cluster gaps, clamped up to one grid period
    n_gaps = counts - 1
    gap_keys = np.repeat(keys, n_gaps)
    gap_idx = _ragged_arange(n_gaps)
    gaps = _quantile_array(
        profile.intercluster_delay, _stream_uniforms(gap_keys, _GAP_BASE + gap_idx)
    )
    gaps = np.maximum(gaps, grid)

    # per-cluster draws
    clus_keys = np.repeat(keys, counts)
    clus_idx = _ragged_arange(counts)
    amps = _draw_positive(
        profile.cluster_amplitude,
        clus_keys,
        _AMP_BASE + clus_idx * np.uint64(MAX_REDRAWS),
        "cluster amplitude",
    )
    path_counts = _discretize_counts(
        _quantile_array(
            profile.paths_per_cluster, _stream_uniforms(clus_keys, _COUNT_BASE + clus_idx)
        ),
        MAX_PATHS,
        "path count",
    )

    # per-path draws, then rescale each cluster to its amplitude
    path_keys = np.repeat(clus_keys, path_counts)
    path_cluster_idx = np.repeat(clus_idx, path_counts)
    path_idx = _ragged_arange(path_counts)
    alphas = _draw_positive(
        profile.path_amplitude,
        path_keys,
        _ALPHA_BASE + path_cluster_idx * _GAP_BASE + path_idx * np.uint64(MAX_REDRAWS),
        "path amplitude",
    )
    path_offsets = np.concatenate(([0], np.cumsum(path_counts)))
    sums = np.add.reduceat(alphas, path_offsets[:-1]) if alphas.size else np.zeros(0)
    means = sums / path_counts
    alphas = alphas * np.repeat(amps / means, path_counts)

    return ParameterDraws(
        cluster_counts=counts,
        gaps=gaps,
        cluster_amplitudes=amps,
        path_counts=path_counts,
        path_amplitudes=alphas,
        cluster_offsets=np.concatenate(([0], np.cumsum(counts))),
        path_offsets=path_offsets,
    )


def _ragged_arange(lengths: np.ndarray) -> np.ndarray:
    """[0..l0-1, 0..l1-1, ...] as uint64."""
    total = int(lengths.sum())
    if total == 0:
        return np.zeros(0, dtype=np.uint64)
    starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
    return (
        np.arange(total, dtype=np.int64) - np.repeat(starts, lengths)
    ).astype(np.uint64)


def generate_realization(
    profile: "ScenarioProfile", seed: int, stream: int = 0
) -> ChannelRealization:
    """Generate one channel realization from a scenario profile.

    Cluster delays are the cumulative sum of clamped inter-cluster gaps with
    the first cluster anchored at T = 0; path offsets occupy consecutive
    tap-grid periods; path amplitudes are rescaled so each cluster's mean
    equals its drawn amplitude.  Deterministic in ``(profile, seed, stream)``.
    """
    profile.validate()
    draws = draw_parameters(profile, seed, 1, base_stream=stream)
    grid = profile.tap_grid
    t_values = np.concatenate(([0.0], np.cumsum(draws.gaps)))
    clusters = []
    for c in range(int(draws.cluster_counts[0])):
        k = int(draws.path_counts[c])
        lo, hi = draws.path_offsets[c], draws.path_offsets[c + 1]
        alphas = draws.path_amplitudes[lo:hi]
        paths = tuple(
            PathTap(tau=p * grid, alpha=float(alphas[p])) for p in range(k)
        )
        clusters.append(
            Cluster(T=float(t_values[c]), A=float(draws.cluster_amplitudes[c]), paths=paths)
        )
    return ChannelRealization(
        clusters=tuple(clusters),
        profile_id=profile.profile_id,
        seed=int(seed),
        stream=int(stream),
    )


def realization_to_taps(r: ChannelRealization, grid_period: float) -> "TapSeries":
    """Flatten a realization to absolute (delay, amplitude) taps on a grid.

    Tap delays are ``T + tau`` snapped to the nearest grid point; taps landing
    on the same point combine as the root sum of squares, preserving total
    power.  Output is sorted by delay.
    """
    from .trace import TapSeries

    if grid_period <= 0:
        raise ValueError("grid period must be > 0")
    delays = np.array([c.T + p.tau for c in r.clusters for p in c.paths])
    amps = np.array([p.alpha for c in r.clusters for p in c.paths])
    cells = np.floor(delays / grid_period + 0.5).astype(np.int64)
    uniq, inv = np.unique(cells, return_inverse=True)
    power = np.zeros(uniq.size)
    np.add.at(power, inv, amps**2)
    return TapSeries(
        delays=uniq.astype(np.float64) * grid_period,
        amplitudes=np.sqrt(power),
        location_id=r.profile_id,
        scenario=r.profile_id,
    )


def segment_cluster_delays(draws: ParameterDraws) -> np.ndarray:
    """Per-cluster arrival delays T for every realization in a batch.

    Segmented cumulative sum of the gaps with T = 0 at each realization's
    first cluster; flat array aligned with ``draws.cluster_amplitudes``.
    """
    total = int(draws.cluster_counts.sum())
    arr = np.zeros(total)
    first = draws.cluster_offsets[:-1]
    is_first = np.zeros(total, dtype=bool)
    is_first[first] = True
    arr[~is_first] = draws.gaps
    g = np.cumsum(arr)
    base = np.repeat(g[first], draws.cluster_counts)
    return g - base


def batch_tap_arrays(
    profile: "ScenarioProfile", seed: int, n: int, base_stream: int = 0
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Grid-snapped (delays, amplitudes) taps for ``n`` realizations.

    Fully vectorized equivalent of ``realization_to_taps(
    generate_realization(profile, seed, stream), profile.tap_grid)`` for
    streams ``base_stream .. base_stream + n - 1``.
    """
    if n == 0:
        return []
    draws = draw_parameters(profile, seed, n, base_stream=base_stream)
    grid = profile.tap_grid
    t_clusters = segment_cluster_delays(draws)
    path_idx = _ragged_arange(draws.path_counts).astype(np.float64)
    delays = np.repeat(t_clusters, draws.path_counts) + path_idx * grid
    cells = np.floor(delays / grid + 0.5).astype(np.int64)
    rid = np.repeat(
        np.repeat(np.arange(n, dtype=np.int64), draws.cluster_counts),
        draws.path_counts,
    )
    order = np.lexsort((cells, rid))
    rid_s, cells_s = rid[order], cells[order]
    power_s = draws.path_amplitudes[order] ** 2
    new_group = np.empty(rid_s.size, dtype=bool)
    new_group[0] = True
    np.logical_or(rid_s[1:] != rid_s[:-1], cells_s[1:] != cells_s[:-1], out=new_group[1:])
    starts = np.flatnonzero(new_group)
    grp_power = np.add.reduceat(power_s, starts)
    grp_cells = cells_s[starts]
    grp_rid = rid_s[starts]
    bounds = np.searchsorted(grp_rid, np.arange(n + 1))
    return [
        (
            grp_cells[lo:hi].astype(np.float64) * grid,
            np.sqrt(grp_power[lo:hi]),
        )
        for lo, hi in zip(bounds[:-1], bounds[1:])
    ]


def _angular_separation_deg(a: AngularInfo, b: AngularInfo) -> float:
    """Great-circle angle between the receive directions of two AngularInfo."""

    def unit(az_deg, el_deg):
        az, el = math.radians(az_deg), math.radians(el_deg)
        return (
            math.cos(el) * math.cos(az),
            math.cos(el) * math.sin(az),
            math.sin(el),
        )

    ua = unit(a.azimuth_rx, a.elevation_rx)
    ub = unit(b.azimuth_rx, b.elevation_rx)
    dot = min(1.0, max(-1.0, sum(x * y for x, y in zip(ua, ub))))
    return math.degrees(math.acos(dot))


def apply_beam_filter(r: ChannelRealization, beam: BeamPattern) -> ChannelRealization:
    """Keep only clusters whose receive direction falls inside the beam cone.

    Membership is binary: the first path's rx angles must lie within
    ``width_deg / 2`` of the boresight.  The earliest surviving cluster is
    re-anchored to T = 0.

    Raises
    ------
    ValueError
        If any cluster lacks angular information on its first path.
    EmptyChannelError
        If the beam removes every cluster.
    """
    for c in r.clusters:
        if c.paths[0].angles is None:
            raise ValueError("beam filtering requires angles on each cluster's first path")
    kept = [
        c
        for c in r.clusters
        if _angular_separation_deg(c.paths[0].angles, beam.boresight)
        <= beam.width_deg / 2.0
    ]
    if not kept:
        raise EmptyChannelError("beam filtered out every cluster")
    t0 = kept[0].T
    return replace(
        r, clusters=tuple(replace(c, T=c.T - t0) for c in kept)
    )
