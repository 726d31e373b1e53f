"""Derived channel metrics: delay spread, frequency response, coherence
bandwidth, peak-to-average path amplitude ratios.

The statistical channel model carries amplitudes and delays but no phase, so
frequency-domain quantities here are amplitude-only approximations (taps are
assumed zero-phase).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .trace import TapSeries


@dataclass(frozen=True)
class FrequencyResponse:
    """|H(f)| over a uniform frequency grid."""

    frequencies: np.ndarray
    magnitudes: np.ndarray
    reference_band: float

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=np.float64)
        m = np.asarray(self.magnitudes, dtype=np.float64)
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "magnitudes", m)
        if f.shape != m.shape or f.ndim != 1 or f.size < 2:
            raise ValueError("frequency and magnitude grids must match, length >= 2")
        steps = np.diff(f)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9):
            raise ValueError("frequencies must ascend uniformly")
        if np.any(m < 0):
            raise ValueError("magnitudes must be >= 0")


def rms_delay_spread(taps: TapSeries) -> float:
    """Power-weighted standard deviation of tap delays.

    sqrt( sum_j p_j (tau_j - tau_bar)^2 / sum_j p_j ) with p_j the squared
    amplitude and tau_bar the power-weighted mean delay.  Invariant under
    amplitude scaling and delay translation.
    """
    if len(taps) == 0:
        raise ValueError("delay spread of an empty series is undefined")
    p = taps.amplitudes**2
    mean = np.average(taps.delays, weights=p)
    return float(np.sqrt(np.average((taps.delays - mean) ** 2, weights=p)))


def frequency_response(taps: TapSeries, bandwidth: float, n_points: int) -> FrequencyResponse:
    """|H(f)| = |sum_j a_j exp(-i 2 pi f tau_j)| on [0, bandwidth].

    Zero-phase taps assumed (amplitude-only approximation); the magnitude at
    f = 0 therefore equals the plain sum of tap amplitudes.
    """
    if bandwidth <= 0:
        raise ValueError("bandwidth must be > 0")
    if n_points < 2:
        raise ValueError("need at least 2 frequency points")
    f = np.linspace(0.0, bandwidth, n_points)
    phase = -2j * np.pi * np.outer(f, taps.delays)
    h = np.abs(np.exp(phase) @ taps.amplitudes.astype(np.complex128))
    return FrequencyResponse(frequencies=f, magnitudes=h, reference_band=bandwidth)


def coherence_bandwidth(fr: FrequencyResponse, correlation_threshold: float = 0.9) -> float:
    """Smallest frequency lag whose magnitude autocorrelation drops below
    the threshold; returns the reference band if it never does.

    The autocorrelation at lag L bins is the cosine similarity of the
    magnitude grid against its L-shifted self, which is exactly 1 at every
    lag for a flat response.
    """
    if not 0.0 < correlation_threshold < 1.0:
        raise ValueError("correlation threshold must lie in (0, 1)")
    m = fr.magnitudes
    n = m.size
    df = float(fr.frequencies[1] - fr.frequencies[0])
    for lag in range(1, n):
        a, b = m[:-lag], m[lag:]
        denom = np.sqrt(np.sum(a * a) * np.sum(b * b))
        if denom == 0:
            return float(lag * df)
        if np.sum(a * b) / denom < correlation_threshold:
            return float(lag * df)
    return float(fr.reference_band)


def peak_to_average(r: ChannelRealization) -> np.ndarray:
    """Per-cluster ratio of the strongest path amplitude to the mean.

    Always >= 1, with equality exactly when every path in the cluster has
    the same amplitude.
    """
    out = []
    for c in r.clusters:
        alphas = np.array([p.alpha for p in c.paths])
        out.append(float(alphas.max() / alphas.mean()))
    return np.asarray(out)
