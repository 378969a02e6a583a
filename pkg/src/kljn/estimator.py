"""Finite-time mean-square measurement and squared-noise spectral theory.

A bit decision is made from the mean square of the channel signal averaged
over the exchange period. Squaring a Gaussian band-limited signal produces a
DC part (the level being measured) plus an AC residual with a triangular
spectrum; the averaging acts as a low-pass filter with cut-off f_B = 1/tau
on that residual.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .noise import Waveform


class SmallGammaWarning(UserWarning):
    """gamma below the regime where the flat-spectrum/Gaussian approximations hold."""


@dataclass(frozen=True)
class AveragingWindow:
    """Averaging-time bookkeeping: gamma = bandwidth * tau = bandwidth / f_b."""

    gamma: float
    bandwidth: float

    def __post_init__(self):
        if self.gamma <= 0 or self.bandwidth <= 0:
            raise ValueError("gamma and bandwidth must be positive")
        if self.gamma < 10:
            warnings.warn(
                f"gamma = {self.gamma} < 10: error-rate approximations assume "
                "many noise correlation times per averaging window",
                SmallGammaWarning,
                stacklevel=2,
            )

    @property
    def tau(self) -> float:
        return self.gamma / self.bandwidth

    @property
    def f_b(self) -> float:
        return self.bandwidth / self.gamma


@dataclass(frozen=True)
class Measurement:
    """Finite-time mean-square voltage and current for one period."""

    msv: float
    msi: float

    def __post_init__(self):
        if self.msv < 0 or self.msi < 0:
            raise ValueError("mean-square values cannot be negative")


def finite_mean_square(w: Waveform) -> float:
    """Arithmetic mean of the squared samples."""
    if len(w) == 0:
        raise ValueError("empty waveform")
    return float(np.mean(np.square(w.samples)))


def measurement_slice(n_samples: int) -> slice:
    """Index range of the samples entering the per-period measurement.

    The measurement boxcar spans the trailing half of the period, i.e. a
    duration of 1/(2 f_B). A boxcar of that length has equivalent noise
    bandwidth exactly f_B, matching the low-pass-filter model with cut-off
    f_B that the closed-form error probabilities are derived from. (A boxcar
    over the full period would have noise bandwidth f_B/2 and understate the
    fluctuations by sqrt(2).)
    """
    return slice(n_samples // 2, n_samples)


def measure_period(u_c: Waveform, i_c: Waveform) -> Measurement:
    """Finite-time mean-square measurement of one period's channel waveforms."""
    if len(u_c) != len(i_c):
        raise ValueError(f"length mismatch: {len(u_c)} vs {len(i_c)}")
    sl = measurement_slice(len(u_c))
    return Measurement(
        msv=float(np.mean(np.square(u_c.samples[sl]))),
        msi=float(np.mean(np.square(i_c.samples[sl]))),
    )


def squared_noise_psd_theory(f, s_level: float, bandwidth: float, q: float = 1.0):
    """One-sided PSD of the AC part of the squared signal.

    For a Gaussian signal with flat one-sided PSD ``s_level`` on [0, B], the
    square's AC component has the triangular spectrum
    2 q^2 B s_level^2 (1 - f / 2B) on [0, 2B] and zero above. Vectorized in f.
    """
    f = np.asarray(f, dtype=float)
    peak = 2.0 * q * q * bandwidth * s_level * s_level
    out = np.where(f <= 2.0 * bandwidth, peak * (1.0 - f / (2.0 * bandwidth)), 0.0)
    out = np.where(f < 0, 0.0, out)
    if out.ndim == 0:
        return float(out)
    return out


def averaged_fluctuation_rms(s_level: float, window: AveragingWindow, q: float = 1.0) -> float:
    """RMS of the residual fluctuation of the finite-time mean square.

    Flat-spectrum approximation: the averaging filter passes the squared
    signal's spectrum up to f_B at its zero-frequency value, giving
    rms = q * s_level * f_b * sqrt(2 * gamma).
    """
    return q * s_level * window.f_b * math.sqrt(2.0 * window.gamma)
