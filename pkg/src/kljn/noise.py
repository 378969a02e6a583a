"""Band-limited Gaussian noise synthesis and spectrum estimation.

The noise generators emulate enhanced Johnson noise: zero-mean Gaussian,
flat one-sided power spectral density up to a hard bandwidth limit, and
zero power above it. Synthesis is done in the frequency domain (independent
complex Gaussian coefficients in-band, zero out-of-band, inverse real FFT),
which gives an exactly band-limited spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal


@dataclass(frozen=True)
class NoiseSpec:
    """Parameters of a band-limited white Gaussian noise source.

    psd_level   one-sided power spectral density (V^2/Hz or A^2/Hz)
    bandwidth   hard upper band edge (Hz)
    sample_rate sampling frequency (Hz), must satisfy Nyquist
    n_samples   number of samples to synthesize
    """

    psd_level: float
    bandwidth: float
    sample_rate: float
    n_samples: int

    def __post_init__(self):
        for name in ("psd_level", "bandwidth", "sample_rate"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.psd_level < 0:
            raise ValueError(f"psd_level must be >= 0, got {self.psd_level}")
        if self.bandwidth <= 0:
            raise ValueError(f"bandwidth must be > 0, got {self.bandwidth}")
        if self.sample_rate < 2.0 * self.bandwidth:
            raise ValueError(
                f"sample_rate {self.sample_rate} < 2*bandwidth {2 * self.bandwidth}: "
                "synthesis would alias"
            )
        if self.n_samples < 2:
            raise ValueError(f"n_samples must be >= 2, got {self.n_samples}")


@dataclass
class Waveform:
    """A sampled real-valued signal (voltage or current)."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.size == 0:
            raise ValueError("waveform must contain at least one sample")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("waveform contains non-finite samples")

    def __len__(self):
        return self.samples.size


def rng_for_period(master_seed: int, period_index: int) -> np.random.Generator:
    """Named random sub-stream for one bit-exchange period.

    Counter-based (Philox) keying makes streams independent across period
    indices and reproducible regardless of evaluation order, so periods can
    be simulated in parallel without changing any result.
    """
    return np.random.Generator(np.random.Philox(key=[master_seed, period_index]))


def synth_band_limited(spec: NoiseSpec, rng: np.random.Generator) -> Waveform:
    """Synthesize zero-mean Gaussian noise with a flat one-sided PSD on [0, B].

    Each in-band FFT bin gets an independent complex Gaussian coefficient
    scaled so that the expected one-sided density equals ``spec.psd_level``;
    out-of-band bins (and DC) are exactly zero. The sample variance converges
    to psd_level * bandwidth.
    """
    n = spec.n_samples
    fs = spec.sample_rate
    freqs = np.fft.rfftfreq(n, d=1.0 / fs)
    # include the bin at B itself; tolerance covers float grid round-off
    in_band = (freqs > 0) & (freqs <= spec.bandwidth * (1 + 1e-12))

    coeffs = np.zeros(freqs.size, dtype=complex)
    nyquist = n % 2 == 0
    if nyquist and in_band[-1]:
        # Nyquist bin of a real FFT must be real-valued
        in_band = in_band.copy()
        in_band[-1] = False
        coeffs[-1] = rng.standard_normal() * math.sqrt(spec.psd_level * fs * n / 2.0)
    m = int(np.count_nonzero(in_band))
    g = rng.standard_normal((m, 2))
    coeffs[in_band] = (g[:, 0] + 1j * g[:, 1]) * math.sqrt(spec.psd_level * fs * n / 4.0)

    samples = np.fft.irfft(coeffs, n=n)
    return Waveform(samples=samples, sample_rate=fs)


def periodogram(w: Waveform, n_bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Averaged one-sided power-density estimate of a waveform.

    Welch-style estimate with non-overlapping rectangular segments of length
    2*n_bins (no detrending, so the DC bin carries the signal mean). The
    integral of the returned density over frequency is Parseval-consistent
    with the mean square of the samples.

    Returns (frequencies, density), each of length n_bins + 1.
    """
    if n_bins < 2:
        raise ValueError(f"n_bins must be >= 2, got {n_bins}")
    if len(w) < 2 * n_bins:
        raise ValueError(
            f"waveform length {len(w)} too short for n_bins={n_bins} "
            f"(need >= {2 * n_bins})"
        )
    freqs, density = signal.welch(
        w.samples,
        fs=w.sample_rate,
        window="boxcar",
        nperseg=2 * n_bins,
        noverlap=0,
        detrend=False,
        scaling="density",
        return_onesided=True,
    )
    return freqs, density
