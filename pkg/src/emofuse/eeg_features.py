"""EEG features: Higuchi fractal dimension per channel plus left-right asymmetry indexes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .dataset import ASYMMETRY_PAIRS, CHANNELS, MultichannelSignal
from .errors import DegenerateSignal, InvalidBand, TooShort

DEFAULT_K_MAX = 32

EEG_FEATURE_NAMES = tuple(
    [f"fd_{ch}" for ch in CHANNELS] + [f"asym_{l}_{r}" for l, r in ASYMMETRY_PAIRS]
)


@dataclass(frozen=True)
class EegFeatureConfig:
    k_max: int = DEFAULT_K_MAX
    bandpass: tuple[float, float] | None = None  # (low_hz, high_hz), off by default

    def __post_init__(self):
        if self.k_max < 2:
            raise ValueError("k_max must be >= 2")


@dataclass(frozen=True)
class EegFeatureVector:
    fd: np.ndarray         # 12 values, canonical channel order
    asymmetry: np.ndarray  # 5 values, left FD minus right FD

    @property
    def values(self) -> np.ndarray:
        return np.concatenate([self.fd, self.asymmetry])


def higuchi_fd(x: np.ndarray, k_max: int = DEFAULT_K_MAX) -> float:
    """Higuchi fractal dimension of a 1-D series.

    For each delay k in 1..k_max and offset m in 1..k, the normalized curve
    length is

        L_m(k) = (sum_{i=1..n} |x[m+ik] - x[m+(i-1)k]|) * (N-1) / (n * k^2),
        n = floor((N-m)/k),

    averaged over m to get L(k).  The FD is the least-squares slope of
    ln L(k) against ln(1/k), all k weighted uniformly.
    """
    x = np.asarray(x, dtype=np.float64)
    n_samples = len(x)
    if n_samples < 2 * k_max:
        raise TooShort(f"need at least {2 * k_max} samples, got {n_samples}")
    log_lengths = np.empty(k_max)
    for k in range(1, k_max + 1):
        total = 0.0
        for m in range(k):  # m is 0-based here; spec offset is m+1
            sub = x[m::k]
            n_i = len(sub) - 1
            total += np.abs(np.diff(sub)).sum() * (n_samples - 1) / (n_i * k * k)
        length = total / k
        if length <= 0.0:
            raise DegenerateSignal(f"zero curve length at delay k={k}")
        log_lengths[k - 1] = np.log(length)
    log_inv_k = -np.log(np.arange(1, k_max + 1, dtype=np.float64))
    slope, _ = np.polyfit(log_inv_k, log_lengths, 1)
    return float(slope)


def bandpass_filter(
    sig: MultichannelSignal, low_hz: float = 0.5, high_hz: float = 60.0
) -> MultichannelSignal:
    """Zero-phase 2nd-order Butterworth band-pass, applied per channel."""
    nyquist = sig.sample_rate_hz / 2.0
    if not (0.0 < low_hz < high_hz < nyquist):
        raise InvalidBand(
            f"need 0 < low ({low_hz}) < high ({high_hz}) < Nyquist ({nyquist})"
        )
    sos = sps.butter(2, [low_hz, high_hz], btype="bandpass", fs=sig.sample_rate_hz, output="sos")
    filtered = sps.sosfiltfilt(sos, sig.samples, axis=1)
    return MultichannelSignal(
        samples=filtered, sample_rate_hz=sig.sample_rate_hz, channel_names=sig.channel_names
    )


def extract_eeg_features(
    window_signal: MultichannelSignal, cfg: EegFeatureConfig | None = None
) -> EegFeatureVector:
    """17-dim vector: FD per canonical channel, then the five asymmetry indexes."""
    cfg = cfg or EegFeatureConfig()
    if window_signal.channel_names != CHANNELS:
        raise ValueError("signal must carry the canonical channel order")
    if cfg.bandpass is not None:
        window_signal = bandpass_filter(window_signal, *cfg.bandpass)
    fd = np.empty(len(CHANNELS))
    for i, name in enumerate(CHANNELS):
        try:
            fd[i] = higuchi_fd(window_signal.samples[i], cfg.k_max)
        except (DegenerateSignal, TooShort) as exc:
            raise type(exc)(f"channel {name}: {exc}") from exc
    asym = np.array(
        [fd[CHANNELS.index(l)] - fd[CHANNELS.index(r)] for l, r in ASYMMETRY_PAIRS]
    )
    return EegFeatureVector(fd=fd, asymmetry=asym)
