"""Higuchi fractal dimension, band-pass filtering, and the 17-dim EEG vector."""

import numpy as np
import pytest

from emofuse import dataset as ds
from emofuse.eeg_features import (
    EEG_FEATURE_NAMES,
    EegFeatureConfig,
    bandpass_filter,
    extract_eeg_features,
    higuchi_fd,
)
from emofuse.errors import DegenerateSignal, InvalidBand, TooShort

from oracles import bandpass_gain_direct, higuchi_direct


# --- higuchi_fd ---------------------------------------------------------------

def test_ramp_has_dimension_one():
    assert higuchi_fd(np.arange(1000.0), 32) == pytest.approx(1.0, abs=0.01)


def test_white_noise_dimension_near_two():
    x = np.random.default_rng(0).normal(size=500)
    assert 1.90 <= higuchi_fd(x, 32) <= 2.05


def test_random_walk_dimension_near_three_halves():
    x = np.cumsum(np.random.default_rng(1).normal(size=2000))
    assert higuchi_fd(x, 32) == pytest.approx(1.5, abs=0.1)


def test_constant_signal_rejected():
    with pytest.raises(DegenerateSignal):
        higuchi_fd(np.ones(500), 32)


def test_short_signal_rejected():
    with pytest.raises(TooShort):
        higuchi_fd(np.arange(63.0), 32)
    higuchi_fd(np.random.default_rng(2).normal(size=64), 32)  # boundary is fine


def test_scale_and_offset_invariance():
    x = np.random.default_rng(3).normal(size=400)
    base = higuchi_fd(x, 32)
    assert higuchi_fd(7.5 * x, 32) == pytest.approx(base, abs=1e-10)
    assert higuchi_fd(-2.0 * x, 32) == pytest.approx(base, abs=1e-10)
    assert higuchi_fd(x + 123.4, 32) == pytest.approx(base, abs=1e-10)


def test_complexity_ordering():
    rng = np.random.default_rng(4)
    noise = rng.normal(size=1000)
    walk = np.cumsum(rng.normal(size=1000))
    smooth = np.sin(np.linspace(0, 8 * np.pi, 1000))
    assert higuchi_fd(noise, 32) > higuchi_fd(walk, 32) > higuchi_fd(smooth, 32)


def test_matches_direct_definition():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(100, 600))
        k_max = int(rng.integers(2, n // 2 // 2 + 1))
        k_max = min(k_max, 32)
        x = rng.normal(size=n)
        assert higuchi_fd(x, k_max) == pytest.approx(
            higuchi_direct(x, k_max), abs=1e-9)


# --- bandpass_filter ------------------------------------------------------------

def _sine_signal(f_hz, rate_hz=250.0, seconds=8.0):
    t = np.arange(int(seconds * rate_hz)) / rate_hz
    row = np.sin(2 * np.pi * f_hz * t)
    return ds.MultichannelSignal(samples=np.tile(row, (12, 1)), sample_rate_hz=rate_hz)


def _steady_state_gain(f_hz, low_hz, high_hz):
    # measure in the middle of a long tone so edge transients don't leak in
    sig = _sine_signal(f_hz, seconds=40.0)
    out = bandpass_filter(sig, low_hz, high_hz)
    mid = slice(2500, -2500)
    return np.std(out.samples[0][mid]) / np.std(sig.samples[0][mid])


def test_stopband_tone_attenuated():
    ratio = _steady_state_gain(100.0, 0.5, 60.0)
    assert ratio < 0.10
    assert ratio == pytest.approx(bandpass_gain_direct(100.0, 0.5, 60.0, 250.0), abs=1e-6)


def test_passband_tone_preserved():
    ratio = _steady_state_gain(10.0, 0.5, 60.0)
    assert ratio == pytest.approx(bandpass_gain_direct(10.0, 0.5, 60.0, 250.0), abs=1e-6)
    assert abs(ratio - 1.0) < 0.10
    sig = _sine_signal(10.0)
    assert bandpass_filter(sig, 0.5, 60.0).samples.shape == sig.samples.shape


def test_invalid_band_rejected():
    sig = _sine_signal(10.0)
    with pytest.raises(InvalidBand):
        bandpass_filter(sig, 60.0, 0.5)
    with pytest.raises(InvalidBand):
        bandpass_filter(sig, 0.5, 200.0)  # above Nyquist


def test_zero_phase_alignment():
    sig = _sine_signal(10.0)
    out = bandpass_filter(sig, 0.5, 60.0)
    a = sig.samples[0][200:-200]
    b = out.samples[0][200:-200]
    corr = np.dot(a, b) / np.sqrt(np.dot(a, a) * np.dot(b, b))
    assert corr > 0.99


# --- extract_eeg_features ---------------------------------------------------------

def _signal_from_channels(channels, rate_hz=250.0):
    return ds.MultichannelSignal(samples=np.asarray(channels), sample_rate_hz=rate_hz)


def test_identical_channels_zero_asymmetry():
    row = np.random.default_rng(6).normal(size=500)
    vec = extract_eeg_features(_signal_from_channels(np.tile(row, (12, 1))))
    assert np.all(vec.asymmetry == 0.0)
    assert len(vec.fd) == 12 and len(vec.asymmetry) == 5


def test_asymmetry_is_left_minus_right():
    rng = np.random.default_rng(7)
    channels = rng.normal(size=(12, 500))
    vec = extract_eeg_features(_signal_from_channels(channels))
    for i, (left, right) in enumerate(ds.ASYMMETRY_PAIRS):
        li = ds.CHANNELS.index(left)
        ri = ds.CHANNELS.index(right)
        assert vec.asymmetry[i] == vec.fd[li] - vec.fd[ri]


def test_swapping_pairs_negates_asymmetry():
    rng = np.random.default_rng(8)
    channels = rng.normal(size=(12, 500))
    vec = extract_eeg_features(_signal_from_channels(channels))
    swapped = channels.copy()
    for left, right in ds.ASYMMETRY_PAIRS:
        li = ds.CHANNELS.index(left)
        ri = ds.CHANNELS.index(right)
        swapped[[li, ri]] = swapped[[ri, li]]
    vec2 = extract_eeg_features(_signal_from_channels(swapped))
    assert np.allclose(vec2.asymmetry, -vec.asymmetry, atol=1e-12)


def test_two_second_window_yields_17_dims():
    rng = np.random.default_rng(9)
    vec = extract_eeg_features(_signal_from_channels(rng.normal(size=(12, 500))))
    assert len(vec.values) == 17
    assert np.all(np.isfinite(vec.values))
    assert np.all(vec.fd > 0)
    assert len(EEG_FEATURE_NAMES) == 17


def test_error_names_offending_channel():
    rng = np.random.default_rng(10)
    channels = rng.normal(size=(12, 500))
    channels[ds.CHANNELS.index("C3")] = 1.0  # constant channel
    with pytest.raises(DegenerateSignal, match="C3"):
        extract_eeg_features(_signal_from_channels(channels))


def test_window_too_short_for_k_max():
    rng = np.random.default_rng(11)
    with pytest.raises(TooShort):
        extract_eeg_features(
            _signal_from_channels(rng.normal(size=(12, 60))),
            EegFeatureConfig(k_max=32),
        )


def test_optional_bandpass_in_config():
    rng = np.random.default_rng(12)
    channels = rng.normal(size=(12, 1000))
    plain = extract_eeg_features(_signal_from_channels(channels))
    filtered = extract_eeg_features(
        _signal_from_channels(channels), EegFeatureConfig(bandpass=(0.5, 60.0)))
    # filtering removes high-frequency content, so the FDs must drop
    assert np.all(filtered.fd < plain.fd)
